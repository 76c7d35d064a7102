#include "adaptms/embed/embedder.hpp"

#include "adaptms/util/hash.hpp"
#include "adaptms/util/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace adaptms::embed {

void EmbedderConfig::validate() const {
  if (dim == 0) throw std::invalid_argument("embedder: dim must be > 0");
  if (ngram_orders.empty()) throw std::invalid_argument("embedder: ngram_orders must not be empty");
  for (int n : ngram_orders) {
    if (n < 1) throw std::invalid_argument("embedder: ngram orders must be >= 1");
  }
}

HashingEmbedder::HashingEmbedder(EmbedderConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::vector<double> embed_text(std::span<const data::TokenId> tokens, const EmbedderConfig& config) {
  std::vector<double> v(config.dim, 0.0);
  for (int order : config.ngram_orders) {
    const std::size_t n = static_cast<std::size_t>(order);
    if (tokens.size() < n) continue;
    const std::uint64_t order_key = util::mix64(config.hash_seed ^ (0x51ed2701ULL * n));
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::uint64_t h = order_key;
      for (std::size_t k = 0; k < n; ++k) h = util::mix64(h ^ (tokens[i + k] + 0x9e37ULL));
      const std::size_t index = static_cast<std::size_t>(h % config.dim);
      const double sign = (h >> 63) ? -1.0 : 1.0;
      v[index] += sign;
    }
  }
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
  }
  return v;
}

std::vector<double> HashingEmbedder::embed(std::span<const data::TokenId> tokens) const {
  return embed_text(tokens, config_);
}

std::string HashingEmbedder::fingerprint() const {
  std::string key = "hashing-v1;dim=" + std::to_string(config_.dim) +
                    ";seed=" + std::to_string(config_.hash_seed) + ";orders=";
  for (int n : config_.ngram_orders) key += std::to_string(n) + ",";
  return util::fingerprint(key);
}

}  // namespace adaptms::embed

#pragma once

#include "adaptms/data/corpus.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace adaptms::embed {

/// Frozen text encoder: maps a token sequence to a fixed-size vector. Any
/// implementation must be deterministic; training never updates it.
class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual std::size_t dim() const = 0;
  virtual std::vector<double> embed(std::span<const data::TokenId> tokens) const = 0;
  /// Identifies the embedding function (used to key caches).
  virtual std::string fingerprint() const = 0;
};

struct EmbedderConfig {
  std::size_t dim = 768;
  std::uint64_t hash_seed = 0x5eed;
  std::vector<int> ngram_orders{1, 2};

  void validate() const;
};

/// Signed feature hashing over token n-grams, L2-normalized. Stands in for a frozen
/// pretrained sentence encoder.
class HashingEmbedder final : public TextEmbedder {
 public:
  explicit HashingEmbedder(EmbedderConfig config);

  std::size_t dim() const override { return config_.dim; }
  std::vector<double> embed(std::span<const data::TokenId> tokens) const override;
  std::string fingerprint() const override;
  const EmbedderConfig& config() const { return config_; }

 private:
  EmbedderConfig config_;
};

/// Free-function form of HashingEmbedder::embed.
std::vector<double> embed_text(std::span<const data::TokenId> tokens, const EmbedderConfig& config);

}  // namespace adaptms::embed

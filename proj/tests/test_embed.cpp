#include "adaptms/data/generate.hpp"
#include "adaptms/embed/embedder.hpp"
#include "adaptms/embed/embedding_table.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"

using namespace adaptms;
using embed::EmbedderConfig;

namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("embeddings are unit length, deterministic and sized") {
  const embed::HashingEmbedder e(EmbedderConfig{});
  const data::TokenId tokens[] = {3, 150, 420, 420, 999};
  const auto v = e.embed(tokens);
  CHECK(v.size() == 768);
  CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.embed(tokens) == v);
  CHECK(norm(e.embed({})) == 0.0);
}

TEST_CASE("a single unigram hashes to one signed coordinate") {
  EmbedderConfig cfg;
  cfg.ngram_orders = {1};
  const data::TokenId one[] = {42};
  const auto v = embed::embed_text(one, cfg);
  int nonzero = 0;
  for (double x : v) {
    if (x != 0.0) {
      ++nonzero;
      CHECK(std::abs(x) == 1.0);
    }
  }
  CHECK(nonzero == 1);
}

TEST_CASE("unigrams ignore order, bigrams do not") {
  EmbedderConfig uni;
  uni.ngram_orders = {1};
  const data::TokenId a[] = {1, 2, 3, 4};
  const data::TokenId b[] = {4, 3, 2, 1};
  CHECK(embed::embed_text(a, uni) == embed::embed_text(b, uni));
  const EmbedderConfig bi;
  CHECK(embed::embed_text(a, bi) != embed::embed_text(b, bi));
}

TEST_CASE("hash seed and config change the function and its fingerprint") {
  EmbedderConfig a, b;
  b.hash_seed = a.hash_seed + 1;
  const data::TokenId t[] = {5, 6, 7};
  CHECK(embed::embed_text(t, a) != embed::embed_text(t, b));
  CHECK(embed::HashingEmbedder(a).fingerprint() != embed::HashingEmbedder(b).fingerprint());
  EmbedderConfig bad;
  bad.dim = 0;
  CHECK_THROWS_AS(embed::HashingEmbedder{bad}, std::invalid_argument);
  bad = {};
  bad.ngram_orders = {0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("embedding cache round trip and invalidation") {
  const auto specs = data::standard_platform_specs();
  const data::Corpus corpus = data::generate_corpus(specs, 50, 1);
  EmbedderConfig cfg;
  cfg.dim = 32;
  const embed::HashingEmbedder e(cfg);
  const auto path = std::filesystem::temp_directory_path() / "adaptms_test_embed.bin";
  std::filesystem::remove(path);

  const auto first = embed::embed_corpus_cached(corpus, e, path);
  CHECK_FALSE(first.cache_hit);
  CHECK(first.table.size() == corpus.instances.size());
  const auto second = embed::embed_corpus_cached(corpus, e, path);
  CHECK(second.cache_hit);
  CHECK(second.table.rows == first.table.rows);
  CHECK(second.table.content_fingerprint() == first.table.content_fingerprint());

  const data::Corpus other = data::generate_corpus(specs, 50, 2);
  const auto third = embed::embed_corpus_cached(other, e, path);
  CHECK_FALSE(third.cache_hit);
  CHECK(third.warning.has_value());

  { std::ofstream(path, std::ios::binary) << "garbage"; }
  CHECK_THROWS_AS(embed::read_embedding_cache(path), std::runtime_error);
  const auto fourth = embed::embed_corpus_cached(corpus, e, path);
  CHECK_FALSE(fourth.cache_hit);
  CHECK(fourth.table.rows == first.table.rows);
  std::filesystem::remove(path);
}

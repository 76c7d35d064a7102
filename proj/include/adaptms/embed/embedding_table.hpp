#pragma once

#include "adaptms/data/corpus.hpp"
#include "adaptms/embed/embedder.hpp"
#include "adaptms/nn/matrix.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace adaptms::embed {

/// One frozen embedding row per corpus instance, in corpus order.
struct EmbeddingTable {
  std::uint64_t hash_seed = 0;
  std::string corpus_fingerprint;
  std::string embedder_fingerprint;
  nn::Matrix rows;

  std::size_t dim() const { return rows.cols(); }
  std::size_t size() const { return rows.rows(); }
  /// sha256-based fingerprint of the embedding values.
  std::string content_fingerprint() const;
};

EmbeddingTable embed_corpus(const data::Corpus& corpus, const TextEmbedder& embedder,
                            std::uint64_t hash_seed = 0);

/// Binary cache: magic, version, dim, hash_seed, row count, corpus fingerprint, embedder
/// fingerprint, then rows of little-endian IEEE doubles.
void write_embedding_cache(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable read_embedding_cache(const std::filesystem::path& path);

struct CachedEmbedding {
  EmbeddingTable table;
  bool cache_hit = false;
  std::optional<std::string> warning;
};

/// Loads the cache when its corpus and embedder fingerprints match; otherwise recomputes,
/// rewrites the cache and reports why.
CachedEmbedding embed_corpus_cached(const data::Corpus& corpus, const HashingEmbedder& embedder,
                                    const std::filesystem::path& cache_path);

}  // namespace adaptms::embed

#include "adaptms/embed/embedding_table.hpp"

#include "adaptms/util/hash.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace adaptms::embed {

namespace {

constexpr char kMagic[8] = {'A', 'M', 'S', 'E', 'M', 'B', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "binary caches assume a little-endian host");

void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("embedding cache: truncated header");
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const std::uint64_t n = get_u64(in);
  if (n > 4096) throw std::runtime_error("embedding cache: corrupt string length");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw std::runtime_error("embedding cache: truncated header");
  return s;
}

}  // namespace

std::string EmbeddingTable::content_fingerprint() const {
  return util::fingerprint(std::string_view(reinterpret_cast<const char*>(rows.data()),
                                            rows.size() * sizeof(double)));
}

EmbeddingTable embed_corpus(const data::Corpus& corpus, const TextEmbedder& embedder,
                            std::uint64_t hash_seed) {
  EmbeddingTable table;
  table.hash_seed = hash_seed;
  table.corpus_fingerprint = corpus.content_hash();
  table.embedder_fingerprint = embedder.fingerprint();
  table.rows = nn::Matrix(corpus.instances.size(), embedder.dim());
  for (std::size_t i = 0; i < corpus.instances.size(); ++i) {
    const auto v = embedder.embed(corpus.instances[i].tokens);
    std::copy(v.begin(), v.end(), table.rows.row(i).begin());
  }
  return table;
}

void write_embedding_cache(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(kMagic, sizeof kMagic);
  put_u64(out, table.dim());
  put_u64(out, table.hash_seed);
  put_u64(out, table.size());
  put_string(out, table.corpus_fingerprint);
  put_string(out, table.embedder_fingerprint);
  out.write(reinterpret_cast<const char*>(table.rows.data()),
            static_cast<std::streamsize>(table.rows.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

EmbeddingTable read_embedding_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embedding cache " + path.string());
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw std::runtime_error("embedding cache: bad magic in " + path.string());
  }
  EmbeddingTable table;
  const std::uint64_t dim = get_u64(in);
  table.hash_seed = get_u64(in);
  const std::uint64_t n = get_u64(in);
  table.corpus_fingerprint = get_string(in);
  table.embedder_fingerprint = get_string(in);
  table.rows = nn::Matrix(n, dim);
  in.read(reinterpret_cast<char*>(table.rows.data()),
          static_cast<std::streamsize>(table.rows.size() * sizeof(double)));
  if (!in) throw std::runtime_error("embedding cache: truncated rows in " + path.string());
  return table;
}

CachedEmbedding embed_corpus_cached(const data::Corpus& corpus, const HashingEmbedder& embedder,
                                    const std::filesystem::path& cache_path) {
  CachedEmbedding result;
  const std::string corpus_fp = corpus.content_hash();
  if (std::filesystem::exists(cache_path)) {
    try {
      EmbeddingTable cached = read_embedding_cache(cache_path);
      if (cached.corpus_fingerprint == corpus_fp &&
          cached.embedder_fingerprint == embedder.fingerprint() &&
          cached.size() == corpus.instances.size() && cached.dim() == embedder.dim()) {
        result.table = std::move(cached);
        result.cache_hit = true;
        return result;
      }
      result.warning = "embedding cache " + cache_path.string() +
                       " was built for a different corpus or embedder; recomputing";
    } catch (const std::exception& e) {
      result.warning = std::string("embedding cache unreadable (") + e.what() + "); recomputing";
    }
  }
  result.table = embed_corpus(corpus, embedder, embedder.config().hash_seed);
  write_embedding_cache(result.table, cache_path);
  return result;
}

}  // namespace adaptms::embed

#include "adaptms/model/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace adaptms::model {

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot format assumes little-endian doubles");

constexpr char kMagic[8] = {'A', 'M', 'S', 'S', 'N', 'A', 'P', '1'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  template <class T>
  void pod(T v) {
    const auto at = out.size();
    out.resize(at + sizeof(T));
    std::memcpy(out.data() + at, &v, sizeof(T));
  }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    out += s;
  }
  std::string out;
};

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}
  template <class T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void doubles(std::span<double> dst) {
    need(dst.size_bytes());
    std::memcpy(dst.data(), bytes_.data() + pos_, dst.size_bytes());
    pos_ += dst.size_bytes();
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw std::runtime_error("snapshot: truncated data");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_snapshot(const Snapshot& snapshot) {
  Writer w;
  w.out.append(kMagic, sizeof(kMagic));
  w.pod(kVersion);
  w.str(snapshot.config_fingerprint);
  w.str(snapshot.corpus_hash);
  const ModelDims& d = snapshot.params.dims;
  for (std::size_t v : {d.text_dim, d.proj_dim, d.behavior_hidden, d.fusion_hidden, d.disc_hidden, d.num_platforms}) {
    w.pod<std::uint64_t>(v);
  }
  w.pod<std::uint8_t>(snapshot.params.options.gate_enabled);
  w.pod<std::uint8_t>(snapshot.params.options.behavior_enabled);
  const auto views = snapshot.params.state();
  w.pod<std::uint64_t>(views.size());
  for (const auto& view : views) {
    w.str(view.name);
    w.pod<std::uint64_t>(view.values.size());
    w.out.append(reinterpret_cast<const char*>(view.values.data()), view.values.size_bytes());
  }
  return std::move(w.out);
}

Snapshot parse_snapshot(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("snapshot: bad magic (not a model snapshot)");
  }
  const std::string body = bytes.substr(sizeof(kMagic));
  Reader r(body);
  const auto version = r.pod<std::uint32_t>();
  if (version != kVersion) throw std::runtime_error("snapshot: unsupported version " + std::to_string(version));
  Snapshot s;
  s.config_fingerprint = r.str();
  s.corpus_hash = r.str();
  ModelDims d;
  for (std::size_t* field : {&d.text_dim, &d.proj_dim, &d.behavior_hidden, &d.fusion_hidden, &d.disc_hidden,
                             &d.num_platforms}) {
    *field = r.pod<std::uint64_t>();
  }
  ModelOptions o;
  o.gate_enabled = r.pod<std::uint8_t>() != 0;
  o.behavior_enabled = r.pod<std::uint8_t>() != 0;
  s.params = ModelParams::zeros(d, o);
  std::map<std::string, std::span<double>> slots;
  for (auto& view : s.params.state()) slots.emplace(view.name, view.values);

  const auto count = r.pod<std::uint64_t>();
  if (count != slots.size()) throw std::runtime_error("snapshot: block count does not match the architecture");
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::string name = r.str();
    const auto n = r.pod<std::uint64_t>();
    const auto it = slots.find(name);
    if (it == slots.end()) throw std::runtime_error("snapshot: unknown block " + name);
    if (it->second.size() != n) throw std::runtime_error("snapshot: block " + name + " has the wrong size");
    r.doubles(it->second);
    slots.erase(it);
  }
  if (!slots.empty()) throw std::runtime_error("snapshot: missing block " + slots.begin()->first);
  if (!r.done()) throw std::runtime_error("snapshot: trailing bytes");
  return s;
}

void write_snapshot(const Snapshot& snapshot, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write snapshot " + path.string());
  const std::string bytes = serialize_snapshot(snapshot);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing snapshot " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_snapshot(buf.str());
}

}  // namespace adaptms::model

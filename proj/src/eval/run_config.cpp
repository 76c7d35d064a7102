#include "adaptms/eval/run_config.hpp"

#include "adaptms/data/corpus_io.hpp"
#include "adaptms/data/generate.hpp"
#include "adaptms/util/hash.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace adaptms::eval {

using nlohmann::json;

namespace {

// "train.lambda must be ..." -> ConfigError("train.lambda", "must be ...").
[[noreturn]] void rethrow_prefixed(const std::invalid_argument& e) {
  const std::string msg = e.what();
  const auto space = msg.find(' ');
  if (space == std::string::npos) throw ConfigError(msg, "invalid");
  throw ConfigError(msg.substr(0, space), msg.substr(space + 1));
}

json transfer_json(const Transfer& t) { return {{"sources", t.sources}, {"target", t.target}}; }

// Typed reads with field paths and unknown-key detection.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  template <typename T>
  void get(const char* key, T& field) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      j_.at(key).get_to(field);
    } catch (const json::exception& e) {
      throw ConfigError(field_path(key), std::string("wrong type (") + e.what() + ")");
    }
  }

  Reader child(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Reader(j_.contains(key) ? j_.at(key) : empty, field_path(key));
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& raw(const char* key) const { return j_.at(key); }
  std::string field_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(field_path(item.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Transfer transfer_from_json(const json& j, const std::string& path) {
  Reader r(j, path);
  Transfer t;
  r.get("sources", t.sources);
  r.get("target", t.target);
  r.finish();
  return t;
}

void check_transfer(const Transfer& t, std::size_t num_platforms, const std::string& path) {
  if (t.sources.empty()) throw ConfigError(path + ".sources", "must not be empty");
  auto in_range = [&](int p) { return p >= 0 && static_cast<std::size_t>(p) < num_platforms; };
  if (!in_range(t.target)) throw ConfigError(path + ".target", "platform id out of range");
  std::set<int> seen;
  for (int s : t.sources) {
    if (!in_range(s)) throw ConfigError(path + ".sources", "platform id out of range");
    if (s == t.target) throw ConfigError(path + ".sources", "target must not be a source");
    if (!seen.insert(s).second) throw ConfigError(path + ".sources", "duplicate platform");
  }
}

}  // namespace

std::string to_string(StatsMode mode) { return mode == StatsMode::exact ? "exact" : "audited"; }

std::string transfer_label(const Transfer& t, const std::vector<data::PlatformSpec>& specs) {
  auto name = [&](int p) {
    return p >= 0 && static_cast<std::size_t>(p) < specs.size() ? specs[static_cast<std::size_t>(p)].name
                                                                 : std::to_string(p);
  };
  std::string out;
  for (std::size_t i = 0; i < t.sources.size(); ++i) out += (i ? "+" : "") + name(t.sources[i]);
  return out + "->" + name(t.target);
}

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.generate.specs = data::standard_platform_specs();
  return c;
}

void RunConfig::validate() const {
  const auto& specs = generate.specs;
  if (specs.size() < 2) throw ConfigError("generate.specs", "need at least two platforms");
  for (std::size_t p = 0; p < specs.size(); ++p) {
    const std::string path = "generate.specs[" + std::to_string(p) + "]";
    try {
      specs[p].validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path, e.what());
    }
    if (specs[p].platform_id != static_cast<int>(p)) throw ConfigError(path + ".platform_id", "must equal its position");
    if (specs[p].name.empty() || specs[p].name.find_first_of(",+-> \t\n") != std::string::npos) {
      throw ConfigError(path + ".name", "must be non-empty without separators");
    }
  }
  if (generate.n_per_platform < 100) throw ConfigError("generate.n_per_platform", "must be at least 100");

  try {
    embed.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("embed", e.what());
  }
  try {
    model.validate();
    train.validate();
    fewshot.validate();
  } catch (const std::invalid_argument& e) {
    rethrow_prefixed(e);
  }
  if (model.text_dim != embed.dim) throw ConfigError("model.text_dim", "must equal embed.dim");
  if (model.num_platforms != specs.size()) throw ConfigError("model.num_platforms", "must equal the number of platforms");

  check_transfer(protocol.main, specs.size(), "protocol.main");
  for (std::size_t i = 0; i < protocol.pairwise.size(); ++i) {
    check_transfer(protocol.pairwise[i], specs.size(), "protocol.pairwise[" + std::to_string(i) + "]");
  }
  if (protocol.seeds.empty()) throw ConfigError("protocol.seeds", "must not be empty");
  if (std::set(protocol.seeds.begin(), protocol.seeds.end()).size() != protocol.seeds.size()) {
    throw ConfigError("protocol.seeds", "must be distinct");
  }
  if (protocol.k_grid.empty()) throw ConfigError("protocol.k_grid", "must not be empty");
  if (!std::is_sorted(protocol.k_grid.begin(), protocol.k_grid.end())) {
    throw ConfigError("protocol.k_grid", "must be ascending");
  }
  const std::size_t target_train = generate.n_per_platform * 70 / 100;
  if (protocol.k_grid.back() > target_train) throw ConfigError("protocol.k_grid", "k exceeds the target training split");
  if (protocol.lambda_grid.empty()) throw ConfigError("protocol.lambda_grid", "must not be empty");
  for (double l : protocol.lambda_grid) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("protocol.lambda_grid", "values must be finite and >= 0");
  }
  if (protocol.stats_mode == StatsMode::audited &&
      (protocol.audit_size < 2 || protocol.audit_size > target_train)) {
    throw ConfigError("protocol.audit_size", "must be in [2, target training size]");
  }
  if (search.budget == 0) throw ConfigError("search.budget", "must be positive");
  if (search.max_epochs == 0) throw ConfigError("search.max_epochs", "must be positive");
  if (io.out_dir.empty()) throw ConfigError("io.out_dir", "must not be empty");
}

std::string RunConfig::fingerprint() const {
  json j = to_json(*this);
  j.erase("io");
  return util::fingerprint(j.dump());
}

json to_json(const RunConfig& c) {
  json specs = json::array();
  for (const auto& s : c.generate.specs) specs.push_back(data::spec_to_json(s));
  json pairwise = json::array();
  for (const auto& t : c.protocol.pairwise) pairwise.push_back(transfer_json(t));
  return {
      {"generate", {{"specs", specs}, {"n_per_platform", c.generate.n_per_platform}, {"seed", c.generate.seed}}},
      {"embed", {{"dim", c.embed.dim}, {"hash_seed", c.embed.hash_seed}, {"ngram_orders", c.embed.ngram_orders}}},
      {"model",
       {{"text_dim", c.model.text_dim},
        {"proj_dim", c.model.proj_dim},
        {"behavior_hidden", c.model.behavior_hidden},
        {"fusion_hidden", c.model.fusion_hidden},
        {"disc_hidden", c.model.disc_hidden},
        {"num_platforms", c.model.num_platforms}}},
      {"train",
       {{"lambda", c.train.lambda},
        {"p_mod", c.train.p_mod},
        {"lr", c.train.lr},
        {"dropout_rate", c.train.dropout_rate},
        {"disc_lr_scale", c.train.disc_lr_scale},
        {"adam_beta1", c.train.adam_beta1},
        {"batch_size", c.train.batch_size},
        {"max_epochs", c.train.max_epochs},
        {"patience", c.train.patience},
        {"seed", c.train.seed}}},
      {"fewshot",
       {{"lr", c.fewshot.lr},
        {"max_steps", c.fewshot.max_steps},
        {"patience", c.fewshot.patience},
        {"seed", c.fewshot.seed}}},
      {"protocol",
       {{"main", transfer_json(c.protocol.main)},
        {"seeds", c.protocol.seeds},
        {"k_grid", c.protocol.k_grid},
        {"lambda_grid", c.protocol.lambda_grid},
        {"pairwise", pairwise},
        {"stats_mode", to_string(c.protocol.stats_mode)},
        {"audit_size", c.protocol.audit_size}}},
      {"search", {{"budget", c.search.budget}, {"seed", c.search.seed}, {"max_epochs", c.search.max_epochs}}},
      {"io",
       {{"corpus", c.io.corpus},
        {"embeddings", c.io.embeddings},
        {"snapshot", c.io.snapshot},
        {"out_dir", c.io.out_dir}}},
  };
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c = RunConfig::defaults();
  Reader root(j, "");

  Reader gen = root.child("generate");
  if (gen.has("specs")) {
    const json& arr = gen.raw("specs");
    if (!arr.is_array()) throw ConfigError("generate.specs", "expected an array");
    c.generate.specs.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "generate.specs[" + std::to_string(i) + "]";
      if (!arr[i].is_object()) throw ConfigError(path, "expected an object");
      try {
        c.generate.specs.push_back(data::spec_from_json(arr[i]));
      } catch (const std::exception& e) {
        throw ConfigError(path, e.what());
      }
    }
  }
  gen.get("n_per_platform", c.generate.n_per_platform);
  gen.get("seed", c.generate.seed);
  gen.finish();

  Reader emb = root.child("embed");
  emb.get("dim", c.embed.dim);
  emb.get("hash_seed", c.embed.hash_seed);
  emb.get("ngram_orders", c.embed.ngram_orders);
  emb.finish();

  Reader model = root.child("model");
  model.get("text_dim", c.model.text_dim);
  model.get("proj_dim", c.model.proj_dim);
  model.get("behavior_hidden", c.model.behavior_hidden);
  model.get("fusion_hidden", c.model.fusion_hidden);
  model.get("disc_hidden", c.model.disc_hidden);
  model.get("num_platforms", c.model.num_platforms);
  model.finish();

  Reader train = root.child("train");
  train.get("lambda", c.train.lambda);
  train.get("p_mod", c.train.p_mod);
  train.get("lr", c.train.lr);
  train.get("dropout_rate", c.train.dropout_rate);
  train.get("disc_lr_scale", c.train.disc_lr_scale);
  train.get("adam_beta1", c.train.adam_beta1);
  train.get("batch_size", c.train.batch_size);
  train.get("max_epochs", c.train.max_epochs);
  train.get("patience", c.train.patience);
  train.get("seed", c.train.seed);
  train.finish();

  Reader fs = root.child("fewshot");
  fs.get("lr", c.fewshot.lr);
  fs.get("max_steps", c.fewshot.max_steps);
  fs.get("patience", c.fewshot.patience);
  fs.get("seed", c.fewshot.seed);
  fs.finish();

  Reader proto = root.child("protocol");
  if (proto.has("main")) c.protocol.main = transfer_from_json(proto.raw("main"), "protocol.main");
  proto.get("seeds", c.protocol.seeds);
  proto.get("k_grid", c.protocol.k_grid);
  proto.get("lambda_grid", c.protocol.lambda_grid);
  if (proto.has("pairwise")) {
    const json& arr = proto.raw("pairwise");
    if (!arr.is_array()) throw ConfigError("protocol.pairwise", "expected an array");
    c.protocol.pairwise.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      c.protocol.pairwise.push_back(transfer_from_json(arr[i], "protocol.pairwise[" + std::to_string(i) + "]"));
    }
  }
  std::string mode = to_string(c.protocol.stats_mode);
  proto.get("stats_mode", mode);
  if (mode == "exact") {
    c.protocol.stats_mode = StatsMode::exact;
  } else if (mode == "audited") {
    c.protocol.stats_mode = StatsMode::audited;
  } else {
    throw ConfigError("protocol.stats_mode", "expected \"exact\" or \"audited\", got \"" + mode + "\"");
  }
  proto.get("audit_size", c.protocol.audit_size);
  proto.finish();

  Reader search = root.child("search");
  search.get("budget", c.search.budget);
  search.get("seed", c.search.seed);
  search.get("max_epochs", c.search.max_epochs);
  search.finish();

  Reader io = root.child("io");
  io.get("corpus", c.io.corpus);
  io.get("embeddings", c.io.embeddings);
  io.get("snapshot", c.io.snapshot);
  io.get("out_dir", c.io.out_dir);
  io.finish();

  root.finish();
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("not valid JSON: ") + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace adaptms::eval

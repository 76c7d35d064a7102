#pragma once

#include "adaptms/calib/fewshot.hpp"
#include "adaptms/data/corpus.hpp"
#include "adaptms/embed/embedder.hpp"
#include "adaptms/model/params.hpp"
#include "adaptms/model/train.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace adaptms::eval {

/// Invalid configuration; `field()` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Where the target's historical rating moments come from.
enum class StatsMode { exact, audited };

struct GenerateSection {
  std::vector<data::PlatformSpec> specs;  // defaults to the standard three platforms
  std::size_t n_per_platform = 10000;
  std::uint64_t seed = 2024;
};

/// One transfer direction, e.g. sources {0, 1} and target 2 for A+B->C.
struct Transfer {
  std::vector<int> sources;
  int target = 0;
  bool operator==(const Transfer&) const = default;
};

struct ProtocolSection {
  Transfer main{{0, 1}, 2};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<std::size_t> k_grid{0, 50, 200, 1000};
  std::vector<double> lambda_grid{0.0, 0.1, 0.5, 1.0};
  std::vector<Transfer> pairwise{{{0}, 1}, {{1}, 2}, {{0, 1}, 2}};
  StatsMode stats_mode = StatsMode::exact;
  std::size_t audit_size = 200;
};

struct SearchSection {
  std::size_t budget = 20;
  std::uint64_t seed = 7;
  std::size_t max_epochs = 6;  ///< per trial, to keep the search affordable
};

struct IoSection {
  std::string corpus = "corpus.tsv";
  std::string embeddings = "embeddings.bin";
  std::string snapshot = "model.snap";
  std::string out_dir = "out";
};

struct RunConfig {
  GenerateSection generate;
  embed::EmbedderConfig embed;
  model::ModelDims model;
  model::TrainConfig train;
  calib::FewShotConfig fewshot;
  ProtocolSection protocol;
  SearchSection search;
  IoSection io;

  /// Defaults with the standard platform specs filled in.
  static RunConfig defaults();
  /// Throws ConfigError naming the field.
  void validate() const;
  /// Hash of every section except io (paths do not change results).
  std::string fingerprint() const;
};

std::string to_string(StatsMode mode);
/// Platform names joined like "A+B->C".
std::string transfer_label(const Transfer& t, const std::vector<data::PlatformSpec>& specs);

nlohmann::json to_json(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys and wrong types raise ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);
/// Reads and validates a config file. Throws ConfigError for content problems and
/// std::runtime_error when the file cannot be read.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace adaptms::eval

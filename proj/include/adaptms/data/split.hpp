#pragma once

#include "adaptms/data/corpus.hpp"

#include <string>
#include <vector>

namespace adaptms::data {

/// Indices into Corpus::instances, chronological within each part.
struct PlatformSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

struct CorpusSplit {
  std::vector<PlatformSplit> platforms;
};

/// Earliest 70% train, next 15% validation, rest test, per platform
/// (boundaries floor(0.70 n) and floor(0.85 n)).
CorpusSplit time_split(const Corpus& corpus);

struct ImputationTable {
  /// Per-platform fill values, one per canonical feature.
  std::vector<BehaviorVector> fill;
};

struct ImputationResult {
  Corpus corpus;
  ImputationTable table;
  std::vector<std::string> warnings;
};

/// Replaces every missing feature with that platform's training-split mean of observed
/// values and sets m = 0 on each instance that needed any fill. A platform with no
/// observed training value for a feature falls back to the mean over all platforms'
/// training splits and records a warning.
ImputationResult impute_missing(const Corpus& corpus, const CorpusSplit& split);

struct PlatformDiagnostics {
  int platform = 0;
  std::string name;
  std::size_t count = 0;
  double mean_rating = 0.0;
  double sd_rating = 0.0;  ///< population convention
  double mean_review_tokens = 0.0;
  double missing_rate = 0.0;  ///< fraction of instances with m = 0
};

std::vector<PlatformDiagnostics> shift_diagnostics(const Corpus& corpus);
std::string format_diagnostics(const std::vector<PlatformDiagnostics>& rows);

}  // namespace adaptms::data

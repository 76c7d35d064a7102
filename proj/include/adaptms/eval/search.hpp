#pragma once

#include "adaptms/eval/benchmark.hpp"
#include "adaptms/eval/protocols.hpp"

#include <vector>

namespace adaptms::eval {

struct SearchSpace {
  std::vector<double> lr{1e-4, 3e-4, 1e-3};
  std::vector<double> dropout{0.1, 0.2, 0.3};
  std::vector<std::size_t> fusion_hidden{256, 512};
  std::vector<double> lambda{0.0, 0.1, 0.3, 0.5, 1.0};

  bool contains(double lr, double dropout, std::size_t fusion_hidden, double lambda) const;
};

struct Trial {
  double lr = 0.0;
  double dropout = 0.0;
  std::size_t fusion_hidden = 0;
  double lambda = 0.0;
  double val_rmse = 0.0;  ///< best source-validation RMSE of the trial
};

/// `budget` independent uniform draws from the grid.
std::vector<Trial> sample_trials(const SearchSpace& space, std::size_t budget, std::uint64_t seed);

struct SearchResult {
  Variant variant = Variant::adaptms;
  std::vector<Trial> trials;
  Trial best;
};

/// Random search for one variant on the main transfer: trains every draw (lambda is
/// pinned to 0 for the variants without alignment) and keeps the lowest source-validation
/// RMSE. Uses the run config's search budget, seed and per-trial epoch cap.
SearchResult hyperparameter_search(Harness& harness, Variant variant, const SearchSpace& space = {});

/// One row per trial plus the selection, as CSV with the config fingerprint.
std::string search_to_csv(const std::vector<SearchResult>& results, const std::string& fingerprint);

}  // namespace adaptms::eval

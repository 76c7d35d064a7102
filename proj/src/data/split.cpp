#include "adaptms/data/split.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace adaptms::data {

CorpusSplit time_split(const Corpus& corpus) {
  CorpusSplit split;
  split.platforms.resize(corpus.num_platforms());
  for (std::size_t p = 0; p < corpus.num_platforms(); ++p) {
    std::vector<std::size_t> idx = platform_indices(corpus, static_cast<int>(p));
    if (idx.size() < 10) {
      throw std::invalid_argument("time_split: platform " + std::to_string(p) + " has " +
                                  std::to_string(idx.size()) + " instances, need >= 10");
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return corpus.instances[a].time_index < corpus.instances[b].time_index;
    });
    const std::size_t n = idx.size();
    const std::size_t train_end = n * 70 / 100;
    const std::size_t val_end = n * 85 / 100;
    auto& ps = split.platforms[p];
    ps.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(train_end));
    ps.val.assign(idx.begin() + static_cast<std::ptrdiff_t>(train_end),
                  idx.begin() + static_cast<std::ptrdiff_t>(val_end));
    ps.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(val_end), idx.end());
  }
  return split;
}

ImputationResult impute_missing(const Corpus& corpus, const CorpusSplit& split) {
  const std::size_t num_platforms = corpus.num_platforms();
  if (split.platforms.size() != num_platforms) {
    throw std::invalid_argument("impute_missing: split covers " +
                                std::to_string(split.platforms.size()) + " platforms, corpus has " +
                                std::to_string(num_platforms));
  }
  ImputationResult result;
  result.table.fill.assign(num_platforms, BehaviorVector{});

  std::vector<BehaviorVector> sums(num_platforms, BehaviorVector{});
  std::vector<std::array<std::size_t, kBehaviorDim>> counts(num_platforms);
  BehaviorVector global_sum{};
  std::array<std::size_t, kBehaviorDim> global_count{};
  for (std::size_t p = 0; p < num_platforms; ++p) {
    counts[p].fill(0);
    for (std::size_t i : split.platforms[p].train) {
      const auto& b = corpus.instances[i].behavior;
      for (std::size_t f = 0; f < kBehaviorDim; ++f) {
        if (std::isnan(b[f])) continue;
        sums[p][f] += b[f];
        ++counts[p][f];
        global_sum[f] += b[f];
        ++global_count[f];
      }
    }
  }
  for (std::size_t p = 0; p < num_platforms; ++p) {
    for (std::size_t f = 0; f < kBehaviorDim; ++f) {
      if (counts[p][f] > 0) {
        result.table.fill[p][f] = sums[p][f] / static_cast<double>(counts[p][f]);
      } else if (global_count[f] > 0) {
        result.table.fill[p][f] = global_sum[f] / static_cast<double>(global_count[f]);
        result.warnings.push_back("platform " + std::to_string(p) + ": no observed training values for feature " +
                                  std::to_string(f) + ", using the all-platform training mean");
      } else {
        result.warnings.push_back("feature " + std::to_string(f) +
                                  " is unobserved on every platform, filling with 0");
      }
    }
  }

  result.corpus = corpus;
  for (auto& inst : result.corpus.instances) {
    bool filled = false;
    for (std::size_t f = 0; f < kBehaviorDim; ++f) {
      if (std::isnan(inst.behavior[f])) {
        inst.behavior[f] = result.table.fill[static_cast<std::size_t>(inst.platform)][f];
        filled = true;
      }
    }
    if (filled) inst.modality = 0;
  }
  return result;
}

std::vector<PlatformDiagnostics> shift_diagnostics(const Corpus& corpus) {
  std::vector<PlatformDiagnostics> rows;
  for (std::size_t p = 0; p < corpus.num_platforms(); ++p) {
    PlatformDiagnostics d;
    d.platform = static_cast<int>(p);
    d.name = corpus.specs[p].name;
    double sum = 0.0;
    double tokens = 0.0;
    std::size_t missing = 0;
    for (const auto& inst : corpus.instances) {
      if (inst.platform != d.platform) continue;
      ++d.count;
      sum += inst.label;
      tokens += static_cast<double>(inst.tokens.size());
      if (inst.modality == 0) ++missing;
    }
    if (d.count > 0) {
      const double n = static_cast<double>(d.count);
      d.mean_rating = sum / n;
      double ss = 0.0;
      for (const auto& inst : corpus.instances) {
        if (inst.platform == d.platform) ss += (inst.label - d.mean_rating) * (inst.label - d.mean_rating);
      }
      d.sd_rating = std::sqrt(ss / n);
      d.mean_review_tokens = tokens / n;
      d.missing_rate = static_cast<double>(missing) / n;
    }
    rows.push_back(d);
  }
  return rows;
}

std::string format_diagnostics(const std::vector<PlatformDiagnostics>& rows) {
  std::ostringstream os;
  os << "Platform\tN\tMean Rating\tAvg. Review Length\tMissing Behav.\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s\t%zu\t%.2f +- %.2f\t%.1f tokens\t%.1f%%\n", r.name.c_str(),
                  r.count, r.mean_rating, r.sd_rating, r.mean_review_tokens, 100.0 * r.missing_rate);
    os << buf;
  }
  return os.str();
}

}  // namespace adaptms::data

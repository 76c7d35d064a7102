#pragma once

#include "adaptms/eval/metrics.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace adaptms::eval {

/// One (variant, setting, seed) cell. `setting` is the report column, e.g. "A+B->C",
/// "k=200" or "lambda=0.5".
struct ReportRow {
  std::string variant;
  std::string setting;
  std::uint64_t seed = 0;
  double rmse = 0.0;
  double mae = 0.0;
  /// Held-out discriminator accuracy of the model behind the cell; NaN when not measured.
  double disc_accuracy = std::numeric_limits<double>::quiet_NaN();
};

struct AggregateCell {
  std::string variant;
  std::string setting;
  std::size_t seeds = 0;
  MeanSd rmse, mae, disc_accuracy;
};

struct GainRow {
  std::string setting;
  std::string baseline;
  std::string model;
  double gain = 0.0;  ///< relative_gain of the mean RMSEs
};

struct EvalReport {
  std::string name;
  std::string protocol;
  std::string config_fingerprint;
  std::string corpus_hash;
  std::vector<ReportRow> rows;
  std::vector<GainRow> gains;
  std::vector<std::string> notes;

  void add(ReportRow row);
  /// Distinct variants / settings in first-appearance order.
  std::vector<std::string> variants() const;
  std::vector<std::string> settings() const;
  /// Mean and sd over seeds per (variant, setting), in first-appearance order.
  std::vector<AggregateCell> aggregate() const;
  /// Throws std::out_of_range when the cell has no rows.
  AggregateCell cell(const std::string& variant, const std::string& setting) const;
  /// Throws std::logic_error if some cell has RMSE < MAE or a negative value.
  void validate() const;
};

/// One line per cell, fixed header, shortest round-trip number formatting.
std::string to_csv(const EvalReport& report);
/// Nested form: variants -> settings -> {rmse, mae, per-seed values}.
std::string to_json(const EvalReport& report);
/// Aligned text table of the aggregates (mean +/- sd of RMSE), variants as rows.
std::string format_table(const EvalReport& report);

}  // namespace adaptms::eval

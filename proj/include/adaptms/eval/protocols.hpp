#pragma once

#include "adaptms/eval/benchmark.hpp"
#include "adaptms/eval/report.hpp"

#include <string>
#include <vector>

namespace adaptms::eval {

enum class Variant { source_only, pool_noadapt, dann_only, finetune_all, adaptms };

std::string to_string(Variant v);

/// Recipe behind a variant for one transfer and seed. source_only trains on the first
/// listed source only; finetune_all starts from the source_only model.
Recipe variant_recipe(const Harness& harness, Variant v, const Transfer& transfer, std::uint64_t seed);

/// Model parameters a variant is evaluated with at k = 0 (trained, then moment matched
/// for adaptms).
model::ModelParams variant_params(Harness& harness, Variant v, const Transfer& transfer, std::uint64_t seed);

/// Parameters after target adaptation with k labeled target training rows. k = 0 returns
/// variant_params. Only finetune_all and adaptms adapt; others throw.
model::ModelParams adapted_params(Harness& harness, Variant v, const Transfer& transfer, std::size_t k,
                                  std::uint64_t seed);

/// The four zero-shot variants on the main transfer.
EvalReport run_unsupervised_protocol(Harness& harness);
/// finetune_all and adaptms over the k grid.
EvalReport run_fewshot_protocol(Harness& harness);
/// No-adaptation baseline vs adaptms per configured transfer, with gains.
EvalReport run_pairwise(Harness& harness);
/// adaptms over the lambda grid, with held-out discriminator accuracy.
EvalReport run_lambda_sweep(Harness& harness);
/// Ablation rows on the main transfer.
EvalReport run_ablation(Harness& harness);

/// Ablation rows in report order with the recipe each uses (calibrated or not).
struct AblationRow {
  std::string name;
  Recipe recipe;
  bool calibrated = true;
};
std::vector<AblationRow> ablation_rows(const Harness& harness, std::uint64_t seed);

/// Column label for a lambda value ("lambda=0.5", always with a decimal point).
std::string lambda_label(double lambda);

/// All five protocol reports in the order unsupervised, fewshot, lambda_sweep, ablation, pairwise.
std::vector<EvalReport> run_full_benchmark(Harness& harness);

}  // namespace adaptms::eval

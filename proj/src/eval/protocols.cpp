#include "adaptms/eval/protocols.hpp"

#include "adaptms/calib/fewshot.hpp"
#include "adaptms/util/float_io.hpp"

#include <stdexcept>

namespace adaptms::eval {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::source_only: return "source_only";
    case Variant::pool_noadapt: return "pool_noadapt";
    case Variant::dann_only: return "dann_only";
    case Variant::finetune_all: return "finetune_all";
    case Variant::adaptms: return "adaptms";
  }
  return "unknown";
}

std::string lambda_label(double lambda) {
  std::string s = util::format_double(lambda);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return "lambda=" + s;
}

namespace {

EvalReport new_report(const Harness& h, std::string name, std::string protocol) {
  EvalReport r;
  r.name = std::move(name);
  r.protocol = std::move(protocol);
  r.config_fingerprint = h.config().fingerprint();
  r.corpus_hash = h.data().corpus_hash;
  return r;
}

void finish(Harness& h, EvalReport& report) {
  for (auto& w : h.take_warnings()) report.notes.push_back("warning: " + w);
  report.validate();
}

std::string main_label(const Harness& h) { return transfer_label(h.config().protocol.main, h.config().generate.specs); }

ReportRow row(std::string variant, std::string setting, std::uint64_t seed, const Scores& s) {
  return {std::move(variant), std::move(setting), seed, s.rmse, s.mae};
}

}  // namespace

Recipe variant_recipe(const Harness& h, Variant v, const Transfer& transfer, std::uint64_t seed) {
  switch (v) {
    case Variant::source_only:
    case Variant::finetune_all: {
      Transfer single{{transfer.sources.front()}, transfer.target};
      return h.recipe(single, 0.0, seed);
    }
    case Variant::pool_noadapt: return h.recipe(transfer, 0.0, seed);
    case Variant::dann_only:
    case Variant::adaptms: return h.recipe(transfer, h.config().train.lambda, seed);
  }
  throw std::invalid_argument("unknown variant");
}

model::ModelParams variant_params(Harness& h, Variant v, const Transfer& transfer, std::uint64_t seed) {
  const model::ModelParams& trained = h.model(variant_recipe(h, v, transfer, seed)).params;
  if (v == Variant::adaptms) return h.moment_matched(trained, transfer.target, seed);
  return trained;
}

model::ModelParams adapted_params(Harness& h, Variant v, const Transfer& transfer, std::size_t k,
                                  std::uint64_t seed) {
  if (v != Variant::adaptms && v != Variant::finetune_all) {
    throw std::invalid_argument("variant " + to_string(v) + " has no few-shot adaptation");
  }
  model::ModelParams params = variant_params(h, v, transfer, seed);
  if (k == 0) return params;
  const auto rows = h.fewshot_rows(transfer.target, k, seed);
  h.fit_log().record("fewshot[" + to_string(v) + ",k=" + std::to_string(k) + ",seed=" + std::to_string(seed) + "]",
                     h.data().ids(rows));
  const model::Batch sample = h.data().batch(rows);
  calib::FewShotConfig cfg = h.config().fewshot;
  cfg.seed = util::derive_seed(seed, 0x600 + k);
  if (v == Variant::adaptms) {
    calib::fit_supervised_fewshot(params, sample, cfg);
  } else {
    calib::finetune_all(params, sample, variant_recipe(h, v, transfer, seed).train, cfg, h.data().fill);
  }
  return params;
}

EvalReport run_unsupervised_protocol(Harness& h) {
  EvalReport report = new_report(h, "unsupervised", "unsupervised");
  const Transfer& t = h.config().protocol.main;
  const std::string setting = main_label(h);
  for (Variant v : {Variant::source_only, Variant::pool_noadapt, Variant::dann_only, Variant::adaptms}) {
    for (std::uint64_t seed : h.config().protocol.seeds) {
      report.add(row(to_string(v), setting, seed, h.score(variant_params(h, v, t, seed), t.target)));
    }
  }
  report.notes.push_back("source_only trains on " + h.config().generate.specs[static_cast<std::size_t>(t.sources.front())].name +
                         " only; source_only, pool_noadapt and dann_only use the identity target calibration");
  finish(h, report);
  return report;
}

EvalReport run_fewshot_protocol(Harness& h) {
  EvalReport report = new_report(h, "fewshot", "fewshot");
  const Transfer& t = h.config().protocol.main;
  for (Variant v : {Variant::finetune_all, Variant::adaptms}) {
    for (std::size_t k : h.config().protocol.k_grid) {
      for (std::uint64_t seed : h.config().protocol.seeds) {
        report.add(row(to_string(v), "k=" + std::to_string(k), seed, h.score(adapted_params(h, v, t, k, seed), t.target)));
      }
    }
  }
  report.notes.push_back("adaptms at k=0 is the unsupervised report adaptms run (same models, same seeds)");
  report.notes.push_back("finetune_all at k=0 is its initialization, the unsupervised report source_only model");
  finish(h, report);
  return report;
}

EvalReport run_pairwise(Harness& h) {
  EvalReport report = new_report(h, "pairwise", "pairwise");
  for (const Transfer& t : h.config().protocol.pairwise) {
    const std::string setting = transfer_label(t, h.config().generate.specs);
    for (std::uint64_t seed : h.config().protocol.seeds) {
      const auto& base = h.model(h.recipe(t, 0.0, seed)).params;
      report.add(row("no_adapt", setting, seed, h.score(base, t.target)));
    }
    for (std::uint64_t seed : h.config().protocol.seeds) {
      const auto& trained = h.model(h.recipe(t, h.config().train.lambda, seed)).params;
      report.add(row("adaptms", setting, seed, h.score(h.moment_matched(trained, t.target, seed), t.target)));
    }
    report.gains.push_back({setting, "no_adapt", "adaptms",
                            relative_gain(report.cell("no_adapt", setting).rmse.mean,
                                          report.cell("adaptms", setting).rmse.mean)});
  }
  report.notes.push_back("no_adapt: lambda=0 and identity target calibration on the listed sources");
  finish(h, report);
  return report;
}

EvalReport run_lambda_sweep(Harness& h) {
  EvalReport report = new_report(h, "lambda_sweep", "lambda_sweep");
  const Transfer& t = h.config().protocol.main;
  for (double lambda : h.config().protocol.lambda_grid) {
    for (std::uint64_t seed : h.config().protocol.seeds) {
      const auto& trained = h.model(h.recipe(t, lambda, seed)).params;
      ReportRow r = row("adaptms", lambda_label(lambda), seed, h.score(h.moment_matched(trained, t.target, seed), t.target));
      r.disc_accuracy = h.disc_accuracy(trained);
      report.add(std::move(r));
    }
  }
  report.notes.push_back("disc_accuracy: the trained discriminator on the union of all platforms' test splits; chance is 1/" +
                         std::to_string(h.config().generate.specs.size()));
  finish(h, report);
  return report;
}

std::vector<AblationRow> ablation_rows(const Harness& h, std::uint64_t seed) {
  const Transfer& t = h.config().protocol.main;
  const double lambda = h.config().train.lambda;
  const Recipe full = h.recipe(t, lambda, seed);
  Recipe no_gate = full;
  no_gate.train.p_mod = 0.0;
  no_gate.options.gate_enabled = false;
  Recipe no_behavior = full;
  no_behavior.options.behavior_enabled = false;
  Recipe text_only = no_behavior;
  text_only.train.p_mod = 0.0;
  text_only.options.gate_enabled = false;
  return {
      {"full", full, true},
      {"w/o_calibration", full, false},
      {"w/o_adversarial", h.recipe(t, 0.0, seed), true},
      {"w/o_dropout_gating", no_gate, true},
      {"w/o_behavior", no_behavior, true},
      {"text_only", text_only, true},
  };
}

EvalReport run_ablation(Harness& h) {
  EvalReport report = new_report(h, "ablation", "ablation");
  const Transfer& t = h.config().protocol.main;
  const std::string setting = main_label(h);
  const auto& seeds = h.config().protocol.seeds;
  const std::size_t n_rows = ablation_rows(h, seeds.front()).size();
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::uint64_t seed : seeds) {
      const AblationRow a = ablation_rows(h, seed)[i];
      const auto& trained = h.model(a.recipe).params;
      const Scores s = a.calibrated ? h.score(h.moment_matched(trained, t.target, seed), t.target)
                                    : h.score(trained, t.target);
      report.add(row(a.name, setting, seed, s));
    }
  }
  report.notes.push_back("w/o_behavior zeroes the behavior input and forces m=0; text_only additionally disables the gate "
                         "and modality dropout");
  finish(h, report);
  return report;
}

std::vector<EvalReport> run_full_benchmark(Harness& h) {
  std::vector<EvalReport> out;
  out.push_back(run_unsupervised_protocol(h));
  out.push_back(run_fewshot_protocol(h));
  out.push_back(run_lambda_sweep(h));
  out.push_back(run_ablation(h));
  out.push_back(run_pairwise(h));
  return out;
}

}  // namespace adaptms::eval

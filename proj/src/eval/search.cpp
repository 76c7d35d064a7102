#include "adaptms/eval/search.hpp"

#include "adaptms/util/float_io.hpp"
#include "adaptms/util/rng.hpp"

#include <algorithm>
#include <stdexcept>

namespace adaptms::eval {

bool SearchSpace::contains(double l, double d, std::size_t f, double lam) const {
  auto in = [](const auto& set, auto v) { return std::find(set.begin(), set.end(), v) != set.end(); };
  return in(lr, l) && in(dropout, d) && in(fusion_hidden, f) && in(lambda, lam);
}

std::vector<Trial> sample_trials(const SearchSpace& space, std::size_t budget, std::uint64_t seed) {
  if (space.lr.empty() || space.dropout.empty() || space.fusion_hidden.empty() || space.lambda.empty()) {
    throw std::invalid_argument("search: every search dimension needs at least one value");
  }
  util::Rng rng(util::derive_seed(seed, 0x5ea4));
  std::vector<Trial> out(budget);
  for (auto& t : out) {
    t.lr = space.lr[rng.index(space.lr.size())];
    t.dropout = space.dropout[rng.index(space.dropout.size())];
    t.fusion_hidden = space.fusion_hidden[rng.index(space.fusion_hidden.size())];
    t.lambda = space.lambda[rng.index(space.lambda.size())];
  }
  return out;
}

SearchResult hyperparameter_search(Harness& h, Variant variant, const SearchSpace& space) {
  if (variant == Variant::finetune_all) throw std::invalid_argument("search: finetune_all has no source-phase search");
  const auto& cfg = h.config();
  const Transfer& t = cfg.protocol.main;
  if (h.data().indices(t.sources, Part::val).empty()) throw std::invalid_argument("search: empty validation split");
  const bool aligned = variant == Variant::dann_only || variant == Variant::adaptms;

  SearchResult result;
  result.variant = variant;
  result.trials = sample_trials(space, cfg.search.budget, cfg.search.seed);
  for (auto& trial : result.trials) {
    if (!aligned) trial.lambda = 0.0;
    Recipe r = variant_recipe(h, variant, t, cfg.search.seed);
    r.train.lr = trial.lr;
    r.train.dropout_rate = trial.dropout;
    r.train.lambda = trial.lambda;
    r.train.max_epochs = cfg.search.max_epochs;
    r.dims.fusion_hidden = trial.fusion_hidden;
    const model::TrainResult trained = train_model(h.data(), r, &h.fit_log());
    double best = trained.log.front().val_rmse;
    for (const auto& e : trained.log) best = std::min(best, e.val_rmse);
    trial.val_rmse = best;
  }
  result.best = *std::min_element(result.trials.begin(), result.trials.end(),
                                  [](const Trial& a, const Trial& b) { return a.val_rmse < b.val_rmse; });
  return result;
}

std::string search_to_csv(const std::vector<SearchResult>& results, const std::string& fingerprint) {
  std::string out = "variant,trial,lr,dropout,fusion_hidden,lambda,val_rmse,selected,config_fingerprint\n";
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.trials.size(); ++i) {
      const Trial& t = r.trials[i];
      const bool selected = t.lr == r.best.lr && t.dropout == r.best.dropout &&
                            t.fusion_hidden == r.best.fusion_hidden && t.lambda == r.best.lambda &&
                            t.val_rmse == r.best.val_rmse;
      out += to_string(r.variant) + ',' + std::to_string(i) + ',' + util::format_double(t.lr) + ',' +
             util::format_double(t.dropout) + ',' + std::to_string(t.fusion_hidden) + ',' +
             util::format_double(t.lambda) + ',' + util::format_double(t.val_rmse) + ',' + (selected ? "1" : "0") +
             ',' + fingerprint + '\n';
    }
  }
  return out;
}

}  // namespace adaptms::eval

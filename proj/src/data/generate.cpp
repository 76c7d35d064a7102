#include "adaptms/data/generate.hpp"

#include "adaptms/util/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace adaptms::data {

namespace {

// Token layout: [0,200) sentiment, [200,400) topic words (50 per cluster),
// [400,5000) general words. Each platform reads general words from its own window
// and over-uses the first kStyleTokens of that window (platform UI vocabulary).
// Boilerplate phrases reuse the first kBoilerplateTokens negative sentiment words.
constexpr TokenId kTopicBase = 200;
constexpr TokenId kTopicTokens = 50;
constexpr TokenId kGeneralBase = 400;
constexpr TokenId kWindowSize = 3000;
constexpr TokenId kStyleTokens = 4;
constexpr TokenId kBoilerplateTokens = 4;
constexpr TokenId kMaxWindowOffset =
    static_cast<TokenId>(kVocabSize) - kGeneralBase - kWindowSize;

constexpr double kSentimentShare = 0.30;
constexpr double kStyleShare = 0.15;
constexpr double kTopicShare = 0.10;

TokenId window_start(const PlatformSpec& spec) {
  return kGeneralBase + static_cast<TokenId>(spec.vocab_skew_seed % (kMaxWindowOffset + 1));
}

std::vector<TokenId> draw_tokens(const PlatformSpec& spec, double latent, std::size_t topic,
                                 util::Rng& rng) {
  const int length = std::max(3, rng.poisson(spec.mean_review_tokens));
  const TokenId start = window_start(spec);
  std::vector<TokenId> tokens;
  tokens.reserve(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    const double u = rng.uniform();
    TokenId t = 0;
    if (u < kSentimentShare) {
      const bool positive = rng.bernoulli(latent);
      t = static_cast<TokenId>(rng.index(kSentimentTokens / 2)) +
          (positive ? 0 : static_cast<TokenId>(kSentimentTokens / 2));
    } else if (u < kSentimentShare + kStyleShare) {
      t = start + static_cast<TokenId>(rng.index(kStyleTokens));
    } else if (u < kSentimentShare + kStyleShare + spec.boilerplate_share) {
      t = static_cast<TokenId>(kSentimentTokens / 2 + rng.index(kBoilerplateTokens));
    } else if (u < kSentimentShare + kStyleShare + spec.boilerplate_share + kTopicShare) {
      t = kTopicBase + static_cast<TokenId>(topic) * kTopicTokens +
          static_cast<TokenId>(rng.index(kTopicTokens));
    } else {
      t = start + static_cast<TokenId>(rng.index(kWindowSize));
    }
    tokens.push_back(t);
  }
  return tokens;
}

// Raw engagement aggregates, all monotone in the latent satisfaction.
BehaviorVector draw_raw_behavior(double latent, util::Rng& rng) {
  const double e = latent + rng.normal(0.0, 0.12);
  BehaviorVector b{};
  b[kMinutesWatched] = std::exp(3.8 + 1.6 * e + rng.normal(0.0, 0.35));
  b[kQuizAttempts] = rng.poisson(std::exp(0.6 + 1.5 * e));
  b[kForumReads] = rng.poisson(std::exp(1.2 + 1.4 * e));
  b[kForumPosts] = rng.poisson(std::exp(-1.0 + 1.8 * e));
  b[kActiveDays] = rng.binomial(kActiveDayWindow, std::clamp(0.1 + 0.6 * e, 0.01, 0.99));
  b[kRewatchRate] = 1.0 / (1.0 + std::exp(-(-1.2 + 1.8 * e + rng.normal(0.0, 0.4))));
  return b;
}

BehaviorVector apply_schema(const PlatformSpec& spec, const BehaviorVector& raw, util::Rng& rng) {
  BehaviorVector out{};
  for (std::size_t f = 0; f < kBehaviorDim; ++f) {
    // Always consume the draw so masks do not shift the random stream.
    const double z = rng.normal();
    double v = raw[f] * spec.schema_scale[f] * std::exp(spec.schema_noise[f] * z);
    switch (f) {
      case kQuizAttempts:
      case kForumReads:
      case kForumPosts: v = std::round(v); break;
      case kActiveDays: v = std::min<double>(std::round(v), kActiveDayWindow); break;
      case kRewatchRate: v = std::clamp(v, 0.0, 1.0); break;
      default: break;
    }
    out[f] = spec.logged_feature_mask[f] ? v : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace

Corpus generate_corpus(std::span<const PlatformSpec> specs, std::size_t n_per_platform,
                       std::uint64_t seed) {
  if (specs.empty()) throw std::invalid_argument("generate_corpus: no platform specs");
  if (n_per_platform < 10) {
    throw std::invalid_argument("generate_corpus: n_per_platform must be >= 10, got " +
                                std::to_string(n_per_platform));
  }
  for (std::size_t p = 0; p < specs.size(); ++p) {
    specs[p].validate();
    if (specs[p].platform_id != static_cast<int>(p)) {
      throw std::invalid_argument("generate_corpus: platform '" + specs[p].name +
                                  "' has platform_id " + std::to_string(specs[p].platform_id) +
                                  ", expected " + std::to_string(p));
    }
  }

  Corpus corpus;
  corpus.specs.assign(specs.begin(), specs.end());
  corpus.seed = seed;
  corpus.instances.reserve(specs.size() * n_per_platform);
  for (const auto& spec : specs) {
    util::Rng rng(util::derive_seed(seed, static_cast<std::uint64_t>(spec.platform_id)));
    for (std::size_t i = 0; i < n_per_platform; ++i) {
      Instance inst;
      inst.platform = spec.platform_id;
      inst.time_index = static_cast<std::int64_t>(i);
      const std::size_t topic = rng.categorical(spec.course_mix);
      const double mu = kTopicLatentMeans[topic];
      inst.latent = rng.beta(kLatentConcentration * mu, kLatentConcentration * (1.0 - mu));
      inst.tokens = draw_tokens(spec, inst.latent, topic, rng);
      const BehaviorVector raw = draw_raw_behavior(inst.latent, rng);
      inst.behavior = apply_schema(spec, raw, rng);
      if (rng.bernoulli(spec.missing_behavior_rate)) {
        inst.behavior.fill(std::numeric_limits<double>::quiet_NaN());
        inst.modality = 0;
      }
      const double noise = spec.rating_noise_sd > 0.0 ? rng.normal(0.0, spec.rating_noise_sd) : 0.0;
      inst.label =
          std::clamp(4.0 * spec.rating_alpha * inst.latent + spec.rating_beta + noise, 1.0, 5.0);
      corpus.instances.push_back(std::move(inst));
    }
  }
  return corpus;
}

std::vector<PlatformSpec> standard_platform_specs() {
  PlatformSpec a;
  a.platform_id = 0;
  a.name = "A";
  a.rating_alpha = 1.0695;
  a.rating_beta = 1.6906;
  a.rating_noise_sd = 0.35;
  a.mean_review_tokens = 28;
  a.missing_behavior_rate = 0.05;
  a.vocab_skew_seed = 0;
  a.course_mix = {0.15, 0.25, 0.35, 0.25};

  PlatformSpec b = a;
  b.platform_id = 1;
  b.name = "B";
  b.rating_noise_sd = 0.55;
  b.mean_review_tokens = 35;
  b.missing_behavior_rate = 0.12;
  b.vocab_skew_seed = 150;
  b.course_mix = {0.40, 0.10, 0.45, 0.05};

  PlatformSpec c = a;
  c.platform_id = 2;
  c.name = "C";
  c.rating_alpha = 1.3324;
  c.rating_beta = 1.8346;
  c.rating_noise_sd = 0.30;
  c.mean_review_tokens = 18;
  c.missing_behavior_rate = 0.40;
  c.vocab_skew_seed = 400;
  c.course_mix = {0.15, 0.25, 0.35, 0.25};
  c.boilerplate_share = 0.20;
  return {a, b, c};
}

}  // namespace adaptms::data

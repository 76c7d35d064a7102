#include "adaptms/data/corpus_io.hpp"
#include "adaptms/data/generate.hpp"
#include "adaptms/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "doctest.h"

using namespace adaptms::data;

namespace {

const Corpus& standard_corpus() {
  static const Corpus c = [] {
    const auto specs = standard_platform_specs();
    return generate_corpus(specs, 10000, 2024);
  }();
  return c;
}

}  // namespace

TEST_CASE("generation is a pure function of specs, size and seed") {
  const auto specs = standard_platform_specs();
  const Corpus a = generate_corpus(specs, 200, 9);
  const Corpus b = generate_corpus(specs, 200, 9);
  CHECK(serialize_corpus(a) == serialize_corpus(b));
  CHECK(serialize_corpus(a) != serialize_corpus(generate_corpus(specs, 200, 10)));
}

TEST_CASE("platforms draw from independent streams") {
  auto specs = standard_platform_specs();
  const Corpus a = generate_corpus(specs, 100, 3);
  specs[1].rating_noise_sd = 0.9;
  specs[1].missing_behavior_rate = 0.5;
  const Corpus b = generate_corpus(specs, 100, 3);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(a.instances[i].tokens == b.instances[i].tokens);
    CHECK(a.instances[i].label == b.instances[i].label);
    CHECK(a.instances[200 + i].label == b.instances[200 + i].label);
  }
}

TEST_CASE("standard corpus matches the target shift profile") {
  const auto diag = shift_diagnostics(standard_corpus());
  REQUIRE(diag.size() == 3);
  const double means[] = {4.35, 4.10, 4.70};
  const double missing[] = {0.05, 0.12, 0.40};
  const double tokens[] = {28, 35, 18};
  for (std::size_t p = 0; p < 3; ++p) {
    INFO("platform " << diag[p].name);
    CHECK(diag[p].count == 10000);
    CHECK(std::abs(diag[p].mean_rating - means[p]) < 0.05);
    CHECK(std::abs(diag[p].missing_rate - missing[p]) < 0.02);
    CHECK(std::abs(diag[p].mean_review_tokens - tokens[p]) < 0.5);
  }
  CHECK(std::abs(diag[2].sd_rating - 0.55) < 0.05);
  CHECK(diag[1].sd_rating > diag[2].sd_rating);
}

TEST_CASE("instances are well formed") {
  const Corpus& c = standard_corpus();
  for (std::size_t i = 0; i < c.instances.size(); ++i) {
    const Instance& x = c.instances[i];
    REQUIRE(x.label >= 1.0);
    REQUIRE(x.label <= 5.0);
    REQUIRE(x.latent >= 0.0);
    REQUIRE(x.latent <= 1.0);
    REQUIRE(x.tokens.size() >= 3);
    REQUIRE(std::all_of(x.tokens.begin(), x.tokens.end(), [](TokenId t) { return t < kVocabSize; }));
    if (x.modality == 1) {
      REQUIRE(x.behavior[kActiveDays] <= kActiveDayWindow);
      REQUIRE(x.behavior[kRewatchRate] <= 1.0);
      REQUIRE(std::none_of(x.behavior.begin(), x.behavior.end(), [](double v) { return std::isnan(v) || v < 0; }));
    } else {
      REQUIRE(std::all_of(x.behavior.begin(), x.behavior.end(), [](double v) { return std::isnan(v); }));
    }
    if (i > 0) {
      const Instance& prev = c.instances[i - 1];
      REQUIRE(std::pair(prev.platform, prev.time_index) < std::pair(x.platform, x.time_index));
    }
  }
}

TEST_CASE("noiseless labels follow the platform affine map of the latent") {
  auto specs = standard_platform_specs();
  for (auto& s : specs) s.rating_noise_sd = 0.0;
  const Corpus c = generate_corpus(specs, 500, 1);
  for (const auto& x : c.instances) {
    const auto& s = specs[static_cast<std::size_t>(x.platform)];
    const double expected = std::clamp(4.0 * s.rating_alpha * x.latent + s.rating_beta, 1.0, 5.0);
    REQUIRE(x.label == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("unlogged features are NaN on every instance") {
  auto specs = standard_platform_specs();
  specs[0].logged_feature_mask[kForumPosts] = false;
  const Corpus c = generate_corpus(specs, 100, 1);
  for (std::size_t i = 0; i < 100; ++i) CHECK(std::isnan(c.instances[i].behavior[kForumPosts]));
  const bool logged_or_missing = !std::isnan(c.instances[100].behavior[kForumPosts]) || c.instances[100].modality == 0;
  CHECK(logged_or_missing);
}

TEST_CASE("spec validation names the field") {
  auto spec = standard_platform_specs()[0];
  spec.missing_behavior_rate = 1.5;
  CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("missing_behavior_rate"), std::invalid_argument);
  spec = standard_platform_specs()[0];
  spec.boilerplate_share = 0.6;
  CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("boilerplate_share"), std::invalid_argument);
  spec = standard_platform_specs()[0];
  spec.course_mix = {};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  const auto specs = standard_platform_specs();
  CHECK_THROWS_AS(generate_corpus(specs, 5, 1), std::invalid_argument);
}

TEST_CASE("time split boundaries") {
  const auto specs = standard_platform_specs();
  const Corpus c = generate_corpus(specs, 101, 1);
  const CorpusSplit s = time_split(c);
  REQUIRE(s.platforms.size() == 3);
  for (const auto& p : s.platforms) {
    CHECK(p.train.size() == 70);  // floor(70.7)
    CHECK(p.val.size() == 15);    // floor(85.85) - 70
    CHECK(p.test.size() == 16);
    CHECK(c.instances[p.train.back()].time_index < c.instances[p.val.front()].time_index);
    CHECK(c.instances[p.val.back()].time_index < c.instances[p.test.front()].time_index);
  }
}

TEST_CASE("imputation uses observed training values only") {
  const auto specs = standard_platform_specs();
  Corpus c = generate_corpus(specs, 400, 5);
  const CorpusSplit split = time_split(c);
  const ImputationResult r = impute_missing(c, split);
  for (std::size_t p = 0; p < 3; ++p) {
    for (std::size_t f = 0; f < kBehaviorDim; ++f) {
      double sum = 0.0;
      int n = 0;
      for (std::size_t i : split.platforms[p].train) {
        if (!std::isnan(c.instances[i].behavior[f])) {
          sum += c.instances[i].behavior[f];
          ++n;
        }
      }
      CHECK(r.table.fill[p][f] == doctest::Approx(sum / n).epsilon(1e-12));
    }
  }
  for (std::size_t i = 0; i < c.instances.size(); ++i) {
    const auto& x = r.corpus.instances[i];
    CHECK(std::none_of(x.behavior.begin(), x.behavior.end(), [](double v) { return std::isnan(v); }));
    if (c.instances[i].modality == 0) CHECK(x.modality == 0);
  }
  // Test-split values never reach the fill table.
  for (std::size_t i : split.platforms[0].test) c.instances[i].behavior[kMinutesWatched] = 1e9;
  CHECK(impute_missing(c, split).table.fill[0] == r.table.fill[0]);
}

TEST_CASE("a platform without observed training values falls back with a warning") {
  auto specs = standard_platform_specs();
  specs[2].logged_feature_mask[kRewatchRate] = false;
  const Corpus c = generate_corpus(specs, 200, 5);
  const ImputationResult r = impute_missing(c, time_split(c));
  CHECK(!r.warnings.empty());
  CHECK(!std::isnan(r.table.fill[2][kRewatchRate]));
}

TEST_CASE("corpus files round trip bit-exactly") {
  auto specs = standard_platform_specs();
  specs[1].logged_feature_mask[kQuizAttempts] = false;
  Corpus c = generate_corpus(specs, 300, 77);
  c.config_fingerprint = "0123456789abcdef";
  const std::string text = serialize_corpus(c);
  const Corpus back = parse_corpus(text);
  CHECK(serialize_corpus(back) == text);
  CHECK(back.config_fingerprint == c.config_fingerprint);
  CHECK(back.content_hash() == c.content_hash());
  for (std::size_t i = 0; i < c.instances.size(); ++i) {
    REQUIRE(back.instances[i].latent == c.instances[i].latent);
    REQUIRE(back.instances[i].label == c.instances[i].label);
    REQUIRE(back.instances[i].tokens == c.instances[i].tokens);
  }
  const auto path = std::filesystem::temp_directory_path() / "adaptms_test_corpus.tsv";
  write_corpus(c, path);
  CHECK(serialize_corpus(read_corpus(path)) == text);
  std::filesystem::remove(path);
}

TEST_CASE("malformed corpus text is rejected") {
  CHECK_THROWS_AS(parse_corpus(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_corpus("nonsense\n"), std::invalid_argument);
  const auto specs = standard_platform_specs();
  std::string text = serialize_corpus(generate_corpus(specs, 20, 1));
  text += "0\tbad line\n";
  CHECK_THROWS_AS(parse_corpus(text), std::invalid_argument);
  CHECK_THROWS_AS(read_corpus("/nonexistent/corpus.tsv"), std::runtime_error);
}

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace adaptms::data {

/// Canonical behavioral aggregates, in storage order.
enum BehaviorFeature : std::size_t {
  kMinutesWatched = 0,
  kQuizAttempts = 1,
  kForumReads = 2,
  kForumPosts = 3,
  kActiveDays = 4,
  kRewatchRate = 5,
};

inline constexpr std::size_t kBehaviorDim = 6;
/// Active days are counted inside a fixed window from course start.
inline constexpr int kActiveDayWindow = 28;
inline constexpr std::size_t kVocabSize = 5000;
/// Ids [0, 100) are positive sentiment tokens, [100, 200) negative.
inline constexpr std::size_t kSentimentTokens = 200;

using TokenId = std::uint32_t;
/// A NaN entry marks a feature that was not logged.
using BehaviorVector = std::array<double, kBehaviorDim>;
using InstanceId = std::uint64_t;

/// Generative description of one platform's shift profile.
struct PlatformSpec {
  int platform_id = 0;
  std::string name;
  /// Noiseless rating = 4 * alpha * s + beta for latent satisfaction s in [0, 1].
  double rating_alpha = 1.0;
  double rating_beta = 1.0;
  double rating_noise_sd = 0.0;
  double mean_review_tokens = 20.0;
  double missing_behavior_rate = 0.0;
  /// Offsets the platform's vocabulary window (and thus its style tokens).
  std::uint64_t vocab_skew_seed = 0;
  std::array<bool, kBehaviorDim> logged_feature_mask{true, true, true, true, true, true};
  /// Mixture weights over topic clusters; clusters differ in mean satisfaction.
  std::vector<double> course_mix{0.25, 0.25, 0.25, 0.25};
  /// Logging-schema granularity: logged = raw * scale * exp(noise * N(0,1)).
  std::array<double, kBehaviorDim> schema_scale{1, 1, 1, 1, 1, 1};
  std::array<double, kBehaviorDim> schema_noise{0, 0, 0, 0, 0, 0};
  /// Fraction of tokens drawn from a small set of stock phrases that reuse
  /// negative sentiment words independently of satisfaction.
  double boilerplate_share = 0.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct Instance {
  std::vector<TokenId> tokens;
  BehaviorVector behavior{};
  int modality = 1;  ///< m: 1 when the behavioral log is available
  double label = 0.0;
  int platform = 0;
  std::int64_t time_index = 0;
  double latent = 0.0;  ///< generator-internal; models never read it

  InstanceId id() const {
    return (static_cast<InstanceId>(platform) << 32) | static_cast<std::uint32_t>(time_index);
  }
  bool operator==(const Instance&) const = default;
};

/// Instances sorted by (platform, time_index).
struct Corpus {
  std::vector<Instance> instances;
  std::vector<PlatformSpec> specs;
  std::uint64_t seed = 0;
  /// Fingerprint of the run configuration that produced this corpus (may be empty).
  std::string config_fingerprint;

  std::size_t num_platforms() const { return specs.size(); }
  std::string spec_fingerprint() const;
  /// Git-style content hash of the serialized corpus.
  std::string content_hash() const;
};

std::vector<std::size_t> platform_indices(const Corpus& corpus, int platform);

}  // namespace adaptms::data

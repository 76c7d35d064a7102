#include "adaptms/data/corpus.hpp"

#include "adaptms/data/corpus_io.hpp"
#include "adaptms/util/hash.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adaptms::data {

void PlatformSpec::validate() const {
  auto fail = [this](const std::string& field, const std::string& why) {
    throw std::invalid_argument("platform '" + name + "': " + field + " " + why);
  };
  if (platform_id < 0) fail("platform_id", "must be non-negative");
  if (!(rating_alpha > 0.0)) fail("rating_alpha", "must be > 0");
  if (!std::isfinite(rating_beta)) fail("rating_beta", "must be finite");
  if (!(rating_noise_sd >= 0.0)) fail("rating_noise_sd", "must be >= 0");
  if (!(mean_review_tokens > 0.0)) fail("mean_review_tokens", "must be > 0");
  if (!(missing_behavior_rate >= 0.0 && missing_behavior_rate <= 1.0)) {
    fail("missing_behavior_rate", "must lie in [0,1]");
  }
  if (std::count(logged_feature_mask.begin(), logged_feature_mask.end(), true) < 3) {
    fail("logged_feature_mask", "needs at least 3 logged features");
  }
  if (course_mix.empty()) fail("course_mix", "must not be empty");
  if (course_mix.size() > 4) fail("course_mix", "has more than 4 topic clusters");
  double total = 0.0;
  if (!(boilerplate_share >= 0.0 && boilerplate_share <= 0.5)) {
    fail("boilerplate_share", "must be in [0, 0.5]");
  }
  for (double w : course_mix) {
    if (!(w >= 0.0)) fail("course_mix", "weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) fail("course_mix", "weights must not all be zero");
  for (std::size_t f = 0; f < kBehaviorDim; ++f) {
    if (!(schema_scale[f] > 0.0)) fail("schema_scale", "entries must be > 0");
    if (!(schema_noise[f] >= 0.0)) fail("schema_noise", "entries must be >= 0");
  }
}

std::string Corpus::spec_fingerprint() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : specs) j.push_back(spec_to_json(s));
  return util::fingerprint(j.dump());
}

std::string Corpus::content_hash() const { return util::git_blob_hash(serialize_corpus(*this)); }

std::vector<std::size_t> platform_indices(const Corpus& corpus, int platform) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < corpus.instances.size(); ++i) {
    if (corpus.instances[i].platform == platform) out.push_back(i);
  }
  return out;
}

}  // namespace adaptms::data

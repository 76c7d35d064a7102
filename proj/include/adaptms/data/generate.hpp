#pragma once

#include "adaptms/data/corpus.hpp"

#include <span>

namespace adaptms::data {

/// Mean latent satisfaction of each topic cluster.
inline constexpr std::array<double, 4> kTopicLatentMeans{0.45, 0.58, 0.70, 0.80};
/// Beta concentration of the latent draw around its topic mean.
inline constexpr double kLatentConcentration = 8.0;

/// Deterministic synthetic corpus; a pure function of (specs, n_per_platform, seed).
/// Each platform draws from its own sub-seed, so platforms are independent streams.
Corpus generate_corpus(std::span<const PlatformSpec> specs, std::size_t n_per_platform,
                       std::uint64_t seed);

/// Three platforms A, B (sources) and C (target) shaped after the cross-platform shift
/// diagnostics: mean ratings 4.35 / 4.10 / 4.70 and missing-behavior rates 5% / 12% / 40%.
std::vector<PlatformSpec> standard_platform_specs();

}  // namespace adaptms::data

#pragma once

#include "adaptms/data/corpus.hpp"

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace adaptms::data {

nlohmann::json spec_to_json(const PlatformSpec& spec);
PlatformSpec spec_from_json(const nlohmann::json& j);

/// Newline-delimited text. Header line: format tag, seed, spec fingerprint, config
/// fingerprint and the platform specs. Then one instance per line, tab-separated:
/// platform, time_index, m, y, six behavior values, space-separated token ids, latent.
/// Doubles are written in shortest round-trip form, so reading back is bit-exact.
std::string serialize_corpus(const Corpus& corpus);
Corpus parse_corpus(std::string_view text);

void write_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus read_corpus(const std::filesystem::path& path);

}  // namespace adaptms::data

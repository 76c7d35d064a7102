#pragma once

#include "adaptms/model/params.hpp"

#include <filesystem>
#include <string>

namespace adaptms::model {

struct Snapshot {
  ModelParams params;
  std::string config_fingerprint;
  std::string corpus_hash;
};

/// Versioned binary format: magic, version, fingerprints, dims, options, then every state
/// block as (name, count, raw little-endian doubles). Round trips are bit exact.
std::string serialize_snapshot(const Snapshot& snapshot);
Snapshot parse_snapshot(const std::string& bytes);

void write_snapshot(const Snapshot& snapshot, const std::filesystem::path& path);
Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace adaptms::model

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace adaptms::util {

std::string sha256_hex(std::string_view bytes);

/// Git blob object id: sha1("blob <len>\0" + bytes).
std::string git_blob_hash(std::string_view bytes);

/// First 16 hex digits of sha256; used as a short config fingerprint.
std::string fingerprint(std::string_view bytes);

}  // namespace adaptms::util

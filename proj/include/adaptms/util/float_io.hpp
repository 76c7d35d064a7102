#pragma once

#include <string>
#include <string_view>

namespace adaptms::util {

/// Shortest decimal text that parses back to the identical double ("nan" for NaN).
std::string format_double(double v);
void append_double(std::string& out, double v);

/// Strict parse of the whole field; throws std::invalid_argument on junk.
double parse_double(std::string_view field);
long long parse_int(std::string_view field);

}  // namespace adaptms::util

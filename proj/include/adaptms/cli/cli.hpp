#pragma once

#include <iosfwd>

namespace adaptms::cli {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Parses argv and runs one subcommand (generate, train, evaluate, sweep, ablate,
/// print-default-config). Normal output goes to `out`, messages to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Raises the allocator's mmap and trim thresholds so the large per-step temporaries are
/// recycled instead of being mapped and unmapped on every batch. No-op off glibc.
void tune_allocator();

}  // namespace adaptms::cli

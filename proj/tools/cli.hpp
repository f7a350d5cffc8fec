#pragma once

#include <cstddef>
#include <iosfwd>

namespace sparrow::cli {

/// Exit codes: 0 success, 1 runtime failure, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs the `sparrow` command line. Results go to `out`, one-line
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Sample size that fits `megabytes` MiB of packed records of `dimension`
/// features. Throws UsageError when not even one record fits.
std::size_t sample_size_for_budget(double megabytes, std::size_t dimension);

}  // namespace sparrow::cli

#pragma once

#include <cstddef>
#include <cstdint>

namespace sparrow {

/// Cumulative statistics of one candidate rule during a search:
///   m = sum w_i (h(x_i) y_i - gamma),  v = sum w_i^2.
struct ScanState {
  double m = 0.0;
  double v = 0.0;
  std::uint64_t count = 0;
};

/// Parameters of the sequential test
///   count > t0  and  m > c * sqrt(v * (loglog(v / m) + b)).
struct StoppingConfig {
  double c = 1.0;
  double b = 0.0;
  std::uint64_t t0 = 256;
  std::uint64_t check_interval = 16;
};

inline constexpr double kDefaultStopSigma = 0.001;
inline constexpr std::uint64_t kDefaultBurnIn = 256;
inline constexpr std::uint64_t kDefaultCheckInterval = 16;

/// Throws InvalidInput unless c > 0, b > 0 and check_interval >= 1.
void validate(const StoppingConfig& cfg);

ScanState update_state(const ScanState& state, double weight,
                       double correlation, double gamma);

/// ln(max(1, ln(max(e, ratio)))). Never negative, so the bracket in the
/// threshold is at least b.
double loglog_term(double ratio);

/// Right-hand side of the test. Only meaningful for m > 0.
double stopping_threshold(const ScanState& state, const StoppingConfig& cfg);

bool should_stop(const ScanState& state, const StoppingConfig& cfg);

/// c = 1 and b = ln(1 / sigma) with sigma = sigma_total / num_candidates.
StoppingConfig config_for(std::size_t num_candidates, double sigma_total,
                          double c = 1.0, std::uint64_t t0 = kDefaultBurnIn,
                          std::uint64_t check_interval = kDefaultCheckInterval);

/// config_for(num_candidates, 0.001).
StoppingConfig default_config(std::size_t num_candidates);

}  // namespace sparrow

#include "sparrow/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sparrow/core.hpp"

namespace sparrow {

void validate(const StoppingConfig& cfg) {
  if (!(cfg.c > 0.0)) throw InvalidInput("stop.c must be positive");
  if (!(cfg.b > 0.0)) throw InvalidInput("stopping b term must be positive");
  if (cfg.check_interval < 1) {
    throw InvalidInput("stop.check_interval must be at least 1");
  }
}

ScanState update_state(const ScanState& state, double weight,
                       double correlation, double gamma) {
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw InvalidInput("update_state: weight must be positive and finite");
  }
  if (!(std::abs(correlation) <= 1.0)) {
    throw InvalidInput("update_state: |correlation| must be at most 1");
  }
  return ScanState{state.m + weight * (correlation - gamma),
                   state.v + weight * weight, state.count + 1};
}

double loglog_term(double ratio) {
  const double inner = std::log(std::max(std::numbers::e, ratio));
  return std::log(std::max(1.0, inner));
}

double stopping_threshold(const ScanState& state, const StoppingConfig& cfg) {
  return cfg.c * std::sqrt(state.v * (loglog_term(state.v / state.m) + cfg.b));
}

bool should_stop(const ScanState& state, const StoppingConfig& cfg) {
  if (state.count <= cfg.t0) return false;
  if (!(state.m > 0.0)) return false;
  return state.m > stopping_threshold(state, cfg);
}

StoppingConfig config_for(std::size_t num_candidates, double sigma_total,
                          double c, std::uint64_t t0,
                          std::uint64_t check_interval) {
  if (num_candidates < 1) {
    throw InvalidInput("stopping config needs at least one candidate");
  }
  if (!(sigma_total > 0.0 && sigma_total < 1.0)) {
    throw InvalidInput("stop.sigma must lie in (0, 1)");
  }
  const double sigma = sigma_total / static_cast<double>(num_candidates);
  StoppingConfig cfg{c, std::log(1.0 / sigma), t0, check_interval};
  validate(cfg);
  return cfg;
}

StoppingConfig default_config(std::size_t num_candidates) {
  return config_for(num_candidates, kDefaultStopSigma);
}

}  // namespace sparrow

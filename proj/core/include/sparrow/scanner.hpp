#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sparrow/core.hpp"
#include "sparrow/record.hpp"
#include "sparrow/stopping.hpp"
#include "sparrow/weak_learner.hpp"

namespace sparrow {

/// Searches stop (the run has converged) once gamma would drop below this.
inline constexpr double kGammaFloor = 0.001;
inline constexpr double kShrinkFactor = 0.9;

/// Incremental weight update: last_weight * exp(-y * s), where s is the
/// contribution of the rules added to `snapshot` since last_version.
double refresh_weight(double last_weight, std::uint32_t last_version,
                      Label label, std::span<const float> x,
                      const Ensemble& snapshot);

/// Pure form of refresh_weight on a stamped example; the result is stamped
/// with snapshot.version().
StampedExample update_weight(const StampedExample& example,
                             const Ensemble& snapshot);

/// 0.9 * max(max_empirical_edge, kGammaFloor), never below kGammaFloor.
double shrink_gamma(double max_empirical_edge);

struct Fired {
  SplitRule rule;
  std::size_t candidate = 0;
  double gamma = 0.0;
  double empirical_edge = 0.0;
  ScanState state;
  std::uint64_t scanned = 0;
};

struct Exhausted {
  double max_empirical_edge = 0.0;
  SplitRule best_rule;
  std::size_t best_candidate = 0;
  std::uint64_t scanned = 0;
};

using ScanOutcome = std::variant<Fired, Exhausted>;

struct ScanProgress {
  std::uint64_t scanned = 0;
  double n_eff = 0.0;  ///< effective size of the consumed prefix
  double best_edge = 0.0;
  double gamma = 0.0;
};

/// "scanned=<n> n_eff=<x> best_edge=<x> gamma=<x>"
std::string format_progress(const ScanProgress& progress);

struct FullScanResult {
  SplitRule best_rule;
  std::size_t best_candidate = 0;
  double empirical_edge = 0.0;
  std::uint64_t scanned = 0;
};

/// Owns the in-memory sample and runs sequential searches over it.
///
/// Per-candidate statistics are kept implicitly: for each open leaf and
/// feature a histogram of sum w*y over bins, plus global sums of w and w^2.
/// The ScanState of candidate (leaf, feature, threshold j, polarity p) is
///   m = p * (2 * sum_{b<=j} hist[b] - sum_b hist[b]) - gamma * sum w,
///   v = sum w^2,
/// which equals folding update_state over the scanned examples.
///
/// The read cursor persists across searches and wraps around the sample;
/// a search that reads sample().size() examples without firing is
/// exhausted.
class Scanner {
 public:
  Scanner() = default;
  explicit Scanner(SampleSet sample);

  void reset_sample(SampleSet sample);
  const SampleSet& sample() const { return sample_; }
  SampleSet release_sample();
  std::size_t cursor() const { return cursor_; }

  ScanOutcome scan(const Ensemble& snapshot, const CandidateSpace& candidates,
                   double gamma, const StoppingConfig& cfg);

  /// Reads the whole sample once and returns the candidate with the largest
  /// empirical edge (no early stopping).
  FullScanResult full_scan(const Ensemble& snapshot,
                           const CandidateSpace& candidates);

  /// Brings every stamp up to `snapshot`; returns the effective sample size.
  double refresh_all(const Ensemble& snapshot);

  /// Current stamped weights, in sample order.
  std::vector<double> weights() const;

  void set_progress_sink(std::function<void(const ScanProgress&)> sink) {
    progress_ = std::move(sink);
  }

 private:
  std::vector<float> features_;
  SampleSet sample_;
  std::size_t cursor_ = 0;
  std::function<void(const ScanProgress&)> progress_;
};

/// One search from the start of `sample`, with a fresh cursor.
ScanOutcome scan(SampleSet& sample, const Ensemble& snapshot,
                 const CandidateSpace& candidates, double gamma,
                 const StoppingConfig& cfg);

}  // namespace sparrow

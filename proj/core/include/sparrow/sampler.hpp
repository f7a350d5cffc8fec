#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "sparrow/core.hpp"
#include "sparrow/dataset.hpp"
#include "sparrow/record.hpp"
#include "sparrow/stratified_store.hpp"
#include "sparrow/weak_learner.hpp"

namespace sparrow {

using Rng = std::mt19937_64;

/// Picks stratum k with probability weight_sum_k / total. Empty strata are
/// never selected. Throws EmptyStore when every stratum is empty.
int select_stratum(const StratifiedStore& store, Rng& rng);

/// Acceptance probability of a record with refreshed weight w:
/// w / 2^(stratum_index(w) + 1), always in [1/2, 1).
double acceptance_probability(double weight);

/// Acceptance probability of a record popped from stratum k with refreshed
/// weight w: min(1, w / 2^(k + 1)). Equals acceptance_probability(w) when
/// the stored weight was current.
double acceptance_probability(double weight, int stratum);

/// Weighted sampling over a stratified store.
///
/// A step pops the head of the current stratum, refreshes its weight to the
/// snapshot, accepts it with acceptance_probability(w, k) for the stratum k
/// it was popped from and writes it back to the stratum matching w, accepted
/// or not. The current stratum is drawn
/// with select_stratum and kept until a record is accepted, which makes
/// the chance that a record is the next one accepted proportional to its
/// weight.
class StratifiedSampler {
 public:
  StratifiedSampler(StratifiedStore& store, std::uint64_t seed);

  /// One pop / refresh / accept-or-reject / write-back cycle. Returns the
  /// accepted example stamped with weight 1 and snapshot.version().
  std::optional<StampedExample> step(const Ensemble& snapshot);

  /// Steps until n examples are accepted. Throws InsufficientData when the
  /// store holds fewer than n records.
  SampleSet assemble(const Ensemble& snapshot, std::size_t n);

  std::uint64_t steps() const { return steps_; }
  std::uint64_t accepted() const { return accepted_; }
  StratifiedStore& store() { return store_; }

 private:
  bool step_into(const Ensemble& snapshot, std::vector<std::byte>& accepted);

  StratifiedStore& store_;
  Rng rng_;
  std::optional<int> current_;
  std::vector<std::byte> record_;
  std::vector<float> features_;
  std::uint64_t steps_ = 0;
  std::uint64_t accepted_ = 0;
};

/// Minimal-variance (systematic) sampling over a weight stream.
///
/// Weights are capped at theta and accumulated; an example is emitted when
/// the running total crosses offset + j * theta. Each example is emitted at
/// most once, with probability min(w, theta) / theta over the offset.
class SystematicSampler {
 public:
  SystematicSampler(double theta, double offset);

  bool offer(double weight);
  std::uint64_t accepted() const { return accepted_; }

 private:
  double theta_;
  double next_;
  double cumulative_ = 0.0;
  std::uint64_t accepted_ = 0;
};

/// Indices selected by SystematicSampler over `weights`.
std::vector<std::size_t> mv_sample(std::span<const double> weights,
                                   double theta, double offset);

/// Unit-weight sample of about n records from a shuffled dataset, drawn with
/// systematic sampling at theta = size / n.
SampleSet initial_sample(const DatasetFile& data, std::size_t n, Rng& rng);

}  // namespace sparrow

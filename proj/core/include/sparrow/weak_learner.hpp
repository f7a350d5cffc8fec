#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "sparrow/core.hpp"

namespace sparrow {

// ---------------------------------------------------------------------------
// Binning
// ---------------------------------------------------------------------------

/// Per-feature cut points. Threshold j of feature f sends x to the left
/// branch iff x[f] <= thresholds[f][j].
struct BinningConfig {
  std::size_t bins_per_feature = 64;
  std::vector<std::vector<double>> thresholds;

  std::size_t dimension() const { return thresholds.size(); }

  /// Index of the first threshold >= value, i.e. value <= t_j iff bin <= j.
  std::size_t bin_of(std::size_t feature, double value) const;
};

inline constexpr std::size_t kDefaultBins = 64;

/// Approximate-quantile cut points from an in-memory sample. Cuts are
/// midpoints between adjacent order statistics at ranks i*n/bins, deduplicated,
/// and restricted to [min, max) so every cut separates the sample.
BinningConfig build_bins(std::span<const LabeledExample> sample,
                         std::size_t bins_per_feature);

/// Column-accessor form used for packed samples.
BinningConfig build_bins(
    std::size_t dimension, std::size_t count,
    const std::function<void(std::size_t feature, std::vector<float>& column)>&
        load_column,
    std::size_t bins_per_feature);

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

struct Condition {
  std::uint32_t feature = 0;
  double threshold = 0.0;
  bool left = true;  ///< true: x[feature] <= threshold

  bool operator==(const Condition&) const = default;
};

/// Path from the root of a tree to one of its leaves. Empty is the root.
using Scope = std::vector<Condition>;

bool in_scope(const Scope& scope, std::span<const float> x);

/// A split of one leaf, used directly as a weak rule with range {-1, 0, +1}.
struct SplitRule {
  Scope scope;
  std::uint32_t feature = 0;
  double threshold = 0.0;
  std::int8_t polarity = 1;

  bool operator==(const SplitRule&) const = default;
};

/// 0 outside the scope; polarity if x[feature] <= threshold; -polarity
/// otherwise.
int predict_rule(const SplitRule& rule, std::span<const float> x);

/// Enumerates leaf x feature x threshold x polarity (+1 before -1) in that
/// nesting order. Candidate indices are positions in this order.
class CandidateSpace {
 public:
  struct Coord {
    std::size_t leaf;
    std::size_t feature;
    std::size_t threshold;
    int polarity;
  };

  CandidateSpace(std::shared_ptr<const BinningConfig> bins,
                 std::vector<Scope> leaves);

  std::size_t size() const { return leaves_.size() * per_leaf_; }
  std::size_t per_leaf() const { return per_leaf_; }
  const BinningConfig& bins() const { return *bins_; }
  const std::vector<Scope>& leaves() const { return leaves_; }

  /// Offset of feature f's first threshold among all thresholds of a leaf.
  std::size_t threshold_offset(std::size_t feature) const {
    return threshold_offsets_[feature];
  }
  std::size_t total_thresholds() const { return threshold_offsets_.back(); }

  std::size_t index_of(const Coord& coord) const;
  Coord decode(std::size_t index) const;
  SplitRule rule(std::size_t index) const;
  std::vector<SplitRule> rules() const;

 private:
  std::shared_ptr<const BinningConfig> bins_;
  std::vector<Scope> leaves_;
  std::vector<std::size_t> threshold_offsets_;  // size dimension + 1
  std::vector<std::size_t> feature_of_threshold_;
  std::size_t per_leaf_ = 0;
};

std::vector<SplitRule> candidate_rules(const BinningConfig& bins,
                                       const std::vector<Scope>& open_leaves);

// ---------------------------------------------------------------------------
// Trees and the ensemble
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDefaultMaxLeaves = 4;

/// Leaf-wise growth bookkeeping. A tree scopes the candidates of the next
/// search; every split is added to the ensemble as its own rule.
class Tree {
 public:
  explicit Tree(std::size_t max_leaves = kDefaultMaxLeaves);

  const std::vector<Scope>& leaves() const { return leaves_; }
  std::size_t leaf_count() const { return leaves_.size(); }
  std::size_t max_leaves() const { return max_leaves_; }
  bool full() const { return leaves_.size() >= max_leaves_; }

  /// Replaces the leaf equal to rule.scope by its two children.
  void split(const SplitRule& rule, double gamma);

  /// Gamma in effect when each split fired, in split order.
  const std::vector<double>& split_gammas() const { return split_gammas_; }

 private:
  std::size_t max_leaves_;
  std::vector<Scope> leaves_;
  std::vector<double> split_gammas_;
};

struct WeightedRule {
  SplitRule rule;
  double alpha = 0.0;
};

/// Append-only weighted rule list. Its version is the number of rules.
class Ensemble {
 public:
  std::uint32_t version() const {
    return static_cast<std::uint32_t>(rules_.size());
  }
  const std::vector<WeightedRule>& rules() const { return rules_; }

  void append(SplitRule rule, double alpha);

  /// Unclamped sum over rules with index in [from, to).
  double partial_score(std::uint32_t from, std::uint32_t to,
                       std::span<const float> x) const;
  /// Full score clamped to [-kScoreClamp, kScoreClamp].
  double score(std::span<const float> x) const;
  /// Unclamped contribution of rules with index >= from_version.
  double delta_score(std::uint32_t from_version, std::span<const float> x) const;

 private:
  std::vector<WeightedRule> rules_;
};

/// Immutable view handed to the scanner and the sampler.
using EnsembleSnapshot = std::shared_ptr<const Ensemble>;

}  // namespace sparrow

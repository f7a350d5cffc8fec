#include "sparrow/weak_learner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sparrow {

namespace {

std::vector<double> quantile_cuts(std::vector<float>& column,
                                  std::size_t bins_per_feature) {
  std::vector<double> cuts;
  const std::size_t n = column.size();
  if (bins_per_feature <= 1 || n < 2) return cuts;
  std::sort(column.begin(), column.end());
  const double lo = column.front();
  const double hi = column.back();
  for (std::size_t i = 1; i < bins_per_feature; ++i) {
    const std::size_t rank = i * n / bins_per_feature;
    if (rank == 0 || rank >= n) continue;
    const double cut =
        0.5 * (static_cast<double>(column[rank - 1]) + column[rank]);
    if (cut >= lo && cut < hi) cuts.push_back(cut);
  }
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

void check_dimension(std::uint32_t feature, std::span<const float> x) {
  if (feature >= x.size()) {
    throw InvalidInput("rule references feature " + std::to_string(feature) +
                       " but the vector has dimension " +
                       std::to_string(x.size()));
  }
}

}  // namespace

std::size_t BinningConfig::bin_of(std::size_t feature, double value) const {
  const auto& cuts = thresholds[feature];
  return static_cast<std::size_t>(
      std::lower_bound(cuts.begin(), cuts.end(), value) - cuts.begin());
}

BinningConfig build_bins(std::span<const LabeledExample> sample,
                         std::size_t bins_per_feature) {
  if (sample.empty()) throw InvalidInput("build_bins: empty sample");
  const std::size_t dimension = sample.front().features.size();
  for (const auto& ex : sample) validate(ex, dimension);
  return build_bins(
      dimension, sample.size(),
      [&](std::size_t feature, std::vector<float>& column) {
        for (std::size_t i = 0; i < sample.size(); ++i) {
          column[i] = sample[i].features[feature];
        }
      },
      bins_per_feature);
}

BinningConfig build_bins(
    std::size_t dimension, std::size_t count,
    const std::function<void(std::size_t, std::vector<float>&)>& load_column,
    std::size_t bins_per_feature) {
  if (count == 0) throw InvalidInput("build_bins: empty sample");
  if (bins_per_feature == 0) {
    throw InvalidInput("build_bins: bins_per_feature must be positive");
  }
  BinningConfig bins;
  bins.bins_per_feature = bins_per_feature;
  bins.thresholds.resize(dimension);
  std::vector<float> column(count);
  for (std::size_t f = 0; f < dimension; ++f) {
    load_column(f, column);
    bins.thresholds[f] = quantile_cuts(column, bins_per_feature);
  }
  return bins;
}

bool in_scope(const Scope& scope, std::span<const float> x) {
  for (const auto& cond : scope) {
    check_dimension(cond.feature, x);
    const bool goes_left = x[cond.feature] <= cond.threshold;
    if (goes_left != cond.left) return false;
  }
  return true;
}

int predict_rule(const SplitRule& rule, std::span<const float> x) {
  check_dimension(rule.feature, x);
  if (!in_scope(rule.scope, x)) return 0;
  return x[rule.feature] <= rule.threshold ? rule.polarity : -rule.polarity;
}

CandidateSpace::CandidateSpace(std::shared_ptr<const BinningConfig> bins,
                               std::vector<Scope> leaves)
    : bins_(std::move(bins)), leaves_(std::move(leaves)) {
  if (!bins_) throw InvalidInput("CandidateSpace: null binning");
  threshold_offsets_.assign(bins_->dimension() + 1, 0);
  for (std::size_t f = 0; f < bins_->dimension(); ++f) {
    const std::size_t n = bins_->thresholds[f].size();
    threshold_offsets_[f + 1] = threshold_offsets_[f] + n;
    feature_of_threshold_.insert(feature_of_threshold_.end(), n, f);
  }
  per_leaf_ = 2 * total_thresholds();
}

std::size_t CandidateSpace::index_of(const Coord& coord) const {
  return coord.leaf * per_leaf_ +
         2 * (threshold_offsets_[coord.feature] + coord.threshold) +
         (coord.polarity > 0 ? 0 : 1);
}

CandidateSpace::Coord CandidateSpace::decode(std::size_t index) const {
  if (index >= size()) throw InvalidInput("candidate index out of range");
  const std::size_t leaf = index / per_leaf_;
  const std::size_t within = index % per_leaf_;
  const std::size_t t = within / 2;
  const std::size_t feature = feature_of_threshold_[t];
  return Coord{leaf, feature, t - threshold_offsets_[feature],
               within % 2 == 0 ? 1 : -1};
}

SplitRule CandidateSpace::rule(std::size_t index) const {
  const Coord c = decode(index);
  return SplitRule{leaves_[c.leaf], static_cast<std::uint32_t>(c.feature),
                   bins_->thresholds[c.feature][c.threshold],
                   static_cast<std::int8_t>(c.polarity)};
}

std::vector<SplitRule> CandidateSpace::rules() const {
  std::vector<SplitRule> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(rule(i));
  return out;
}

std::vector<SplitRule> candidate_rules(const BinningConfig& bins,
                                       const std::vector<Scope>& open_leaves) {
  return CandidateSpace(std::make_shared<BinningConfig>(bins), open_leaves)
      .rules();
}

Tree::Tree(std::size_t max_leaves) : max_leaves_(max_leaves), leaves_{Scope{}} {
  if (max_leaves < 2) throw InvalidInput("max_leaves must be at least 2");
}

void Tree::split(const SplitRule& rule, double gamma) {
  if (full()) throw InvalidInput("Tree::split on a full tree");
  const auto it = std::find(leaves_.begin(), leaves_.end(), rule.scope);
  if (it == leaves_.end()) {
    throw InvalidInput("Tree::split: rule scope is not an open leaf");
  }
  Scope left = *it;
  left.push_back(Condition{rule.feature, rule.threshold, true});
  Scope right = *it;
  right.push_back(Condition{rule.feature, rule.threshold, false});
  *it = std::move(left);
  leaves_.insert(it + 1, std::move(right));
  split_gammas_.push_back(gamma);
}

void Ensemble::append(SplitRule rule, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidInput("Ensemble::append: alpha must be positive and finite");
  }
  rules_.push_back(WeightedRule{std::move(rule), alpha});
}

double Ensemble::partial_score(std::uint32_t from, std::uint32_t to,
                               std::span<const float> x) const {
  if (from > to || to > version()) {
    throw InvalidInput("Ensemble: version range out of bounds");
  }
  double s = 0.0;
  for (std::uint32_t i = from; i < to; ++i) {
    s += rules_[i].alpha * predict_rule(rules_[i].rule, x);
  }
  return s;
}

double Ensemble::score(std::span<const float> x) const {
  return clamp_score(partial_score(0, version(), x));
}

double Ensemble::delta_score(std::uint32_t from_version,
                             std::span<const float> x) const {
  if (from_version > version()) {
    throw InvalidInput("delta_score: from_version " +
                       std::to_string(from_version) + " exceeds version " +
                       std::to_string(version()));
  }
  return partial_score(from_version, version(), x);
}

}  // namespace sparrow

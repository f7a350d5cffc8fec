#include "sparrow/core.hpp"

#include <algorithm>
#include <cmath>

namespace sparrow {

StorageError::StorageError(const std::string& what, std::optional<int> stratum)
    : Error(stratum ? what + " (stratum " + std::to_string(*stratum) + ")"
                    : what),
      stratum_(stratum) {}

ParseError::ParseError(const std::string& what, std::size_t line)
    : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

Label label_from_int(int value) {
  if (value == 1) return Label::Positive;
  if (value == -1) return Label::Negative;
  throw InvalidInput("label must be -1 or +1, got " + std::to_string(value));
}

void validate(const LabeledExample& example, std::size_t dimension) {
  if (example.features.size() != dimension) {
    throw InvalidInput("feature vector has length " +
                       std::to_string(example.features.size()) +
                       ", expected " + std::to_string(dimension));
  }
  for (float v : example.features) {
    if (!std::isfinite(v)) throw InvalidInput("non-finite feature value");
  }
}

double EdgeEstimate::edge() const {
  if (!(weight_sum > 0.0)) throw InvalidInput("edge of an empty estimate");
  return weighted_correlation_sum / weight_sum;
}

double clamp_score(double score) {
  return std::clamp(score, -kScoreClamp, kScoreClamp);
}

double clamp_weight(double weight) {
  static const double lo = std::exp(-kScoreClamp);
  static const double hi = std::exp(kScoreClamp);
  return std::clamp(weight, lo, hi);
}

void CompensatedSum::add(double value) {
  const double t = sum_ + value;
  if (std::abs(sum_) >= std::abs(value)) {
    compensation_ += (sum_ - t) + value;
  } else {
    compensation_ += (value - t) + sum_;
  }
  sum_ = t;
}

double WeightMoments::effective_size() const {
  const double sq = sum_squares();
  if (count_ == 0 || !(sq > 0.0)) return 0.0;
  const double s = sum();
  return s * s / sq;
}

double example_weight(double score, Label label) {
  if (!std::isfinite(score)) throw InvalidInput("non-finite score");
  return std::exp(-score * to_double(label));
}

double empirical_edge(std::span<const double> predictions,
                      std::span<const Label> labels,
                      std::span<const double> weights) {
  if (predictions.empty()) throw InvalidInput("empirical_edge: empty input");
  if (predictions.size() != labels.size() ||
      predictions.size() != weights.size()) {
    throw InvalidInput("empirical_edge: length mismatch");
  }
  CompensatedSum numerator;
  CompensatedSum denominator;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!(weights[i] > 0.0)) {
      throw InvalidInput("empirical_edge: weights must be positive");
    }
    numerator.add(weights[i] * predictions[i] * to_double(labels[i]));
    denominator.add(weights[i]);
  }
  return numerator.value() / denominator.value();
}

double effective_sample_size(std::span<const double> weights) {
  if (weights.empty()) throw InvalidInput("effective_sample_size: empty input");
  WeightMoments moments;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw InvalidInput("effective_sample_size: weights must be positive");
    }
    moments.add(w);
  }
  // Rounding can push the ratio a hair outside [1, n].
  return std::clamp(moments.effective_size(), 1.0,
                    static_cast<double>(weights.size()));
}

double rule_weight(double gamma) {
  if (!(gamma > 0.0 && gamma < 0.5)) {
    throw InvalidInput("rule_weight: gamma must lie in (0, 0.5)");
  }
  return 0.5 * std::log((0.5 + gamma) / (0.5 - gamma));
}

}  // namespace sparrow

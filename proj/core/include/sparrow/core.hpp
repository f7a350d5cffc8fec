#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparrow {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class EmptyStore : public Error {
 public:
  using Error::Error;
};

class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

/// I/O failure. Carries the stratum id when the failure happened inside the
/// stratified store.
class StorageError : public Error {
 public:
  explicit StorageError(const std::string& what,
                        std::optional<int> stratum = std::nullopt);

  std::optional<int> stratum() const { return stratum_; }

 private:
  std::optional<int> stratum_;
};

/// Text input that failed to parse; `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line);

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class Label : std::int8_t { Negative = -1, Positive = 1 };

constexpr double to_double(Label label) {
  return label == Label::Positive ? 1.0 : -1.0;
}

/// Accepts -1 and +1; anything else is an InvalidInput.
Label label_from_int(int value);

struct LabeledExample {
  std::vector<float> features;
  Label label = Label::Positive;
};

/// Throws InvalidInput if the dimension differs or a feature is not finite.
void validate(const LabeledExample& example, std::size_t dimension);

/// An example together with its last computed weight and the ensemble
/// version that weight was computed against.
struct StampedExample {
  LabeledExample example;
  double last_weight = 1.0;
  std::uint32_t last_version = 0;
};

/// Running numerator and denominator of the weighted empirical edge.
struct EdgeEstimate {
  double weighted_correlation_sum = 0.0;
  double weight_sum = 0.0;

  void add(double weight, double correlation) {
    weighted_correlation_sum += weight * correlation;
    weight_sum += weight;
  }
  double edge() const;
};

// ---------------------------------------------------------------------------
// Numerics
// ---------------------------------------------------------------------------

/// Ensemble scores are clamped to [-kScoreClamp, kScoreClamp] before
/// exponentiation, which bounds weights to [e^-30, e^30].
inline constexpr double kScoreClamp = 30.0;

double clamp_score(double score);
double clamp_weight(double weight);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double value);
  double value() const { return sum_ + compensation_; }
  void reset() { sum_ = compensation_ = 0.0; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Sum and sum of squares of a weight stream, both compensated.
class WeightMoments {
 public:
  void add(double weight) {
    sum_.add(weight);
    sum_squares_.add(weight * weight);
    ++count_;
  }
  double sum() const { return sum_.value(); }
  double sum_squares() const { return sum_squares_.value(); }
  std::size_t count() const { return count_; }
  /// (sum w)^2 / sum w^2; zero for an empty stream.
  double effective_size() const;

 private:
  CompensatedSum sum_;
  CompensatedSum sum_squares_;
  std::size_t count_ = 0;
};

/// exp(-score * label). The caller clamps the score.
double example_weight(double score, Label label);

/// sum w_i h(x_i) y_i / sum w_i.
double empirical_edge(std::span<const double> predictions,
                      std::span<const Label> labels,
                      std::span<const double> weights);

/// (sum w)^2 / sum w^2, in [1, n].
double effective_sample_size(std::span<const double> weights);

/// 1/2 ln((1/2 + gamma) / (1/2 - gamma)) for gamma in (0, 1/2).
double rule_weight(double gamma);

}  // namespace sparrow

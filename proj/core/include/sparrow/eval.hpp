#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sparrow/core.hpp"
#include "sparrow/dataset.hpp"
#include "sparrow/weak_learner.hpp"

namespace sparrow {

/// Mean of exp(-score * label) with clamped scores. Throws InvalidInput on
/// empty input.
double exp_loss(std::span<const double> scores, std::span<const Label> labels);
double exp_loss(const Ensemble& ensemble, std::span<const LabeledExample> data);
double exp_loss(const Ensemble& ensemble, const DatasetFile& data);

/// Probability that a random positive outranks a random negative, ties
/// counted half. Throws UndefinedMetric unless both classes are present.
double auroc(std::span<const double> scores, std::span<const Label> labels);

/// Fraction of examples whose score sign matches the label; a score of 0
/// counts as a negative prediction.
double accuracy(std::span<const double> scores, std::span<const Label> labels);

struct MetricReport {
  double exp_loss = 1.0;
  double auroc = 0.5;
  double accuracy = 0.0;
  std::size_t n_examples = 0;
};

/// Scores and labels of every record in `data`.
struct ScoredData {
  std::vector<double> scores;
  std::vector<Label> labels;
};
ScoredData score_dataset(const Ensemble& ensemble, const DatasetFile& data);

MetricReport evaluate(const Ensemble& ensemble, const DatasetFile& data);

/// key=value lines: exp_loss, auroc, accuracy, n_examples.
void write_report(std::ostream& out, const MetricReport& report);

/// Converts a training log (one rule record per line) into CSV with header
/// rule,gamma,alpha,edge,scanned,ess_ratio,wall,epoch. Lines that are not
/// rule records are skipped.
void training_log_to_csv(std::istream& log, std::ostream& csv);

}  // namespace sparrow

#include "sparrow/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>

#include "sparrow/booster.hpp"

namespace sparrow {

namespace {

void check_lengths(std::size_t scores, std::size_t labels, const char* what) {
  if (scores != labels) {
    throw InvalidInput(std::string(what) + ": scores and labels differ in length");
  }
  if (scores == 0) throw InvalidInput(std::string(what) + ": empty input");
}

}  // namespace

double exp_loss(std::span<const double> scores, std::span<const Label> labels) {
  check_lengths(scores.size(), labels.size(), "exp_loss");
  CompensatedSum sum;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    sum.add(example_weight(clamp_score(scores[i]), labels[i]));
  }
  return sum.value() / static_cast<double>(scores.size());
}

double exp_loss(const Ensemble& ensemble, std::span<const LabeledExample> data) {
  if (data.empty()) throw InvalidInput("exp_loss: empty dataset");
  CompensatedSum sum;
  for (const auto& ex : data) {
    sum.add(example_weight(ensemble.score(ex.features), ex.label));
  }
  return sum.value() / static_cast<double>(data.size());
}

double exp_loss(const Ensemble& ensemble, const DatasetFile& data) {
  if (data.size() == 0) throw InvalidInput("exp_loss: empty dataset");
  CompensatedSum sum;
  std::vector<float> x(data.dimension());
  data.for_each([&](const RecordRef& rec) {
    rec.read_features(x);
    sum.add(example_weight(ensemble.score(x), rec.label()));
  });
  return sum.value() / static_cast<double>(data.size());
}

double auroc(std::span<const double> scores, std::span<const Label> labels) {
  check_lengths(scores.size(), labels.size(), "auroc");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mann-Whitney: sum of positive ranks, tied groups sharing their mean rank.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == Label::Positive) {
        positive_rank_sum += mean_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw UndefinedMetric("auroc: needs at least one positive and one negative");
  }
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

double accuracy(std::span<const double> scores, std::span<const Label> labels) {
  check_lengths(scores.size(), labels.size(), "accuracy");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const Label predicted = scores[i] > 0.0 ? Label::Positive : Label::Negative;
    if (predicted == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

ScoredData score_dataset(const Ensemble& ensemble, const DatasetFile& data) {
  ScoredData out;
  out.scores.reserve(data.size());
  out.labels.reserve(data.size());
  std::vector<float> x(data.dimension());
  data.for_each([&](const RecordRef& rec) {
    rec.read_features(x);
    out.scores.push_back(ensemble.score(x));
    out.labels.push_back(rec.label());
  });
  return out;
}

MetricReport evaluate(const Ensemble& ensemble, const DatasetFile& data) {
  const ScoredData scored = score_dataset(ensemble, data);
  MetricReport report;
  report.n_examples = scored.scores.size();
  report.exp_loss = exp_loss(scored.scores, scored.labels);
  report.accuracy = accuracy(scored.scores, scored.labels);
  report.auroc = auroc(scored.scores, scored.labels);
  return report;
}

void write_report(std::ostream& out, const MetricReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "exp_loss=%.10g\nauroc=%.10g\naccuracy=%.10g\nn_examples=%zu\n",
                r.exp_loss, r.auroc, r.accuracy, r.n_examples);
  out << buf;
}

void training_log_to_csv(std::istream& log, std::ostream& csv) {
  csv << "rule,gamma,alpha,edge,scanned,ess_ratio,wall,epoch\n";
  std::string line;
  char buf[256];
  while (std::getline(log, line)) {
    if (line.rfind("rule=", 0) != 0) continue;
    const RuleRecord r = parse_rule_record(line);
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g,%llu,%.10g,%.6f,%zu\n",
                  r.index, r.gamma, r.alpha, r.edge,
                  static_cast<unsigned long long>(r.scanned), r.ess_ratio,
                  r.wall_seconds, r.epoch);
    csv << buf;
  }
}

}  // namespace sparrow

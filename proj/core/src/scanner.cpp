#include "sparrow/scanner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

namespace sparrow {

double refresh_weight(double last_weight, std::uint32_t last_version,
                      Label label, std::span<const float> x,
                      const Ensemble& snapshot) {
  if (last_version > snapshot.version()) {
    throw InvalidInput("update_weight: stamp version " +
                       std::to_string(last_version) +
                       " is newer than the snapshot");
  }
  if (last_version == snapshot.version()) return last_weight;
  const double delta = snapshot.delta_score(last_version, x);
  return clamp_weight(last_weight * std::exp(-to_double(label) * delta));
}

StampedExample update_weight(const StampedExample& example,
                             const Ensemble& snapshot) {
  StampedExample out = example;
  out.last_weight =
      refresh_weight(example.last_weight, example.last_version,
                     example.example.label, example.example.features, snapshot);
  out.last_version = snapshot.version();
  return out;
}

double shrink_gamma(double max_empirical_edge) {
  return std::max(kShrinkFactor * std::max(max_empirical_edge, kGammaFloor),
                  kGammaFloor);
}

std::string format_progress(const ScanProgress& p) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "scanned=%llu n_eff=%.6g best_edge=%.6g gamma=%.6g",
                static_cast<unsigned long long>(p.scanned), p.n_eff,
                p.best_edge, p.gamma);
  return buf;
}

namespace {

/// Histogram-backed statistics for every candidate of a CandidateSpace.
class CandidateStats {
 public:
  explicit CandidateStats(const CandidateSpace& space) : space_(space) {
    const auto& bins = space.bins();
    bin_offset_.resize(bins.dimension());
    std::size_t offset = 0;
    for (std::size_t f = 0; f < bins.dimension(); ++f) {
      bin_offset_[f] = offset;
      offset += bins.thresholds[f].size() + 1;
    }
    stride_ = offset;
    hist_.assign(space.leaves().size() * stride_, 0.0);
    leaf_total_.assign(space.leaves().size(), 0.0);
  }

  void absorb(std::span<const float> x, double weight, double label) {
    moments_.add(weight);
    const auto& leaves = space_.leaves();
    for (std::size_t l = 0; l < leaves.size(); ++l) {
      if (!in_scope(leaves[l], x)) continue;
      const double wy = weight * label;
      leaf_total_[l] += wy;
      double* row = hist_.data() + l * stride_;
      const auto& bins = space_.bins();
      for (std::size_t f = 0; f < bin_offset_.size(); ++f) {
        if (bins.thresholds[f].empty()) continue;
        row[bin_offset_[f] + bins.bin_of(f, x[f])] += wy;
      }
      break;  // leaves of one tree are disjoint
    }
  }

  const WeightMoments& moments() const { return moments_; }

  /// Calls visit(index, sum of w*h*y) for every candidate in index order;
  /// stops early when visit returns true.
  template <typename Visit>
  bool visit(Visit&& visit) const {
    const auto& bins = space_.bins();
    for (std::size_t l = 0; l < space_.leaves().size(); ++l) {
      const double* row = hist_.data() + l * stride_;
      const double total = leaf_total_[l];
      std::size_t index = l * space_.per_leaf();
      for (std::size_t f = 0; f < bin_offset_.size(); ++f) {
        const std::size_t thresholds = bins.thresholds[f].size();
        double prefix = 0.0;
        for (std::size_t j = 0; j < thresholds; ++j) {
          prefix += row[bin_offset_[f] + j];
          const double s = 2.0 * prefix - total;
          if (visit(index, s)) return true;
          if (visit(index + 1, -s)) return true;
          index += 2;
        }
      }
    }
    return false;
  }

 private:
  const CandidateSpace& space_;
  std::vector<std::size_t> bin_offset_;
  std::size_t stride_ = 0;
  std::vector<double> hist_;
  std::vector<double> leaf_total_;
  WeightMoments moments_;
};

struct CheckResult {
  std::optional<Fired> fired;
  double best_edge = -std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
};

CheckResult check(const CandidateStats& stats, const CandidateSpace& space,
                  double gamma, const StoppingConfig& cfg, bool test_rule) {
  CheckResult result;
  const double w = stats.moments().sum();
  const double v = stats.moments().sum_squares();
  const std::uint64_t count = stats.moments().count();
  double best_s = -std::numeric_limits<double>::infinity();
  stats.visit([&](std::size_t index, double s) {
    if (s > best_s) {
      best_s = s;
      result.best_index = index;
    }
    return false;
  });
  if (space.size() > 0) result.best_edge = best_s / w;
  // should_stop is monotone in m and every candidate shares v and count, so
  // nothing fires unless the best candidate does.
  if (!test_rule || space.size() == 0 || !should_stop({best_s - gamma * w, v, count}, cfg)) {
    return result;
  }
  stats.visit([&](std::size_t index, double s) {
    const ScanState state{s - gamma * w, v, count};
    if (!should_stop(state, cfg)) return false;
    result.fired = Fired{space.rule(index), index, gamma, s / w, state, count};
    return true;
  });
  return result;
}

}  // namespace

Scanner::Scanner(SampleSet sample) { reset_sample(std::move(sample)); }

void Scanner::reset_sample(SampleSet sample) {
  sample_ = std::move(sample);
  cursor_ = 0;
  features_.assign(sample_.records.dimension(), 0.0f);
}

SampleSet Scanner::release_sample() {
  SampleSet out = std::move(sample_);
  sample_ = SampleSet{};
  cursor_ = 0;
  return out;
}

ScanOutcome Scanner::scan(const Ensemble& snapshot,
                          const CandidateSpace& candidates, double gamma,
                          const StoppingConfig& cfg) {
  const std::size_t n = sample_.size();
  if (n == 0) throw InvalidInput("scan: empty sample");
  if (!(gamma > 0.0 && gamma < 0.5)) {
    throw InvalidInput("scan: gamma must lie in (0, 0.5)");
  }
  validate(cfg);
  CandidateStats stats(candidates);
  auto& records = sample_.records;
  const std::uint32_t version = snapshot.version();

  for (std::size_t read = 1; read <= n; ++read) {
    const std::size_t i = cursor_;
    cursor_ = (cursor_ + 1) % n;
    const RecordRef rec = records.at(i);
    rec.read_features(features_);
    const Label label = rec.label();
    const double w =
        refresh_weight(rec.weight(), rec.version(), label, features_, snapshot);
    records.set_stamp(i, w, version);
    stats.absorb(features_, w, to_double(label));

    const bool periodic = read > cfg.t0 && read % cfg.check_interval == 0;
    if (!periodic && read != n) continue;
    const CheckResult result = check(stats, candidates, gamma, cfg, true);
    if (progress_) {
      progress_(ScanProgress{read, stats.moments().effective_size(),
                             candidates.size() ? result.best_edge : 0.0, gamma});
    }
    if (result.fired) return *result.fired;
    if (read == n) {
      Exhausted out;
      out.scanned = n;
      if (candidates.size() > 0) {
        out.max_empirical_edge = result.best_edge;
        out.best_candidate = result.best_index;
        out.best_rule = candidates.rule(result.best_index);
      }
      return out;
    }
  }
  return Exhausted{};  // unreachable: the loop returns at read == n
}

FullScanResult Scanner::full_scan(const Ensemble& snapshot,
                                  const CandidateSpace& candidates) {
  const std::size_t n = sample_.size();
  if (n == 0) throw InvalidInput("full_scan: empty sample");
  CandidateStats stats(candidates);
  auto& records = sample_.records;
  for (std::size_t i = 0; i < n; ++i) {
    const RecordRef rec = records.at(i);
    rec.read_features(features_);
    const double w = refresh_weight(rec.weight(), rec.version(), rec.label(),
                                    features_, snapshot);
    records.set_stamp(i, w, snapshot.version());
    stats.absorb(features_, w, to_double(rec.label()));
  }
  FullScanResult out;
  out.scanned = n;
  if (candidates.size() == 0) return out;
  const CheckResult result =
      check(stats, candidates, 0.25, StoppingConfig{}, false);
  out.best_candidate = result.best_index;
  out.best_rule = candidates.rule(result.best_index);
  out.empirical_edge = result.best_edge;
  return out;
}

double Scanner::refresh_all(const Ensemble& snapshot) {
  WeightMoments moments;
  auto& records = sample_.records;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RecordRef rec = records.at(i);
    double w = rec.weight();
    if (rec.version() != snapshot.version()) {
      rec.read_features(features_);
      w = refresh_weight(w, rec.version(), rec.label(), features_, snapshot);
      records.set_stamp(i, w, snapshot.version());
    }
    moments.add(w);
  }
  return moments.effective_size();
}

std::vector<double> Scanner::weights() const {
  std::vector<double> out(sample_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = sample_.records.at(i).weight();
  }
  return out;
}

ScanOutcome scan(SampleSet& sample, const Ensemble& snapshot,
                 const CandidateSpace& candidates, double gamma,
                 const StoppingConfig& cfg) {
  Scanner scanner(std::move(sample));
  ScanOutcome outcome = scanner.scan(snapshot, candidates, gamma, cfg);
  sample = scanner.release_sample();
  return outcome;
}

}  // namespace sparrow

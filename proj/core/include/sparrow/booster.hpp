#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparrow/channel.hpp"
#include "sparrow/core.hpp"
#include "sparrow/dataset.hpp"
#include "sparrow/record.hpp"
#include "sparrow/sampler.hpp"
#include "sparrow/scanner.hpp"
#include "sparrow/stopping.hpp"
#include "sparrow/stratified_store.hpp"
#include "sparrow/weak_learner.hpp"

namespace sparrow {

struct BoostConfig {
  std::size_t sample_size = 10'000;
  /// Resample once n_eff / n drops below this.
  double ess_threshold = 0.25;
  std::size_t max_rules = 100;
  double gamma_init = 0.25;
  std::size_t max_leaves = kDefaultMaxLeaves;
  std::size_t bins = kDefaultBins;
  double stop_c = 1.0;
  /// Error budget of one search, split evenly over its candidates.
  double stop_sigma = kDefaultStopSigma;
  std::uint64_t stop_t0 = kDefaultBurnIn;
  std::uint64_t stop_check_interval = kDefaultCheckInterval;
  /// Wall-clock limit in seconds; 0 disables it.
  double time_budget_seconds = 0.0;
  std::uint64_t seed = 1;
  /// A fresh sample is requested early, while scanning continues, once
  /// n_eff / n < prefetch_factor * ess_threshold. 1 disables prefetching,
  /// so every new sample is drawn against the latest ensemble.
  double prefetch_factor = 1.0;
  StoreOptions store;
  /// Directory for the stratified store; a fresh temporary one when empty.
  std::filesystem::path work_dir;
};

/// Throws InvalidInput when a field is out of range.
void validate(const BoostConfig& cfg);

/// effective_sample_size(weights) / n.
double ess_ratio(std::span<const double> weights, std::size_t n);

/// gamma_init for the first tree, then the largest gamma among the previous
/// tree's splits, clamped to [kGammaFloor, 0.5).
double init_gamma(const Tree* previous, const BoostConfig& cfg);

/// One line of the training log, written per fired rule.
struct RuleRecord {
  std::size_t index = 0;
  double gamma = 0.0;
  double alpha = 0.0;
  double edge = 0.0;
  std::uint64_t scanned = 0;
  double ess_ratio = 1.0;
  double wall_seconds = 0.0;
  std::size_t epoch = 0;
};

/// "rule=<i> gamma=<x> alpha=<x> edge=<x> scanned=<n> ess_ratio=<x>
///  wall=<x> epoch=<n>"
std::string format_rule_record(const RuleRecord& record);
/// Throws ParseError (line 0) on malformed input.
RuleRecord parse_rule_record(const std::string& line);

enum class StopReason { MaxRules, Converged, TimeBudget };
const char* to_string(StopReason reason);

struct BoostStats {
  std::size_t fired = 0;
  std::size_t exhausted = 0;
  std::size_t swaps = 0;
  std::uint64_t examples_scanned = 0;
  std::uint64_t sampler_steps = 0;
  std::uint64_t sampler_accepts = 0;
  double seconds = 0.0;
  StopReason reason = StopReason::MaxRules;
};

/// Training callbacks. on_rule and on_swap run on the coordinating thread,
/// on_progress on the scanner agent.
class TrainObserver {
 public:
  virtual ~TrainObserver() = default;
  virtual void on_rule(const RuleRecord&, const Ensemble&) {}
  /// Called with the new sample just before the scanner receives it.
  virtual void on_swap(std::size_t /*epoch*/, const SampleSet&,
                       const Ensemble&) {}
  virtual void on_progress(const ScanProgress&) {}
};

/// Coordinates a scanner agent, which owns the in-memory sample, and a
/// sampler agent, which owns the stratified store. The coordinator appends
/// fired rules, publishes immutable ensemble snapshots and swaps samples
/// between searches once the effective sample size gets too small.
class Booster {
 public:
  /// `data` should be shuffled; it seeds both the store and the first
  /// sample.
  Booster(const DatasetFile& data, BoostConfig cfg);
  ~Booster();
  Booster(const Booster&) = delete;
  Booster& operator=(const Booster&) = delete;

  /// Runs until max_rules rules, convergence or the time budget. Can be
  /// called once.
  Ensemble train(TrainObserver* observer = nullptr);

  const BoostConfig& config() const { return cfg_; }
  const BinningConfig& bins() const { return *bins_; }
  const BoostStats& stats() const { return stats_; }
  const std::vector<RuleRecord>& log() const { return log_; }

  /// Only valid while no training is running.
  const StratifiedStore& store() const { return *store_; }
  const Scanner& scanner() const { return *scanner_; }

 private:
  BoostConfig cfg_;
  std::filesystem::path work_dir_;
  bool owns_work_dir_ = false;
  std::shared_ptr<const BinningConfig> bins_;
  std::unique_ptr<StratifiedStore> store_;
  std::unique_ptr<StratifiedSampler> sampler_;
  std::unique_ptr<Scanner> scanner_;
  BoostStats stats_;
  std::vector<RuleRecord> log_;
  bool trained_ = false;
};

struct BenchScanOptions {
  /// Records in the in-memory sample; 0 loads the whole dataset.
  std::size_t sample_size = 0;
  double gamma_init = 0.25;
  std::size_t bins = kDefaultBins;
  double stop_c = 1.0;
  double stop_sigma = kDefaultStopSigma;
  std::uint64_t stop_t0 = kDefaultBurnIn;
  std::uint64_t stop_check_interval = kDefaultCheckInterval;
  std::uint64_t seed = 1;
};

/// Examples read before the first rule fires (early stopping, with the
/// usual gamma shrinking on exhausted searches) versus examples read by a
/// full scan, which reads the whole sample once and picks the best stump.
struct BenchScanResult {
  std::uint64_t early_scanned = 0;
  std::uint64_t full_scanned = 0;
  std::size_t searches = 0;
  bool fired = false;
  SplitRule fired_rule;
  double fired_gamma = 0.0;
  double fired_edge = 0.0;
  SplitRule full_rule;
  double full_edge = 0.0;

  double ratio() const {
    return full_scanned == 0 ? 0.0
                             : static_cast<double>(early_scanned) /
                                   static_cast<double>(full_scanned);
  }
};

BenchScanResult bench_scan(const DatasetFile& data, const BenchScanOptions& options);

/// Convenience wrapper: constructs a Booster and trains it.
Ensemble train(const DatasetFile& data, const BoostConfig& cfg,
               TrainObserver* observer = nullptr);

}  // namespace sparrow

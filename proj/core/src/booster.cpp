#include "sparrow/booster.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace sparrow {

namespace fs = std::filesystem;

void validate(const BoostConfig& cfg) {
  if (cfg.sample_size == 0) throw InvalidInput("sample_size must be positive");
  if (!(cfg.ess_threshold > 0.0 && cfg.ess_threshold <= 1.0)) {
    throw InvalidInput("ess_threshold must lie in (0, 1]");
  }
  if (!(cfg.gamma_init > 0.0 && cfg.gamma_init < 0.5)) {
    throw InvalidInput("gamma_init must lie in (0, 0.5)");
  }
  if (cfg.max_leaves < 2) throw InvalidInput("max_leaves must be at least 2");
  if (cfg.bins < 2) throw InvalidInput("bins must be at least 2");
  if (!(cfg.stop_c > 0.0)) throw InvalidInput("stop.c must be positive");
  if (!(cfg.stop_sigma > 0.0 && cfg.stop_sigma < 1.0)) {
    throw InvalidInput("stop.sigma must lie in (0, 1)");
  }
  if (cfg.stop_check_interval == 0) {
    throw InvalidInput("stop.check_interval must be positive");
  }
  if (!(cfg.time_budget_seconds >= 0.0)) {
    throw InvalidInput("time_budget_seconds must be nonnegative");
  }
  if (!(cfg.prefetch_factor >= 1.0)) {
    throw InvalidInput("prefetch_factor must be at least 1");
  }
}

double ess_ratio(std::span<const double> weights, std::size_t n) {
  if (n == 0) throw InvalidInput("ess_ratio: n must be positive");
  return effective_sample_size(weights) / static_cast<double>(n);
}

double init_gamma(const Tree* previous, const BoostConfig& cfg) {
  if (previous == nullptr || previous->split_gammas().empty()) {
    return cfg.gamma_init;
  }
  const auto& gammas = previous->split_gammas();
  const double best = *std::max_element(gammas.begin(), gammas.end());
  return std::clamp(best, kGammaFloor, std::nextafter(0.5, 0.0));
}

std::string format_rule_record(const RuleRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "rule=%zu gamma=%.17g alpha=%.17g edge=%.17g scanned=%llu "
                "ess_ratio=%.17g wall=%.6f epoch=%zu",
                r.index, r.gamma, r.alpha, r.edge,
                static_cast<unsigned long long>(r.scanned), r.ess_ratio,
                r.wall_seconds, r.epoch);
  return buf;
}

RuleRecord parse_rule_record(const std::string& line) {
  RuleRecord r;
  std::istringstream in(line);
  std::string token;
  int seen = 0;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value in rule record", 0);
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    try {
      if (key == "rule") r.index = std::stoull(value);
      else if (key == "gamma") r.gamma = std::stod(value);
      else if (key == "alpha") r.alpha = std::stod(value);
      else if (key == "edge") r.edge = std::stod(value);
      else if (key == "scanned") r.scanned = std::stoull(value);
      else if (key == "ess_ratio") r.ess_ratio = std::stod(value);
      else if (key == "wall") r.wall_seconds = std::stod(value);
      else if (key == "epoch") r.epoch = std::stoull(value);
      else throw ParseError("unknown rule record key '" + key + "'", 0);
    } catch (const std::logic_error&) {
      throw ParseError("bad value for '" + key + "' in rule record", 0);
    }
    ++seen;
  }
  if (seen != 8) throw ParseError("rule record needs 8 fields", 0);
  return r;
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::MaxRules: return "max_rules";
    case StopReason::Converged: return "converged";
    case StopReason::TimeBudget: return "time_budget";
  }
  return "unknown";
}

namespace {

fs::path make_temp_dir() {
  std::string pattern = (fs::temp_directory_path() / "sparrow-XXXXXX").string();
  if (::mkdtemp(pattern.data()) == nullptr) {
    throw StorageError("cannot create a temporary work directory");
  }
  return pattern;
}

std::shared_ptr<const BinningConfig> bins_from_sample(const SampleSet& sample,
                                                      std::size_t bins) {
  const auto& records = sample.records;
  const std::size_t dim = records.dimension();
  std::vector<float> x(dim);
  auto column = [&](std::size_t f, std::vector<float>& out) {
    out.resize(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      records.at(i).read_features(x);
      out[i] = x[f];
    }
  };
  return std::make_shared<const BinningConfig>(
      build_bins(dim, records.size(), column, bins));
}

}  // namespace

Booster::Booster(const DatasetFile& data, BoostConfig cfg) : cfg_(std::move(cfg)) {
  validate(cfg_);
  if (data.size() < cfg_.sample_size) {
    throw InsufficientData("train: dataset holds " + std::to_string(data.size()) +
                           " records, sample_size is " +
                           std::to_string(cfg_.sample_size));
  }
  if (cfg_.work_dir.empty()) {
    work_dir_ = make_temp_dir();
    owns_work_dir_ = true;
  } else {
    work_dir_ = cfg_.work_dir;
    fs::create_directories(work_dir_);
  }

  Rng rng(cfg_.seed);
  SampleSet sample = initial_sample(data, cfg_.sample_size, rng);
  bins_ = bins_from_sample(sample, cfg_.bins);

  store_ = std::make_unique<StratifiedStore>(work_dir_ / "store", data.dimension(),
                                             cfg_.store);
  data.for_each([&](const RecordRef& rec) { store_->push_back(rec.bytes()); });
  sampler_ = std::make_unique<StratifiedSampler>(*store_, rng());
  scanner_ = std::make_unique<Scanner>(std::move(sample));
}

Booster::~Booster() {
  scanner_.reset();
  sampler_.reset();
  store_.reset();
  if (owns_work_dir_) {
    std::error_code ec;
    fs::remove_all(work_dir_, ec);
  }
}

Ensemble Booster::train(TrainObserver* observer) {
  if (trained_) throw UsageError("Booster::train can only run once");
  trained_ = true;
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };

  if (observer != nullptr) {
    scanner_->set_progress_sink(
        [observer](const ScanProgress& p) { observer->on_progress(p); });
  }

  Ensemble ensemble;
  auto snapshot = std::make_shared<const Ensemble>(ensemble);
  Tree tree(cfg_.max_leaves);
  std::optional<Tree> previous;
  double gamma = init_gamma(nullptr, cfg_);
  std::size_t epoch = 0;
  const std::size_t n = cfg_.sample_size;

  Agent scan_agent;
  Agent sample_agent;
  std::optional<std::future<SampleSet>> pending;
  auto request_sample = [&](EnsembleSnapshot snap) {
    return sample_agent.submit(
        [this, snap, n] { return sampler_->assemble(*snap, n); });
  };
  auto start_tree = [&] {
    previous = std::move(tree);
    gamma = init_gamma(&*previous, cfg_);
    tree = Tree(cfg_.max_leaves);
  };

  while (true) {
    if (ensemble.version() >= cfg_.max_rules) {
      stats_.reason = StopReason::MaxRules;
      break;
    }
    if (cfg_.time_budget_seconds > 0.0 && elapsed() >= cfg_.time_budget_seconds) {
      stats_.reason = StopReason::TimeBudget;
      break;
    }
    if (tree.full()) start_tree();

    auto space = std::make_shared<const CandidateSpace>(bins_, tree.leaves());
    if (space->size() == 0) {
      stats_.reason = StopReason::Converged;
      break;
    }
    const StoppingConfig stop =
        config_for(space->size(), cfg_.stop_sigma, cfg_.stop_c, cfg_.stop_t0,
                   cfg_.stop_check_interval);
    const ScanOutcome outcome =
        scan_agent
            .submit([this, snapshot, space, gamma, stop] {
              return scanner_->scan(*snapshot, *space, gamma, stop);
            })
            .get();

    if (const auto* fired = std::get_if<Fired>(&outcome)) {
      const double alpha = rule_weight(fired->gamma);
      ensemble.append(fired->rule, alpha);
      tree.split(fired->rule, fired->gamma);
      snapshot = std::make_shared<const Ensemble>(ensemble);
      ++stats_.fired;
      stats_.examples_scanned += fired->scanned;

      const double n_eff =
          scan_agent.submit([this, snapshot] { return scanner_->refresh_all(*snapshot); })
              .get();
      RuleRecord record;
      record.index = ensemble.version();
      record.gamma = fired->gamma;
      record.alpha = alpha;
      record.edge = fired->empirical_edge;
      record.scanned = fired->scanned;
      record.ess_ratio = n_eff / static_cast<double>(n);
      record.wall_seconds = elapsed();
      record.epoch = epoch;
      log_.push_back(record);
      if (observer != nullptr) observer->on_rule(record, ensemble);

      const double ratio = record.ess_ratio;
      if (!pending && ratio < cfg_.prefetch_factor * cfg_.ess_threshold &&
          cfg_.prefetch_factor > 1.0) {
        pending = request_sample(snapshot);
      }
      if (ratio < cfg_.ess_threshold) {
        if (!pending) {
          // Without a prefetch the old sample is done; free it first so
          // only one sample is resident.
          scan_agent.submit([this] { scanner_->release_sample(); }).get();
          pending = request_sample(snapshot);
        }
        SampleSet fresh = pending->get();
        pending.reset();
        ++epoch;
        ++stats_.swaps;
        if (observer != nullptr) observer->on_swap(epoch, fresh, ensemble);
        scan_agent
            .submit([this, s = std::make_shared<SampleSet>(std::move(fresh))] {
              scanner_->reset_sample(std::move(*s));
            })
            .get();
      }
      continue;
    }

    const auto& exhausted = std::get<Exhausted>(outcome);
    ++stats_.exhausted;
    stats_.examples_scanned += exhausted.scanned;
    const double shrunk = kShrinkFactor * std::min(exhausted.max_empirical_edge, gamma);
    if (shrunk >= kGammaFloor) {
      gamma = shrunk;
    } else if (tree.leaf_count() > 1) {
      start_tree();
    } else {
      stats_.reason = StopReason::Converged;
      break;
    }
  }

  if (pending) pending->get();
  scan_agent.stop();
  sample_agent.stop();
  stats_.sampler_steps = sampler_->steps();
  stats_.sampler_accepts = sampler_->accepted();
  stats_.seconds = elapsed();
  return ensemble;
}

BenchScanResult bench_scan(const DatasetFile& data, const BenchScanOptions& options) {
  const std::size_t n =
      options.sample_size == 0 ? static_cast<std::size_t>(data.size()) : options.sample_size;
  Rng rng(options.seed);
  SampleSet sample = initial_sample(data, n, rng);
  auto bins = bins_from_sample(sample, options.bins);
  const CandidateSpace space(bins, {Scope{}});
  if (space.size() == 0) throw InvalidInput("bench_scan: no candidate splits");
  const StoppingConfig stop =
      config_for(space.size(), options.stop_sigma, options.stop_c, options.stop_t0,
                 options.stop_check_interval);
  const Ensemble empty;
  BenchScanResult result;

  Scanner scanner(std::move(sample));
  double gamma = options.gamma_init;
  while (true) {
    ++result.searches;
    const ScanOutcome outcome = scanner.scan(empty, space, gamma, stop);
    if (const auto* fired = std::get_if<Fired>(&outcome)) {
      result.early_scanned += fired->scanned;
      result.fired = true;
      result.fired_rule = fired->rule;
      result.fired_gamma = fired->gamma;
      result.fired_edge = fired->empirical_edge;
      break;
    }
    const auto& exhausted = std::get<Exhausted>(outcome);
    result.early_scanned += exhausted.scanned;
    const double shrunk = kShrinkFactor * std::min(exhausted.max_empirical_edge, gamma);
    if (shrunk < kGammaFloor) break;
    gamma = shrunk;
  }

  const FullScanResult full = scanner.full_scan(empty, space);
  result.full_scanned = full.scanned;
  result.full_rule = full.best_rule;
  result.full_edge = full.empirical_edge;
  return result;
}

Ensemble train(const DatasetFile& data, const BoostConfig& cfg,
               TrainObserver* observer) {
  Booster booster(data, cfg);
  return booster.train(observer);
}

}  // namespace sparrow

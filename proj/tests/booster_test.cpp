#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sparrow/booster.hpp"
#include "sparrow/sampler.hpp"
#include "sparrow/synthetic.hpp"
#include "test_util.hpp"

namespace sparrow {
namespace {

BoostConfig small_config(std::size_t sample_size, std::size_t max_rules) {
  BoostConfig cfg;
  cfg.sample_size = sample_size;
  cfg.max_rules = max_rules;
  return cfg;
}

class Recorder : public TrainObserver {
 public:
  void on_rule(const RuleRecord& r, const Ensemble& e) override {
    records.push_back(r);
    versions.push_back(e.version());
  }
  void on_swap(std::size_t epoch, const SampleSet& s, const Ensemble& e) override {
    swaps.push_back({epoch, e.version(), s});
  }
  struct Swap {
    std::size_t epoch;
    std::uint32_t version;
    SampleSet sample;
  };
  std::vector<RuleRecord> records;
  std::vector<std::uint32_t> versions;
  std::vector<Swap> swaps;
};

TEST(BoostConfig, Validation) {
  EXPECT_NO_THROW(validate(BoostConfig{}));
  BoostConfig cfg;
  cfg.sample_size = 0;
  EXPECT_THROW(validate(cfg), InvalidInput);
  cfg = BoostConfig{};
  cfg.gamma_init = 0.5;
  EXPECT_THROW(validate(cfg), InvalidInput);
  cfg = BoostConfig{};
  cfg.ess_threshold = 0.0;
  EXPECT_THROW(validate(cfg), InvalidInput);
  cfg = BoostConfig{};
  cfg.max_leaves = 1;
  EXPECT_THROW(validate(cfg), InvalidInput);
  cfg = BoostConfig{};
  cfg.prefetch_factor = 0.5;
  EXPECT_THROW(validate(cfg), InvalidInput);
}

TEST(EssRatio, NormalisesBySampleSize) {
  const std::vector<double> ones(10, 1.0);
  EXPECT_DOUBLE_EQ(ess_ratio(ones, 10), 1.0);
  const std::vector<double> skewed{4.0, 1.0, 1.0, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(ess_ratio(skewed, 5), 64.0 / 20.0 / 5.0);
  EXPECT_THROW(ess_ratio(ones, 0), InvalidInput);
}

TEST(InitGamma, FromPreviousTree) {
  const BoostConfig cfg;
  EXPECT_EQ(init_gamma(nullptr, cfg), 0.25);
  Tree empty(4);
  EXPECT_EQ(init_gamma(&empty, cfg), 0.25);
  Tree tree(4);
  tree.split(SplitRule{{}, 0, 0.5, 1}, 0.2);
  tree.split(SplitRule{tree.leaves()[0], 0, 0.25, 1}, 0.12);
  tree.split(SplitRule{tree.leaves()[1], 0, 0.75, 1}, 0.3);
  EXPECT_EQ(init_gamma(&tree, cfg), 0.3);
  Tree tiny(2);
  tiny.split(SplitRule{{}, 0, 0.5, 1}, 0.0002);
  EXPECT_EQ(init_gamma(&tiny, cfg), kGammaFloor);
}

TEST(RuleRecord, RoundTrip) {
  RuleRecord r{12, 0.1875, rule_weight(0.1875), 0.31, 4096, 0.42, 1.5, 3};
  const std::string line = format_rule_record(r);
  EXPECT_EQ(line.rfind("rule=12 gamma=0.1875 ", 0), 0u);
  const RuleRecord back = parse_rule_record(line);
  EXPECT_EQ(back.index, r.index);
  EXPECT_EQ(back.gamma, r.gamma);
  EXPECT_EQ(back.alpha, r.alpha);
  EXPECT_EQ(back.edge, r.edge);
  EXPECT_EQ(back.scanned, r.scanned);
  EXPECT_EQ(back.ess_ratio, r.ess_ratio);
  EXPECT_EQ(back.wall_seconds, r.wall_seconds);
  EXPECT_EQ(back.epoch, r.epoch);
  EXPECT_THROW(parse_rule_record("rule=1 gamma=x"), ParseError);
  EXPECT_THROW(parse_rule_record("rule=1"), ParseError);
  EXPECT_THROW(parse_rule_record(line + " extra=1"), ParseError);
}

TEST(Booster, ZeroRulesGivesEmptyEnsemble) {
  testing::TempDir dir;
  write_dataset(dir / "d.bin", 8, additive_examples(AdditiveTask{}, 2000, 1));
  const DatasetFile data(dir / "d.bin");
  Booster booster(data, small_config(500, 0));
  const Ensemble e = booster.train();
  EXPECT_EQ(e.version(), 0u);
  EXPECT_EQ(booster.stats().reason, StopReason::MaxRules);
  EXPECT_THROW(booster.train(), UsageError);
}

TEST(Booster, SeparableClustersNeedOneRule) {
  testing::TempDir dir;
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.5);
  std::vector<LabeledExample> data;
  for (int i = 0; i < 4000; ++i) {
    const bool positive = coin(rng);
    data.push_back(LabeledExample{{positive ? 0.0f : 1.0f},
                                  positive ? Label::Positive : Label::Negative});
  }
  write_dataset(dir / "d.bin", 1, data);
  const DatasetFile file(dir / "d.bin");
  Booster booster(file, small_config(1000, 1));
  const Ensemble e = booster.train();
  ASSERT_EQ(e.version(), 1u);
  EXPECT_EQ(booster.log()[0].edge, 1.0);
  const SplitRule& rule = e.rules()[0].rule;
  EXPECT_GE(rule.threshold, 0.0);
  EXPECT_LT(rule.threshold, 1.0);
  EXPECT_EQ(rule.polarity, 1);
  std::size_t errors = 0;
  for (const auto& ex : data) errors += e.score(ex.features) * to_double(ex.label) <= 0.0;
  EXPECT_EQ(errors, 0u);
}

TEST(Booster, ConstantFeaturesConverge) {
  testing::TempDir dir;
  std::vector<LabeledExample> data(1000, LabeledExample{{1.0f, 2.0f}, Label::Positive});
  for (std::size_t i = 0; i < data.size(); i += 3) data[i].label = Label::Negative;
  write_dataset(dir / "d.bin", 2, data);
  Booster booster(DatasetFile(dir / "d.bin"), small_config(500, 10));
  EXPECT_EQ(booster.train().version(), 0u);
  EXPECT_EQ(booster.stats().reason, StopReason::Converged);
}

TEST(Booster, TimeBudgetStops) {
  testing::TempDir dir;
  write_dataset(dir / "d.bin", 8, additive_examples(AdditiveTask{}, 2000, 1));
  BoostConfig cfg = small_config(500, 1000);
  cfg.time_budget_seconds = 1e-9;
  Booster booster(DatasetFile(dir / "d.bin"), cfg);
  booster.train();
  EXPECT_EQ(booster.stats().reason, StopReason::TimeBudget);
}

TEST(Booster, RejectsTooSmallDataset) {
  testing::TempDir dir;
  write_dataset(dir / "d.bin", 8, additive_examples(AdditiveTask{}, 100, 1));
  EXPECT_THROW(Booster(DatasetFile(dir / "d.bin"), small_config(500, 1)), InsufficientData);
}

/// 1% positives with x = 0, another 0.5% positives with x = 1, negatives
/// at x = 0. The cut "x <= 0 -> -1" misclassifies exactly the first group.
std::vector<LabeledExample> rare_positives(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<LabeledExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = unit(rng);
    if (u < 0.01) out.push_back(LabeledExample{{0.0f}, Label::Positive});
    else if (u < 0.015) out.push_back(LabeledExample{{1.0f}, Label::Positive});
    else out.push_back(LabeledExample{{0.0f}, Label::Negative});
  }
  return out;
}

TEST(Booster, FirstSwapIsCappedByStaleStratum) {
  testing::TempDir dir;
  write_dataset(dir / "d.bin", 1, rare_positives(100'000, 21));
  const DatasetFile data(dir / "d.bin");
  BoostConfig cfg = small_config(2000, 1);
  cfg.gamma_init = 0.49;

  // The booster draws the same initial sample from the same seed.
  Rng rng(cfg.seed);
  const SampleSet initial = initial_sample(data, cfg.sample_size, rng);
  std::size_t misclassified = 0;
  for (std::size_t i = 0; i < initial.size(); ++i) {
    const auto ex = initial.records.decode(i);
    misclassified += ex.example.label == Label::Positive && ex.example.features[0] == 0.0f;
  }
  ASSERT_GT(misclassified, 0u);

  Booster booster(data, cfg);
  Recorder recorder;
  const Ensemble e = booster.train(&recorder);
  ASSERT_EQ(e.version(), 1u);
  EXPECT_EQ(e.rules()[0].rule.polarity, -1);
  EXPECT_EQ(e.rules()[0].alpha, rule_weight(0.49));

  const double n = static_cast<double>(cfg.sample_size);
  const double k = static_cast<double>(misclassified);
  const double low = std::exp(-rule_weight(0.49));
  const double high = std::exp(rule_weight(0.49));
  const double sum = (n - k) * low + k * high;
  const double sum_sq = (n - k) * low * low + k * high * high;
  const double n_eff = sum * sum / sum_sq;
  EXPECT_GT(n_eff, 70.0);
  EXPECT_LT(n_eff, 95.0);
  EXPECT_NEAR(booster.log()[0].ess_ratio * n, n_eff, 1e-6 * n_eff);

  // Resampling happens even though max_rules is reached.
  ASSERT_EQ(recorder.swaps.size(), 1u);
  EXPECT_EQ(booster.stats().swaps, 1u);
  const SampleSet& fresh = recorder.swaps[0].sample;
  ASSERT_EQ(fresh.size(), cfg.sample_size);
  std::size_t fresh_misclassified = 0;
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    const auto ex = fresh.records.decode(i);
    EXPECT_EQ(ex.last_weight, 1.0);
    EXPECT_EQ(ex.last_version, 1u);
    fresh_misclassified += ex.example.label == Label::Positive && ex.example.features[0] == 0.0f;
  }
  // Every popped record still sits in the unit stratum, whose band caps the
  // acceptance of the heavy records at 1.
  std::size_t store_misclassified = 0;
  std::vector<float> x(1);
  data.for_each([&](const RecordRef& rec) {
    rec.read_features(x);
    store_misclassified += rec.label() == Label::Positive && x[0] == 0.0f;
  });
  const double q = static_cast<double>(store_misclassified) / static_cast<double>(data.size());
  const double a_high = acceptance_probability(high, 0);
  const double a_low = acceptance_probability(low, 0);
  const double expected = n * q * a_high / (q * a_high + (1.0 - q) * a_low);
  EXPECT_NEAR(static_cast<double>(fresh_misclassified), expected, 5.0 * std::sqrt(expected));
  EXPECT_EQ(a_high, 1.0);
  EXPECT_LT(expected, n * k * high / sum / 2.0);
  EXPECT_EQ(booster.store().size(), data.size());
}

TEST(Booster, RefreshedStoreResampleIsBalanced) {
  testing::TempDir dir;
  const auto data = rare_positives(100'000, 21);
  Ensemble e;
  e.append(SplitRule{{}, 0, 0.5, -1}, rule_weight(0.49));
  StratifiedStore store(dir / "store", 1);
  std::size_t misclassified = 0;
  for (const auto& ex : data) {
    const double w = example_weight(e.score(ex.features), ex.label);
    store.insert(StampedExample{ex, w, 1});
    misclassified += ex.label == Label::Positive && ex.features[0] == 0.0f;
  }
  StratifiedSampler sampler(store, 4);
  const SampleSet fresh = sampler.assemble(e, 2000);
  std::size_t fresh_misclassified = 0;
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    const auto ex = fresh.records.decode(i).example;
    fresh_misclassified += ex.label == Label::Positive && ex.features[0] == 0.0f;
  }
  const double high = std::exp(rule_weight(0.49));
  const double k = static_cast<double>(misclassified);
  const double expected =
      2000.0 * k * high / (k * high + (static_cast<double>(data.size()) - k) / high);
  EXPECT_NEAR(expected, 1000.0, 100.0);
  EXPECT_NEAR(static_cast<double>(fresh_misclassified), expected, 100.0);
}

TEST(Booster, RuleLogInvariants) {
  testing::TempDir dir;
  write_dataset(dir / "d.bin", 8, additive_examples(AdditiveTask{}, 20'000, 3));
  Booster booster(DatasetFile(dir / "d.bin"), small_config(2000, 40));
  Recorder recorder;
  const Ensemble e = booster.train(&recorder);
  ASSERT_EQ(e.version(), 40u);
  ASSERT_EQ(recorder.records.size(), 40u);
  for (std::size_t i = 0; i < e.rules().size(); ++i) {
    const RuleRecord& r = booster.log()[i];
    EXPECT_EQ(r.index, i + 1);
    EXPECT_EQ(recorder.versions[i], i + 1);
    EXPECT_EQ(e.rules()[i].alpha, rule_weight(r.gamma));
    EXPECT_EQ(r.alpha, e.rules()[i].alpha);
    EXPECT_GE(r.edge, r.gamma);
    EXPECT_GE(r.gamma, kGammaFloor);
    EXPECT_LT(r.gamma, 0.5);
    EXPECT_LE(e.rules()[i].rule.scope.size(), BoostConfig{}.max_leaves - 2);
  }
  for (const auto& swap : recorder.swaps) {
    for (std::size_t i = 0; i < swap.sample.size(); ++i) {
      ASSERT_EQ(swap.sample.records.at(i).weight(), 1.0);
      ASSERT_EQ(swap.sample.records.at(i).version(), swap.version);
    }
  }
  EXPECT_EQ(booster.stats().fired, 40u);
  EXPECT_EQ(booster.store().size(), 20'000u);
  EXPECT_EQ(booster.store().audit().misplaced, 0u);
}

TEST(Booster, SampleLossNonincreasingWithinEpoch) {
  testing::TempDir dir;
  write_dataset(dir / "d.bin", 8, additive_examples(AdditiveTask{}, 20'000, 5));
  const DatasetFile data(dir / "d.bin");
  BoostConfig cfg = small_config(2000, 60);
  cfg.ess_threshold = 0.5;
  cfg.stop_c = 2.0;
  Rng rng(cfg.seed);
  SampleSet initial = initial_sample(data, cfg.sample_size, rng);

  Booster booster(data, cfg);
  Recorder recorder;
  const Ensemble e = booster.train(&recorder);
  // The run may also end at the gamma floor.
  ASSERT_GE(e.version(), 40u);
  ASSERT_GE(recorder.swaps.size(), 1u);

  // Sample of each epoch and the ensemble version it was drawn at.
  std::vector<std::pair<std::uint32_t, const SampleSet*>> epochs{{0u, &initial}};
  for (const auto& swap : recorder.swaps) epochs.push_back({swap.version, &swap.sample});
  std::size_t checked = 0;
  for (std::size_t k = 0; k < epochs.size(); ++k) {
    const std::uint32_t from = epochs[k].first;
    const std::uint32_t to = k + 1 < epochs.size() ? epochs[k + 1].first : e.version();
    const SampleSet& sample = *epochs[k].second;
    double previous = std::numeric_limits<double>::infinity();
    for (std::uint32_t v = from; v <= to; ++v) {
      CompensatedSum loss;
      for (std::size_t i = 0; i < sample.size(); ++i) {
        const auto ex = sample.records.decode(i);
        loss.add(std::exp(-to_double(ex.example.label) *
                          e.partial_score(from, v, ex.example.features)));
      }
      const double mean = loss.value() / static_cast<double>(sample.size());
      EXPECT_LE(mean, previous + 1e-6) << "epoch " << k << " version " << v;
      previous = mean;
      ++checked;
    }
  }
  EXPECT_EQ(checked, e.version() + epochs.size());
}

// With C = 1 the threshold sits near 4 standard errors, which the best of
// thousands of candidates crosses on a reused sample.
TEST(Booster, UnitConstantAdmitsFalseFires) {
  testing::TempDir dir;
  write_dataset(dir / "d.bin", 8, additive_examples(AdditiveTask{}, 20'000, 5));
  const DatasetFile data(dir / "d.bin");
  BoostConfig cfg = small_config(2000, 60);
  cfg.ess_threshold = 0.5;
  Booster booster(data, cfg);
  Recorder recorder;
  const Ensemble e = booster.train(&recorder);
  EXPECT_EQ(cfg.stop_c, 1.0);

  std::uint32_t from = 0;
  const SampleSet* sample = nullptr;
  Rng rng(cfg.seed);
  const SampleSet initial = initial_sample(data, cfg.sample_size, rng);
  std::size_t next_swap = 0;
  std::size_t below_gamma = 0;
  for (std::uint32_t v = 1; v <= e.version(); ++v) {
    while (next_swap < recorder.swaps.size() && recorder.swaps[next_swap].version < v) {
      from = recorder.swaps[next_swap].version;
      sample = &recorder.swaps[next_swap].sample;
      ++next_swap;
    }
    const SampleSet& s = sample ? *sample : initial;
    double agree = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto ex = s.records.decode(i).example;
      const double y = to_double(ex.label);
      const double w = std::exp(-y * e.partial_score(from, v - 1, ex.features));
      agree += w * y * predict_rule(e.rules()[v - 1].rule, ex.features);
      total += w;
    }
    const RuleRecord& r = booster.log()[v - 1];
    EXPECT_GE(r.edge, r.gamma);
    below_gamma += agree / total < r.gamma;
  }
  EXPECT_GE(below_gamma, 1u);
}

TEST(Booster, DeterministicForFixedSeed) {
  testing::TempDir dir;
  write_dataset(dir / "d.bin", 8, additive_examples(AdditiveTask{}, 10'000, 7));
  const DatasetFile data(dir / "d.bin");
  const Ensemble a = train(data, small_config(1000, 25));
  const Ensemble b = train(data, small_config(1000, 25));
  ASSERT_EQ(a.version(), b.version());
  for (std::size_t i = 0; i < a.rules().size(); ++i) {
    EXPECT_EQ(a.rules()[i].rule, b.rules()[i].rule);
    EXPECT_EQ(a.rules()[i].alpha, b.rules()[i].alpha);
  }
}

TEST(Booster, PostSwapSampleHasFullEffectiveSize) {
  testing::TempDir dir;
  write_dataset(dir / "d.bin", 8, additive_examples(AdditiveTask{}, 10'000, 9));
  BoostConfig cfg = small_config(1000, 50);
  cfg.ess_threshold = 0.9;
  Booster booster(DatasetFile(dir / "d.bin"), cfg);
  Recorder recorder;
  booster.train(&recorder);
  ASSERT_GT(recorder.swaps.size(), 0u);
  for (const auto& swap : recorder.swaps) {
    std::vector<double> w(swap.sample.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = swap.sample.records.at(i).weight();
    EXPECT_DOUBLE_EQ(ess_ratio(w, cfg.sample_size), 1.0);
  }
  EXPECT_EQ(booster.stats().swaps, recorder.swaps.size());
}

TEST(BenchScan, PlantedStumpFiresEarly) {
  testing::TempDir dir;
  const PlantedStump task{6, 2, 0.3};
  write_planted_dataset(dir / "d.bin", task, 50'000, 1);
  const BenchScanResult r = bench_scan(DatasetFile(dir / "d.bin"), BenchScanOptions{});
  ASSERT_TRUE(r.fired);
  EXPECT_EQ(r.fired_rule.feature, 2u);
  EXPECT_EQ(r.full_rule.feature, 2u);
  EXPECT_EQ(r.full_scanned, 50'000u);
  EXPECT_LT(r.ratio(), 0.1);
  EXPECT_NEAR(r.full_edge, 0.3, 0.02);
}

}  // namespace
}  // namespace sparrow

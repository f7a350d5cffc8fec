#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sparrow/stopping.hpp"
#include "sparrow/core.hpp"

namespace sparrow {
namespace {

TEST(UpdateState, SingleTerms) {
  const ScanState a = update_state({}, 1.0, 1.0, 0.1);
  EXPECT_DOUBLE_EQ(a.m, 0.9);
  EXPECT_DOUBLE_EQ(a.v, 1.0);
  EXPECT_EQ(a.count, 1u);
  const ScanState b = update_state({}, 2.0, -1.0, 0.1);
  EXPECT_DOUBLE_EQ(b.m, -2.2);
  EXPECT_DOUBLE_EQ(b.v, 4.0);
  EXPECT_EQ(b.count, 1u);
}

TEST(UpdateState, FoldedSums) {
  ScanState s;
  const double w[] = {1, 1, 2};
  const double corr[] = {1, -1, 1};
  for (int i = 0; i < 3; ++i) s = update_state(s, w[i], corr[i], 0.0);
  EXPECT_DOUBLE_EQ(s.m, 2.0);
  EXPECT_DOUBLE_EQ(s.v, 6.0);
  EXPECT_EQ(s.count, 3u);
}

TEST(UpdateState, RejectsBadInput) {
  EXPECT_THROW(update_state({}, 0.0, 1.0, 0.1), InvalidInput);
  EXPECT_THROW(update_state({}, 1.0, 1.5, 0.1), InvalidInput);
  EXPECT_THROW(update_state({}, std::nan(""), 1.0, 0.1), InvalidInput);
}

TEST(UpdateState, OrderIndependent) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<double, double>> terms(500);
  for (auto& [w, c] : terms) {
    w = 0.01 + 10.0 * unit(rng);
    c = 2.0 * unit(rng) - 1.0;
  }
  ScanState forward;
  for (const auto& [w, c] : terms) forward = update_state(forward, w, c, 0.2);
  std::shuffle(terms.begin(), terms.end(), rng);
  ScanState shuffled;
  for (const auto& [w, c] : terms) shuffled = update_state(shuffled, w, c, 0.2);
  EXPECT_NEAR(shuffled.m, forward.m, 1e-9 * std::abs(forward.m));
  EXPECT_NEAR(shuffled.v, forward.v, 1e-9 * forward.v);
  EXPECT_EQ(shuffled.count, forward.count);
}

TEST(LogLogTerm, Guarded) {
  EXPECT_DOUBLE_EQ(loglog_term(0.5), 0.0);
  EXPECT_DOUBLE_EQ(loglog_term(2.0), 0.0);
  EXPECT_DOUBLE_EQ(loglog_term(std::exp(1.0)), 0.0);
  EXPECT_NEAR(loglog_term(std::exp(std::exp(2.0))), 2.0, 1e-12);
  EXPECT_GE(loglog_term(-3.0), 0.0);
}

TEST(ShouldStop, NegativeDriftNeverFires) {
  StoppingConfig cfg{1.0, std::log(1000.0), 0, 16};
  EXPECT_FALSE(should_stop({0.0, 100.0, 1000}, cfg));
  EXPECT_FALSE(should_stop({-5.0, 1.0, 1000}, cfg));
}

TEST(ShouldStop, BurnInGuard) {
  StoppingConfig cfg{1.0, std::log(1000.0), 256, 16};
  EXPECT_FALSE(should_stop({1e9, 1.0, 256}, cfg));
  EXPECT_TRUE(should_stop({1e9, 1.0, 257}, cfg));
}

TEST(ShouldStop, WorkedThreshold) {
  StoppingConfig cfg{1.0, std::log(1000.0), 0, 16};
  const ScanState s{50.0, 100.0, 1000};
  EXPECT_NEAR(stopping_threshold(s, cfg), 26.28260884878466, 1e-9);
  EXPECT_TRUE(should_stop(s, cfg));
  EXPECT_FALSE(should_stop({26.0, 100.0, 1000}, cfg));
}

TEST(ShouldStop, MonotoneInM) {
  StoppingConfig cfg{1.0, std::log(1e5), 0, 16};
  for (double v : {1.0, 10.0, 1e3, 1e6}) {
    bool fired = false;
    for (double m = 0.01; m < 1e5; m *= 1.05) {
      const bool now = should_stop({m, v, 10}, cfg);
      if (fired) {
        EXPECT_TRUE(now) << "m=" << m << " v=" << v;
      }
      fired = fired || now;
    }
    EXPECT_TRUE(fired);
  }
}

TEST(DefaultConfig, AppendixConstants) {
  const StoppingConfig one = default_config(1);
  EXPECT_DOUBLE_EQ(one.c, 1.0);
  EXPECT_NEAR(one.b, 6.907755278982137, 1e-12);
  const StoppingConfig many = default_config(1000);
  EXPECT_DOUBLE_EQ(many.c, 1.0);
  EXPECT_NEAR(many.b, 13.815510557964274, 1e-12);
  EXPECT_EQ(many.t0, kDefaultBurnIn);
  EXPECT_EQ(many.check_interval, kDefaultCheckInterval);
  EXPECT_THROW(default_config(0), InvalidInput);
}

TEST(Validate, RejectsBadConfig) {
  EXPECT_THROW(validate(StoppingConfig{0.0, 1.0, 0, 1}), InvalidInput);
  EXPECT_THROW(validate(StoppingConfig{1.0, 0.0, 0, 1}), InvalidInput);
  EXPECT_THROW(validate(StoppingConfig{1.0, 1.0, 0, 0}), InvalidInput);
  EXPECT_NO_THROW(validate(default_config(4)));
}

// Unit-weight stream with E[corr] = edge: corr is +1 with probability
// (1 + edge) / 2.
bool stream_fires(double edge, double gamma, const StoppingConfig& cfg,
                  std::uint64_t horizon, std::mt19937_64& rng) {
  std::bernoulli_distribution agree((1.0 + edge) / 2.0);
  ScanState s;
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    s = update_state(s, 1.0, agree(rng) ? 1.0 : -1.0, gamma);
    if (t % cfg.check_interval == 0 && should_stop(s, cfg)) return true;
  }
  return false;
}

TEST(StoppingSimulation, RarelyFiresBelowGamma) {
  std::mt19937_64 rng(2024);
  const StoppingConfig cfg{1.0, std::log(1.0 / 0.05), kDefaultBurnIn, kDefaultCheckInterval};
  int fired = 0;
  for (int trial = 0; trial < 300; ++trial) {
    fired += stream_fires(0.10, 0.15, cfg, 20'000, rng);
  }
  EXPECT_LE(fired / 300.0, 0.25);
}

TEST(StoppingSimulation, FiresQuicklyAboveGamma) {
  std::mt19937_64 rng(99);
  const StoppingConfig cfg{1.0, std::log(1.0 / 0.05), kDefaultBurnIn, kDefaultCheckInterval};
  int fired = 0;
  for (int trial = 0; trial < 300; ++trial) {
    fired += stream_fires(0.25, 0.15, cfg, 5000, rng);
  }
  EXPECT_GE(fired / 300.0, 0.99);
}

}  // namespace
}  // namespace sparrow

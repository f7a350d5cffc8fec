#include <gtest/gtest.h>

#include <sstream>

#include "sparrow/config.hpp"
#include "test_util.hpp"

namespace sparrow {
namespace {

TEST(ParseConfig, KeyValueLines) {
  std::istringstream in("# comment\nmax_rules = 50\n\n  stop.sigma=0.01  # trailing\nwork_dir = /tmp/a b\n");
  const ConfigEntries e = parse_config(in);
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0], (std::pair<std::string, std::string>{"max_rules", "50"}));
  EXPECT_EQ(e[1], (std::pair<std::string, std::string>{"stop.sigma", "0.01"}));
  EXPECT_EQ(e[2], (std::pair<std::string, std::string>{"work_dir", "/tmp/a b"}));
  EXPECT_TRUE(has_key(e, "stop.sigma"));
  EXPECT_FALSE(has_key(e, "seed"));
}

TEST(ParseConfig, ErrorsCarryLineNumbers) {
  std::istringstream missing_eq("max_rules = 1\njunk\n");
  try {
    parse_config(missing_eq);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream duplicate("seed = 1\nseed = 2\n");
  EXPECT_THROW(parse_config(duplicate), ParseError);
  std::istringstream empty_key(" = 3\n");
  EXPECT_THROW(parse_config(empty_key), ParseError);
}

TEST(ApplyConfig, OverridesEveryKey) {
  const ConfigEntries e{{"sample_size", "123"},       {"ess_threshold", "0.3"},
                        {"max_rules", "7"},           {"gamma_init", "0.2"},
                        {"max_leaves", "8"},          {"bins", "16"},
                        {"seed", "99"},               {"time_budget_seconds", "60"},
                        {"prefetch_factor", "1.5"},   {"work_dir", "/tmp/w"},
                        {"stop.c", "2"},              {"stop.sigma", "0.01"},
                        {"stop.t0", "100"},           {"stop.check_interval", "8"},
                        {"sampler.buffer_records", "64"}, {"sampler.segment_bytes", "4096"},
                        {"sampler.recount_interval", "1000"}};
  const BoostConfig c = apply_config(e);
  EXPECT_EQ(c.sample_size, 123u);
  EXPECT_EQ(c.ess_threshold, 0.3);
  EXPECT_EQ(c.max_rules, 7u);
  EXPECT_EQ(c.gamma_init, 0.2);
  EXPECT_EQ(c.max_leaves, 8u);
  EXPECT_EQ(c.bins, 16u);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.time_budget_seconds, 60.0);
  EXPECT_EQ(c.prefetch_factor, 1.5);
  EXPECT_EQ(c.work_dir, std::filesystem::path("/tmp/w"));
  EXPECT_EQ(c.stop_c, 2.0);
  EXPECT_EQ(c.stop_sigma, 0.01);
  EXPECT_EQ(c.stop_t0, 100u);
  EXPECT_EQ(c.stop_check_interval, 8u);
  EXPECT_EQ(c.store.buffer_records, 64u);
  EXPECT_EQ(c.store.segment_bytes, 4096u);
  EXPECT_EQ(c.store.recount_interval, 1000u);
  EXPECT_EQ(config_entries(c).size(), e.size());
  EXPECT_EQ(apply_config(config_entries(c)).sample_size, 123u);
}

TEST(ApplyConfig, RejectsBadEntries) {
  EXPECT_THROW(apply_config({{"nonsense", "1"}}), UsageError);
  EXPECT_THROW(apply_config({{"max_rules", "ten"}}), UsageError);
  EXPECT_THROW(apply_config({{"max_rules", "-3"}}), UsageError);
  EXPECT_THROW(apply_config({{"gamma_init", "0.7"}}), UsageError);
  EXPECT_THROW(apply_config({{"sample_size", "12abc"}}), UsageError);
}

TEST(ReadConfig, MissingFileIsUsageError) {
  testing::TempDir dir;
  EXPECT_THROW(read_config(dir / "none.cfg"), UsageError);
}

}  // namespace
}  // namespace sparrow

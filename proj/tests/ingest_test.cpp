#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <random>
#include <set>
#include <sstream>

#include "sparrow/ingest.hpp"
#include "test_util.hpp"

namespace sparrow {
namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

TEST(ParseLabel, AcceptedForms) {
  EXPECT_EQ(parse_label("1", 1), Label::Positive);
  EXPECT_EQ(parse_label("+1", 1), Label::Positive);
  EXPECT_EQ(parse_label("0", 1), Label::Negative);
  EXPECT_EQ(parse_label("-1", 1), Label::Negative);
  EXPECT_THROW(parse_label("2", 1), ParseError);
  EXPECT_THROW(parse_label("yes", 1), ParseError);
}

TEST(ParseCsv, FieldsAndErrors) {
  const LabeledExample ex = parse_csv_line("0,1.5,-2,3e2", 4);
  EXPECT_EQ(ex.label, Label::Negative);
  EXPECT_EQ(ex.features, (std::vector<float>{1.5f, -2.0f, 300.0f}));
  EXPECT_THROW(parse_csv_line("1,2,3", 4, 3), ParseError);
  EXPECT_THROW(parse_csv_line("1,abc", 4), ParseError);
  EXPECT_THROW(parse_csv_line("1,nan", 4), ParseError);
  try {
    parse_csv_line("1,,2", 17);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 17u);
  }
}

TEST(ParseSparse, Densifies) {
  const LabeledExample ex = parse_sparse_line("+1 3:0.5 7:1.0", 1, 10);
  EXPECT_EQ(ex.label, Label::Positive);
  EXPECT_EQ(ex.features, (std::vector<float>{0, 0, 0.5f, 0, 0, 0, 1.0f, 0, 0, 0}));
  EXPECT_THROW(parse_sparse_line("1 0:1", 2, 10), ParseError);
  EXPECT_THROW(parse_sparse_line("1 11:1", 2, 10), ParseError);
  EXPECT_THROW(parse_sparse_line("1 3-1", 2, 10), ParseError);
}

TEST(Ingest, SmallCsvMapsLabels) {
  testing::TempDir dir;
  write_text(dir / "in.csv", "1,0.5,2\n0,1.5,3\n\n# comment\n1,2.5,4\n");
  IngestOptions opt;
  const DatasetManifest m = ingest(dir / "in.csv", dir / "out.bin", opt);
  EXPECT_EQ(m.count, 3u);
  EXPECT_EQ(m.dimension, 2u);
  EXPECT_EQ(m.format, "csv");
  const DatasetFile file(dir / "out.bin");
  std::multiset<std::pair<float, int>> seen;
  for (const auto& ex : file.load_all()) {
    seen.insert({ex.features[0], static_cast<int>(to_double(ex.label))});
  }
  EXPECT_EQ(seen, (std::multiset<std::pair<float, int>>{{0.5f, 1}, {1.5f, -1}, {2.5f, 1}}));
  file.for_each([](const RecordRef& rec) {
    EXPECT_EQ(rec.weight(), 1.0);
    EXPECT_EQ(rec.version(), 0u);
  });
  EXPECT_EQ(read_manifest(manifest_path_for(dir / "out.bin")).count, 3u);
}

TEST(Ingest, SparseText) {
  testing::TempDir dir;
  write_text(dir / "in.txt", "+1 3:0.5 7:1.0\n-1 1:2\n");
  EXPECT_EQ(infer_sparse_dimension(dir / "in.txt"), 7u);
  IngestOptions opt;
  opt.format = InputFormat::SparseText;
  opt.dimension = 10;
  const DatasetManifest m = ingest(dir / "in.txt", dir / "out.bin", opt);
  EXPECT_EQ(m.dimension, 10u);
  for (const auto& ex : DatasetFile(dir / "out.bin").load_all()) {
    if (ex.label == Label::Positive) {
      EXPECT_EQ(ex.features, (std::vector<float>{0, 0, 0.5f, 0, 0, 0, 1.0f, 0, 0, 0}));
    } else {
      EXPECT_EQ(ex.features[0], 2.0f);
    }
  }
}

TEST(Ingest, ParseErrorsCarryLineNumbers) {
  testing::TempDir dir;
  write_text(dir / "in.csv", "1,0.5\n0,1.5\n1,2.5,9\n");
  try {
    ingest(dir / "in.csv", dir / "out.bin", IngestOptions{});
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_input_format("json"), UsageError);
  EXPECT_EQ(parse_input_format("sparse-text"), InputFormat::SparseText);
  EXPECT_STREQ(to_string(InputFormat::Csv), "csv");
}

std::string random_csv(std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> unit(-1e3f, 1e3f);
  std::string text;
  char buf[128];
  for (std::size_t i = 0; i < rows; ++i) {
    std::snprintf(buf, sizeof buf, "%d,%zu,%.9g,%.9g\n", static_cast<int>(i % 2), i,
                  static_cast<double>(unit(rng)), static_cast<double>(unit(rng)));
    text += buf;
  }
  return text;
}

TEST(Ingest, SameSeedIsByteIdentical) {
  testing::TempDir dir;
  write_text(dir / "in.csv", random_csv(5000, 1));
  IngestOptions opt;
  opt.seed = 42;
  opt.chunk_records = 700;
  ingest(dir / "in.csv", dir / "a.bin", opt);
  ingest(dir / "in.csv", dir / "b.bin", opt);
  EXPECT_EQ(read_bytes(dir / "a.bin"), read_bytes(dir / "b.bin"));
  opt.seed = 43;
  ingest(dir / "in.csv", dir / "c.bin", opt);
  EXPECT_NE(read_bytes(dir / "a.bin"), read_bytes(dir / "c.bin"));
  for (const auto& entry : std::filesystem::directory_iterator(dir.path())) {
    EXPECT_EQ(entry.path().string().find(".run"), std::string::npos) << entry.path();
  }
}

TEST(Ingest, RoundTripPreservesFloatValues) {
  testing::TempDir dir;
  const std::string text = random_csv(3000, 2);
  write_text(dir / "in.csv", text);
  IngestOptions opt;
  opt.chunk_records = 512;
  ingest(dir / "in.csv", dir / "out.bin", opt);
  std::vector<LabeledExample> expected(3000);
  std::istringstream lines(text);
  std::string line;
  for (std::size_t i = 0; std::getline(lines, line); ++i) {
    expected[i] = parse_csv_line(line, i + 1);
  }
  std::vector<bool> seen(3000, false);
  std::size_t moved = 0;
  std::size_t position = 0;
  for (const auto& ex : DatasetFile(dir / "out.bin").load_all()) {
    const auto id = static_cast<std::size_t>(ex.features[0]);
    ASSERT_LT(id, expected.size());
    EXPECT_FALSE(seen[id]);
    seen[id] = true;
    EXPECT_EQ(ex.features, expected[id].features);
    EXPECT_EQ(ex.label, expected[id].label);
    moved += id != position++;
  }
  EXPECT_GT(moved, 2900u);
}

TEST(Ingest, ShuffleIsUniformOverPositions) {
  // Position of record 0 across seeds: uniform over 10 slots.
  testing::TempDir dir;
  write_text(dir / "in.csv", random_csv(10, 3));
  std::vector<int> counts(10, 0);
  const int trials = 2000;
  for (int seed = 0; seed < trials; ++seed) {
    IngestOptions opt;
    opt.seed = static_cast<std::uint64_t>(seed);
    opt.chunk_records = 3;
    ingest(dir / "in.csv", dir / "out.bin", opt);
    const auto all = DatasetFile(dir / "out.bin").load_all();
    for (std::size_t p = 0; p < all.size(); ++p) {
      if (all[p].features[0] == 0.0f) ++counts[p];
    }
  }
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - 200.0) * (c - 200.0) / 200.0;
  // 9 degrees of freedom, 0.999 quantile.
  EXPECT_LT(chi2, 27.88);
}

TEST(ShuffleStore, PermutesBinaryStore) {
  testing::TempDir dir;
  std::vector<LabeledExample> data;
  for (int i = 0; i < 1000; ++i) data.push_back(LabeledExample{{static_cast<float>(i)}, Label::Positive});
  write_dataset(dir / "in.bin", 1, data);
  const DatasetManifest m = shuffle_store(DatasetFile(dir / "in.bin"), dir / "out.bin", 7, 100);
  EXPECT_EQ(m.count, 1000u);
  std::set<float> ids;
  for (const auto& ex : DatasetFile(dir / "out.bin").load_all()) ids.insert(ex.features[0]);
  EXPECT_EQ(ids.size(), 1000u);
}

}  // namespace
}  // namespace sparrow

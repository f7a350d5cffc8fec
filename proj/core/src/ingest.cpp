#include "sparrow/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

#include "sparrow/segment_file.hpp"

namespace sparrow {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

float parse_feature(std::string_view token, std::size_t line) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  float value = 0.0f;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || end != token.data() + token.size() || token.empty()) {
    throw ParseError("bad feature value '" + std::string(token) + "'", line);
  }
  if (!std::isfinite(value)) {
    throw ParseError("non-finite feature value '" + std::string(token) + "'", line);
  }
  return value;
}

/// Spills shuffled runs of encoded records and merges them.
class ExternalShuffler {
 public:
  ExternalShuffler(const fs::path& output, std::size_t dimension,
                   std::uint64_t seed, std::size_t chunk_records)
      : output_(output),
        dimension_(dimension),
        record_bytes_(record_size(dimension)),
        chunk_records_(std::max<std::size_t>(chunk_records, 1)),
        rng_(seed) {}

  ~ExternalShuffler() {
    std::error_code ec;
    for (const auto& run : runs_) fs::remove(run, ec);
  }

  void add(std::span<const std::byte> record) {
    buffer_.insert(buffer_.end(), record.begin(), record.end());
    if (buffer_.size() / record_bytes_ >= chunk_records_) spill();
  }

  std::uint64_t finish() {
    if (!buffer_.empty() || runs_.empty()) spill();
    std::vector<std::unique_ptr<SegmentReader>> readers;
    std::vector<std::uint64_t> remaining;
    std::vector<std::uint64_t> position;
    std::uint64_t total = 0;
    for (const auto& run : runs_) {
      readers.push_back(std::make_unique<SegmentReader>(run));
      remaining.push_back(readers.back()->record_count());
      position.push_back(0);
      total += remaining.back();
    }
    DatasetWriter writer(output_, dimension_);
    std::vector<std::vector<std::byte>> blocks(runs_.size());
    std::vector<std::size_t> block_pos(runs_.size(), 0);
    constexpr std::size_t kBlock = 4096;
    for (std::uint64_t left = total; left > 0; --left) {
      std::uniform_int_distribution<std::uint64_t> pick(0, left - 1);
      std::uint64_t target = pick(rng_);
      std::size_t r = 0;
      while (target >= remaining[r]) target -= remaining[r++];
      if (block_pos[r] >= blocks[r].size()) {
        const auto n = static_cast<std::size_t>(
            std::min<std::uint64_t>(kBlock, readers[r]->record_count() - position[r]));
        blocks[r].clear();
        readers[r]->read(position[r], n, blocks[r]);
        position[r] += n;
        block_pos[r] = 0;
      }
      writer.add_encoded(std::span(blocks[r]).subspan(block_pos[r], record_bytes_));
      block_pos[r] += record_bytes_;
      --remaining[r];
    }
    writer.flush();
    return total;
  }

 private:
  void spill() {
    const std::size_t n = buffer_.size() / record_bytes_;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng_);
    fs::path run = output_;
    run += ".run" + std::to_string(runs_.size());
    auto writer = SegmentWriter::create(run, static_cast<std::uint32_t>(dimension_));
    std::vector<std::byte> shuffled;
    shuffled.reserve(buffer_.size());
    for (std::size_t i : order) {
      const auto* first = buffer_.data() + i * record_bytes_;
      shuffled.insert(shuffled.end(), first, first + record_bytes_);
    }
    writer.append(shuffled);
    writer.flush();
    runs_.push_back(run);
    buffer_.clear();
  }

  fs::path output_;
  std::size_t dimension_;
  std::size_t record_bytes_;
  std::size_t chunk_records_;
  std::mt19937_64 rng_;
  std::vector<std::byte> buffer_;
  std::vector<fs::path> runs_;
};

}  // namespace

InputFormat parse_input_format(std::string_view name) {
  if (name == "csv") return InputFormat::Csv;
  if (name == "sparse-text") return InputFormat::SparseText;
  throw UsageError("unknown input format '" + std::string(name) +
                   "' (expected csv or sparse-text)");
}

const char* to_string(InputFormat format) {
  return format == InputFormat::Csv ? "csv" : "sparse-text";
}

Label parse_label(std::string_view token, std::size_t line) {
  token = trim(token);
  if (token == "1" || token == "+1") return Label::Positive;
  if (token == "0" || token == "-1") return Label::Negative;
  throw ParseError("bad label '" + std::string(token) + "' (expected 0, 1, -1 or +1)",
                   line);
}

LabeledExample parse_csv_line(std::string_view text, std::size_t line,
                              std::size_t dimension) {
  LabeledExample ex;
  std::size_t start = 0;
  bool first = true;
  while (true) {
    const auto comma = text.find(',', start);
    const auto field = text.substr(start, comma == std::string_view::npos
                                              ? std::string_view::npos
                                              : comma - start);
    if (first) {
      ex.label = parse_label(field, line);
      first = false;
    } else {
      ex.features.push_back(parse_feature(field, line));
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (dimension != 0 && ex.features.size() != dimension) {
    throw ParseError("expected " + std::to_string(dimension) + " features, found " +
                         std::to_string(ex.features.size()),
                     line);
  }
  return ex;
}

LabeledExample parse_sparse_line(std::string_view text, std::size_t line,
                                 std::size_t dimension) {
  LabeledExample ex;
  ex.features.assign(dimension, 0.0f);
  text = trim(text);
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    const auto end = std::min(text.find_first_of(" \t", pos), text.size());
    const auto token = text.substr(pos, end - pos);
    pos = text.find_first_not_of(" \t", end);
    if (pos == std::string_view::npos) pos = text.size();
    if (first) {
      ex.label = parse_label(token, line);
      first = false;
      continue;
    }
    const auto colon = token.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError("expected idx:val, got '" + std::string(token) + "'", line);
    }
    std::size_t index = 0;
    const auto idx = token.substr(0, colon);
    const auto [p, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), index);
    if (ec != std::errc() || p != idx.data() + idx.size() || index == 0) {
      throw ParseError("bad feature index '" + std::string(idx) + "'", line);
    }
    if (index > dimension) {
      throw ParseError("feature index " + std::to_string(index) +
                           " exceeds dimension " + std::to_string(dimension),
                       line);
    }
    ex.features[index - 1] = parse_feature(token.substr(colon + 1), line);
  }
  if (first) throw ParseError("missing label", line);
  return ex;
}

std::size_t infer_sparse_dimension(const fs::path& input) {
  std::ifstream in(input);
  if (!in) throw StorageError("cannot open " + input.string());
  std::string text;
  std::size_t line = 0;
  std::size_t dimension = 0;
  while (std::getline(in, text)) {
    ++line;
    std::string_view view = trim(text);
    if (view.empty() || view.front() == '#') continue;
    std::size_t pos = view.find_first_of(" \t");
    while (pos != std::string_view::npos) {
      pos = view.find_first_not_of(" \t", pos);
      if (pos == std::string_view::npos) break;
      const auto colon = view.find(':', pos);
      if (colon == std::string_view::npos) {
        throw ParseError("expected idx:val", line);
      }
      std::size_t index = 0;
      const auto [p, ec] = std::from_chars(view.data() + pos, view.data() + colon, index);
      if (ec != std::errc() || p != view.data() + colon) {
        throw ParseError("bad feature index", line);
      }
      dimension = std::max(dimension, index);
      pos = view.find_first_of(" \t", colon);
    }
  }
  return dimension;
}

DatasetManifest ingest(const fs::path& input, const fs::path& output,
                       const IngestOptions& options) {
  std::ifstream in(input);
  if (!in) throw StorageError("cannot open " + input.string());
  std::size_t dimension = options.dimension;
  if (options.format == InputFormat::SparseText && dimension == 0) {
    dimension = infer_sparse_dimension(input);
  }

  std::unique_ptr<ExternalShuffler> shuffler;
  std::vector<std::byte> encoded;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    const std::string_view view = trim(text);
    if (view.empty() || view.front() == '#') continue;
    LabeledExample ex = options.format == InputFormat::Csv
                            ? parse_csv_line(view, line, dimension)
                            : parse_sparse_line(view, line, dimension);
    if (dimension == 0) dimension = ex.features.size();
    if (dimension == 0) throw ParseError("rows have no features", line);
    if (!shuffler) {
      shuffler = std::make_unique<ExternalShuffler>(output, dimension, options.seed,
                                                    options.chunk_records);
    }
    encoded.resize(record_size(dimension));
    encode_record(StampedExample{std::move(ex), 1.0, 0}, encoded);
    shuffler->add(encoded);
  }
  if (!shuffler) throw InsufficientData("ingest: " + input.string() + " has no rows");
  const std::uint64_t count = shuffler->finish();

  DatasetManifest manifest;
  manifest.path = output.string();
  manifest.dimension = dimension;
  manifest.count = count;
  manifest.format = to_string(options.format);
  manifest.seed = options.seed;
  write_manifest(manifest_path_for(output), manifest);
  return manifest;
}

DatasetManifest shuffle_store(const DatasetFile& input, const fs::path& output,
                              std::uint64_t seed, std::size_t chunk_records) {
  ExternalShuffler shuffler(output, input.dimension(), seed, chunk_records);
  input.for_each([&](const RecordRef& rec) { shuffler.add(rec.bytes()); });
  DatasetManifest manifest;
  manifest.path = output.string();
  manifest.dimension = input.dimension();
  manifest.count = shuffler.finish();
  manifest.format = "binary";
  manifest.seed = seed;
  write_manifest(manifest_path_for(output), manifest);
  return manifest;
}

}  // namespace sparrow

#include "sparrow/dataset.hpp"

#include <fstream>
#include <sstream>

namespace sparrow {

namespace fs = std::filesystem;

fs::path manifest_path_for(const fs::path& store) {
  return fs::path(store.string() + ".manifest");
}

void write_manifest(const fs::path& path, const DatasetManifest& m) {
  std::ofstream out(path);
  if (!out) throw StorageError("cannot write manifest " + path.string());
  out << "path = " << m.path << '\n'
      << "dimension = " << m.dimension << '\n'
      << "count = " << m.count << '\n'
      << "format = " << m.format << '\n'
      << "seed = " << m.seed << '\n';
  if (!out) throw StorageError("failed writing manifest " + path.string());
}

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot open manifest " + path.string());
  DatasetManifest m;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", number);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 3);
    try {
      if (key == "path") m.path = value;
      else if (key == "dimension") m.dimension = std::stoull(value);
      else if (key == "count") m.count = std::stoull(value);
      else if (key == "format") m.format = value;
      else if (key == "seed") m.seed = std::stoull(value);
      else throw ParseError("unknown manifest key '" + key + "'", number);
    } catch (const std::logic_error&) {
      throw ParseError("bad value for '" + key + "'", number);
    }
  }
  return m;
}

DatasetFile::DatasetFile(fs::path path) : path_(std::move(path)) {
  SegmentReader reader(path_);
  dimension_ = reader.dimension();
  count_ = reader.record_count();
}

void DatasetFile::for_each(const std::function<void(const RecordRef&)>& visit,
                           std::size_t chunk_records) const {
  SegmentReader reader(path_);
  std::vector<std::byte> chunk;
  const std::size_t rec = record_bytes();
  for (std::uint64_t at = 0; at < count_;) {
    const auto n = static_cast<std::size_t>(
        std::min<std::uint64_t>(chunk_records, count_ - at));
    chunk.clear();
    reader.read(at, n, chunk);
    for (std::size_t i = 0; i < n; ++i) {
      visit(RecordRef(std::span(chunk).subspan(i * rec, rec), dimension_));
    }
    at += n;
  }
}

std::vector<LabeledExample> DatasetFile::load_all() const {
  std::vector<LabeledExample> out;
  out.reserve(count_);
  for_each([&](const RecordRef& rec) {
    LabeledExample ex;
    ex.label = rec.label();
    ex.features.resize(dimension_);
    rec.read_features(ex.features);
    out.push_back(std::move(ex));
  });
  return out;
}

DatasetWriter::DatasetWriter(const fs::path& path, std::size_t dimension)
    : dimension_(dimension),
      writer_(SegmentWriter::create(path, static_cast<std::uint32_t>(dimension))) {}

DatasetWriter::~DatasetWriter() {
  if (pending_ == 0) return;
  try {
    flush();
  } catch (const Error&) {
  }
}

void DatasetWriter::add(const LabeledExample& example) {
  validate(example, dimension_);
  const std::size_t offset = buffer_.size();
  buffer_.resize(offset + record_size(dimension_));
  encode_record(StampedExample{example, 1.0, 0},
                std::span(buffer_).subspan(offset));
  if (++pending_ >= 8192) flush();
}

void DatasetWriter::add_encoded(std::span<const std::byte> record) {
  if (record.size() != record_size(dimension_)) {
    throw InvalidInput("DatasetWriter: record size does not match dimension");
  }
  buffer_.insert(buffer_.end(), record.begin(), record.end());
  if (++pending_ >= 8192) flush();
}

void DatasetWriter::flush() {
  writer_.append(buffer_);
  writer_.flush();
  buffer_.clear();
  pending_ = 0;
}

void write_dataset(const fs::path& path, std::size_t dimension,
                   std::span<const LabeledExample> examples) {
  DatasetWriter writer(path, dimension);
  for (const auto& ex : examples) writer.add(ex);
  writer.flush();
}

}  // namespace sparrow

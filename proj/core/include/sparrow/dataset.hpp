#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparrow/core.hpp"
#include "sparrow/record.hpp"
#include "sparrow/segment_file.hpp"

namespace sparrow {

/// Sidecar describing an ingested binary store.
struct DatasetManifest {
  std::string path;
  std::size_t dimension = 0;
  std::uint64_t count = 0;
  std::string format;
  std::uint64_t seed = 0;
};

/// `<store>.manifest`
std::filesystem::path manifest_path_for(const std::filesystem::path& store);
void write_manifest(const std::filesystem::path& path,
                    const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// A binary record store: one segment file of stamped records.
class DatasetFile {
 public:
  explicit DatasetFile(std::filesystem::path path);

  const std::filesystem::path& path() const { return path_; }
  std::size_t dimension() const { return dimension_; }
  std::uint64_t size() const { return count_; }
  std::size_t record_bytes() const { return record_size(dimension_); }

  /// Streams the file in order, chunk_records at a time.
  void for_each(const std::function<void(const RecordRef&)>& visit,
                std::size_t chunk_records = 8192) const;

  std::vector<LabeledExample> load_all() const;

 private:
  std::filesystem::path path_;
  std::size_t dimension_ = 0;
  std::uint64_t count_ = 0;
};

/// Streams examples into a new binary store with version 0 and weight 1.
class DatasetWriter {
 public:
  DatasetWriter(const std::filesystem::path& path, std::size_t dimension);
  /// Flushes pending records; errors are swallowed, call flush() to see them.
  ~DatasetWriter();
  DatasetWriter(const DatasetWriter&) = delete;
  DatasetWriter& operator=(const DatasetWriter&) = delete;

  void add(const LabeledExample& example);
  void add_encoded(std::span<const std::byte> record);
  /// Flushes buffered records; the writer stays usable.
  void flush();
  std::uint64_t size() const { return writer_.record_count() + pending_; }

 private:
  std::size_t dimension_;
  SegmentWriter writer_;
  std::vector<std::byte> buffer_;
  std::uint64_t pending_ = 0;
};

void write_dataset(const std::filesystem::path& path, std::size_t dimension,
                   std::span<const LabeledExample> examples);

}  // namespace sparrow

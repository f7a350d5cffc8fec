#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

namespace sparrow {

/// Append-only writer for one segment file (header + packed records).
class SegmentWriter {
 public:
  /// Truncates `path` and writes a fresh header.
  static SegmentWriter create(const std::filesystem::path& path,
                              std::uint32_t dimension);
  /// Opens an existing segment for appending after validating its header.
  static SegmentWriter append_to(const std::filesystem::path& path,
                                 std::uint32_t dimension);

  /// `records` must be a whole number of encoded records.
  void append(std::span<const std::byte> records);
  void flush();

  std::uint64_t record_count() const { return records_; }
  std::uint64_t file_bytes() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  SegmentWriter(std::filesystem::path path, std::uint32_t dimension,
                std::uint64_t records, std::ofstream out);

  std::filesystem::path path_;
  std::uint32_t dimension_;
  std::uint64_t records_;
  std::ofstream out_;
};

/// Random-access reader over a segment file.
class SegmentReader {
 public:
  explicit SegmentReader(const std::filesystem::path& path);

  std::uint32_t dimension() const { return dimension_; }
  std::uint64_t record_count() const { return records_; }
  std::size_t record_bytes() const;

  /// Appends records [first, first + count) to `out`.
  void read(std::uint64_t first, std::size_t count, std::vector<std::byte>& out);

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::uint32_t dimension_ = 0;
  std::uint64_t records_ = 0;
};

}  // namespace sparrow

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sparrow/core.hpp"

namespace sparrow {

// Binary record, little-endian, packed:
//
//   offset 0   label     int8    (-1 / +1)
//   offset 1   version   uint32
//   offset 5   weight    float64
//   offset 13  features  dim x float32
//
// Segment files start with a 10-byte header: "SPRW", format version
// (uint16), dimension (uint32).

inline constexpr std::array<char, 4> kSegmentMagic{'S', 'P', 'R', 'W'};
inline constexpr std::uint16_t kRecordFormatVersion = 1;
inline constexpr std::size_t kSegmentHeaderBytes = 10;
inline constexpr std::size_t kRecordFixedBytes = 13;

constexpr std::size_t record_size(std::size_t dimension) {
  return kRecordFixedBytes + 4 * dimension;
}

void encode_record(const StampedExample& example, std::span<std::byte> out);
StampedExample decode_record(std::span<const std::byte> bytes,
                             std::size_t dimension);

std::array<std::byte, kSegmentHeaderBytes> encode_segment_header(
    std::uint32_t dimension);
/// Validates magic and version and returns the dimension.
std::uint32_t decode_segment_header(std::span<const std::byte> bytes);

/// Read-only field access on one encoded record.
class RecordRef {
 public:
  RecordRef(std::span<const std::byte> bytes, std::size_t dimension)
      : bytes_(bytes), dimension_(dimension) {}

  Label label() const;
  std::uint32_t version() const;
  double weight() const;
  /// Decodes the features into `out`, which must have size dimension.
  void read_features(std::span<float> out) const;
  std::span<const std::byte> bytes() const { return bytes_; }

 private:
  std::span<const std::byte> bytes_;
  std::size_t dimension_;
};

/// Overwrites the weight and version fields of an encoded record.
void set_stamp(std::span<std::byte> record, double weight,
               std::uint32_t version);

/// Contiguous array of encoded records. Resident size is exactly
/// capacity x record_size(dimension) once reserved.
class RecordBuffer {
 public:
  RecordBuffer() = default;
  explicit RecordBuffer(std::size_t dimension) : dimension_(dimension) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t record_bytes() const { return record_size(dimension_); }
  std::size_t size() const {
    return record_bytes() ? data_.size() / record_bytes() : 0;
  }
  bool empty() const { return data_.empty(); }

  void reserve(std::size_t records) { data_.reserve(records * record_bytes()); }
  void clear() { data_.clear(); }
  /// Bytes held by the underlying allocation.
  std::size_t resident_bytes() const { return data_.capacity(); }

  void push_back(const StampedExample& example);
  void push_back_encoded(std::span<const std::byte> record);

  RecordRef at(std::size_t index) const;
  void set_stamp(std::size_t index, double weight, std::uint32_t version);
  StampedExample decode(std::size_t index) const;

  std::span<const std::byte> raw() const { return data_; }

 private:
  std::size_t dimension_ = 0;
  std::vector<std::byte> data_;
};

/// In-memory sample handed from the sampler to the scanner. Every record
/// carries weight 1 stamped with the ensemble version it was assembled at.
struct SampleSet {
  RecordBuffer records;
  std::uint32_t version = 0;
  std::size_t target_size = 0;

  std::size_t size() const { return records.size(); }
  std::size_t resident_bytes() const { return records.resident_bytes(); }
};

}  // namespace sparrow

#include "sparrow/record.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace sparrow {

namespace {

template <typename U>
void store_le(std::byte* out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out[i] = static_cast<std::byte>((value >> (8 * i)) & 0xFF);
  }
}

template <typename U>
U load_le(const std::byte* in) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(std::to_integer<unsigned>(in[i])) << (8 * i);
  }
  return value;
}

void read_features_le(const std::byte* in, std::span<float> out) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data(), in, out.size() * sizeof(float));
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = std::bit_cast<float>(load_le<std::uint32_t>(in + 4 * i));
    }
  }
}

}  // namespace

void encode_record(const StampedExample& ex, std::span<std::byte> out) {
  const std::size_t dim = ex.example.features.size();
  if (out.size() != record_size(dim)) {
    throw InvalidInput("encode_record: buffer size does not match dimension");
  }
  if (!(ex.last_weight > 0.0) || !std::isfinite(ex.last_weight)) {
    throw InvalidInput("encode_record: weight must be positive and finite");
  }
  out[0] = static_cast<std::byte>(static_cast<std::int8_t>(ex.example.label));
  store_le<std::uint32_t>(out.data() + 1, ex.last_version);
  store_le<std::uint64_t>(out.data() + 5,
                          std::bit_cast<std::uint64_t>(ex.last_weight));
  for (std::size_t i = 0; i < dim; ++i) {
    store_le<std::uint32_t>(out.data() + kRecordFixedBytes + 4 * i,
                            std::bit_cast<std::uint32_t>(ex.example.features[i]));
  }
}

StampedExample decode_record(std::span<const std::byte> bytes,
                             std::size_t dimension) {
  if (bytes.size() != record_size(dimension)) {
    throw InvalidInput("decode_record: size does not match dimension");
  }
  StampedExample ex;
  ex.example.label =
      label_from_int(static_cast<std::int8_t>(std::to_integer<int>(bytes[0])));
  ex.last_version = load_le<std::uint32_t>(bytes.data() + 1);
  ex.last_weight =
      std::bit_cast<double>(load_le<std::uint64_t>(bytes.data() + 5));
  ex.example.features.resize(dimension);
  read_features_le(bytes.data() + kRecordFixedBytes, ex.example.features);
  return ex;
}

std::array<std::byte, kSegmentHeaderBytes> encode_segment_header(
    std::uint32_t dimension) {
  std::array<std::byte, kSegmentHeaderBytes> header{};
  for (std::size_t i = 0; i < 4; ++i) {
    header[i] = static_cast<std::byte>(kSegmentMagic[i]);
  }
  store_le<std::uint16_t>(header.data() + 4, kRecordFormatVersion);
  store_le<std::uint32_t>(header.data() + 6, dimension);
  return header;
}

std::uint32_t decode_segment_header(std::span<const std::byte> bytes) {
  if (bytes.size() < kSegmentHeaderBytes) {
    throw StorageError("segment header truncated");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (bytes[i] != static_cast<std::byte>(kSegmentMagic[i])) {
      throw StorageError("bad segment magic");
    }
  }
  const auto version = load_le<std::uint16_t>(bytes.data() + 4);
  if (version != kRecordFormatVersion) {
    throw StorageError("unsupported record format version " +
                       std::to_string(version));
  }
  return load_le<std::uint32_t>(bytes.data() + 6);
}

Label RecordRef::label() const {
  return static_cast<std::int8_t>(std::to_integer<int>(bytes_[0])) > 0
             ? Label::Positive
             : Label::Negative;
}

std::uint32_t RecordRef::version() const {
  return load_le<std::uint32_t>(bytes_.data() + 1);
}

double RecordRef::weight() const {
  return std::bit_cast<double>(load_le<std::uint64_t>(bytes_.data() + 5));
}

void set_stamp(std::span<std::byte> record, double weight,
               std::uint32_t version) {
  store_le<std::uint32_t>(record.data() + 1, version);
  store_le<std::uint64_t>(record.data() + 5,
                          std::bit_cast<std::uint64_t>(weight));
}

void RecordRef::read_features(std::span<float> out) const {
  read_features_le(bytes_.data() + kRecordFixedBytes,
                   out.first(dimension_));
}

void RecordBuffer::push_back(const StampedExample& example) {
  if (example.example.features.size() != dimension_) {
    throw InvalidInput("RecordBuffer: dimension mismatch");
  }
  const std::size_t offset = data_.size();
  data_.resize(offset + record_bytes());
  encode_record(example, std::span(data_).subspan(offset, record_bytes()));
}

void RecordBuffer::push_back_encoded(std::span<const std::byte> record) {
  if (record.size() != record_bytes()) {
    throw InvalidInput("RecordBuffer: encoded record has the wrong size");
  }
  data_.insert(data_.end(), record.begin(), record.end());
}

RecordRef RecordBuffer::at(std::size_t index) const {
  return RecordRef(std::span(data_).subspan(index * record_bytes(),
                                            record_bytes()),
                   dimension_);
}

void RecordBuffer::set_stamp(std::size_t index, double weight,
                             std::uint32_t version) {
  sparrow::set_stamp(
      std::span(data_).subspan(index * record_bytes(), record_bytes()), weight,
      version);
}

StampedExample RecordBuffer::decode(std::size_t index) const {
  return decode_record(
      std::span(data_).subspan(index * record_bytes(), record_bytes()),
      dimension_);
}

}  // namespace sparrow

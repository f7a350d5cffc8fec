#include "sparrow/segment_file.hpp"

#include <array>

#include "sparrow/core.hpp"
#include "sparrow/record.hpp"

namespace sparrow {

namespace fs = std::filesystem;

namespace {

std::uint32_t read_header(std::ifstream& in, const fs::path& path) {
  std::array<std::byte, kSegmentHeaderBytes> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  if (in.gcount() != static_cast<std::streamsize>(header.size())) {
    throw StorageError("segment header truncated: " + path.string());
  }
  try {
    return decode_segment_header(header);
  } catch (const StorageError& e) {
    throw StorageError(std::string(e.what()) + ": " + path.string());
  }
}

}  // namespace

SegmentWriter::SegmentWriter(fs::path path, std::uint32_t dimension,
                             std::uint64_t records, std::ofstream out)
    : path_(std::move(path)),
      dimension_(dimension),
      records_(records),
      out_(std::move(out)) {}

SegmentWriter SegmentWriter::create(const fs::path& path,
                                    std::uint32_t dimension) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StorageError("cannot create segment " + path.string());
  const auto header = encode_segment_header(dimension);
  out.write(reinterpret_cast<const char*>(header.data()), header.size());
  if (!out) throw StorageError("cannot write segment header " + path.string());
  return SegmentWriter(path, dimension, 0, std::move(out));
}

SegmentWriter SegmentWriter::append_to(const fs::path& path,
                                       std::uint32_t dimension) {
  std::uint64_t records = 0;
  {
    SegmentReader reader(path);
    if (reader.dimension() != dimension) {
      throw StorageError("segment dimension mismatch: " + path.string());
    }
    records = reader.record_count();
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw StorageError("cannot open segment " + path.string());
  return SegmentWriter(path, dimension, records, std::move(out));
}

void SegmentWriter::append(std::span<const std::byte> records) {
  const std::size_t rec = record_size(dimension_);
  if (records.size() % rec != 0) {
    throw InvalidInput("SegmentWriter: partial record");
  }
  out_.write(reinterpret_cast<const char*>(records.data()),
             static_cast<std::streamsize>(records.size()));
  if (!out_) throw StorageError("write failed on segment " + path_.string());
  records_ += records.size() / rec;
}

void SegmentWriter::flush() {
  out_.flush();
  if (!out_) throw StorageError("flush failed on segment " + path_.string());
}

std::uint64_t SegmentWriter::file_bytes() const {
  return kSegmentHeaderBytes + records_ * record_size(dimension_);
}

SegmentReader::SegmentReader(const fs::path& path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw StorageError("cannot open segment " + path.string());
  dimension_ = read_header(in_, path);
  std::error_code ec;
  const auto bytes = fs::file_size(path, ec);
  if (ec) throw StorageError("cannot stat segment " + path.string());
  const std::uint64_t body = bytes - kSegmentHeaderBytes;
  if (body % record_bytes() != 0) {
    throw StorageError("segment has a truncated trailing record: " +
                       path.string());
  }
  records_ = body / record_bytes();
}

std::size_t SegmentReader::record_bytes() const {
  return record_size(dimension_);
}

void SegmentReader::read(std::uint64_t first, std::size_t count,
                         std::vector<std::byte>& out) {
  if (first + count > records_) {
    throw StorageError("read past end of segment " + path_.string());
  }
  const std::size_t offset = out.size();
  const std::size_t bytes = count * record_bytes();
  out.resize(offset + bytes);
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(kSegmentHeaderBytes +
                                        first * record_bytes()));
  in_.read(reinterpret_cast<char*>(out.data() + offset),
           static_cast<std::streamsize>(bytes));
  if (in_.gcount() != static_cast<std::streamsize>(bytes)) {
    throw StorageError("short read on segment " + path_.string());
  }
}

}  // namespace sparrow

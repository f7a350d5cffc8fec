#include "sparrow/stratified_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sparrow/segment_file.hpp"

namespace sparrow {

namespace fs = std::filesystem;

int stratum_index(double weight) {
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw InvalidInput("stratum_index: weight must be positive and finite");
  }
  int exponent = 0;
  std::frexp(weight, &exponent);  // weight = m * 2^exponent, m in [0.5, 1)
  return exponent - 1;
}

// ---------------------------------------------------------------------------
// Stratum
// ---------------------------------------------------------------------------

Stratum::Stratum(int index, fs::path dir, std::size_t dimension,
                 const StoreOptions& options)
    : index_(index),
      dir_(std::move(dir)),
      dimension_(dimension),
      record_bytes_(record_size(dimension)),
      options_(options) {
  if (options_.buffer_records == 0) options_.buffer_records = 1;
}

Stratum::~Stratum() {
  for (const auto& seg : segments_) {
    std::error_code ec;
    fs::remove(seg.path, ec);
  }
}

fs::path Stratum::segment_path(std::uint64_t id) const {
  return dir_ / ("stratum_" + std::to_string(index_) + "_" +
                 std::to_string(id) + ".seg");
}

std::size_t Stratum::buffered_records() const {
  return (head_.size() - head_pos_ + tail_.size()) / record_bytes_;
}

void Stratum::push_back(std::span<const std::byte> record, double weight) {
  tail_.insert(tail_.end(), record.begin(), record.end());
  ++count_;
  weight_sum_.add(weight);
  if (tail_.size() >= options_.buffer_records * record_bytes_) flush_tail();
}

void Stratum::flush_tail() {
  if (tail_.empty()) return;
  try {
    const auto dim = static_cast<std::uint32_t>(dimension_);
    if (!segments_.empty() &&
        kSegmentHeaderBytes + segments_.back().records * record_bytes_ <
            options_.segment_bytes) {
      auto writer = SegmentWriter::append_to(segments_.back().path, dim);
      writer.append(tail_);
      writer.flush();
      segments_.back().records = writer.record_count();
    } else {
      const fs::path path = segment_path(next_segment_id_++);
      auto writer = SegmentWriter::create(path, dim);
      writer.append(tail_);
      writer.flush();
      segments_.push_back(SegmentInfo{path, writer.record_count(), 0});
    }
  } catch (const StorageError& e) {
    throw StorageError(e.what(), index_);
  }
  tail_.clear();
}

void Stratum::refill_head() {
  head_.clear();
  head_pos_ = 0;
  while (!segments_.empty()) {
    auto& seg = segments_.front();
    if (seg.consumed < seg.records) {
      const auto chunk = static_cast<std::size_t>(
          std::min<std::uint64_t>(options_.buffer_records,
                                  seg.records - seg.consumed));
      try {
        SegmentReader reader(seg.path);
        reader.read(seg.consumed, chunk, head_);
      } catch (const StorageError& e) {
        throw StorageError(e.what(), index_);
      }
      seg.consumed += chunk;
    }
    if (seg.consumed == seg.records) {
      std::error_code ec;
      fs::remove(seg.path, ec);
      segments_.pop_front();
    }
    if (!head_.empty()) return;
  }
  // Nothing left on disk: serve the unflushed tail in place.
  head_.swap(tail_);
}

double Stratum::pop_front(std::vector<std::byte>& out) {
  if (count_ == 0) throw EmptyStore("pop from empty stratum " + std::to_string(index_));
  if (head_pos_ >= head_.size()) refill_head();
  if (head_pos_ >= head_.size()) {
    throw StorageError("stratum lost records", index_);
  }
  const auto first = head_.begin() + static_cast<std::ptrdiff_t>(head_pos_);
  out.assign(first, first + static_cast<std::ptrdiff_t>(record_bytes_));
  head_pos_ += record_bytes_;
  const double weight = RecordRef(out, dimension_).weight();
  --count_;
  weight_sum_.add(-weight);
  if (count_ == 0) weight_sum_.reset();
  return weight;
}

void Stratum::for_each(
    const std::function<void(std::span<const std::byte>)>& visit) const {
  const auto emit_all = [&](std::span<const std::byte> bytes) {
    for (std::size_t off = 0; off + record_bytes_ <= bytes.size();
         off += record_bytes_) {
      visit(bytes.subspan(off, record_bytes_));
    }
  };
  emit_all(std::span(head_).subspan(head_pos_));
  std::vector<std::byte> chunk;
  for (const auto& seg : segments_) {
    try {
      SegmentReader reader(seg.path);
      for (std::uint64_t at = seg.consumed; at < seg.records;) {
        const auto n = static_cast<std::size_t>(
            std::min<std::uint64_t>(options_.buffer_records, seg.records - at));
        chunk.clear();
        reader.read(at, n, chunk);
        emit_all(chunk);
        at += n;
      }
    } catch (const StorageError& e) {
      throw StorageError(e.what(), index_);
    }
  }
  emit_all(tail_);
}

void Stratum::recount() {
  std::uint64_t count = 0;
  CompensatedSum sum;
  for_each([&](std::span<const std::byte> rec) {
    ++count;
    sum.add(RecordRef(rec, dimension_).weight());
  });
  count_ = count;
  weight_sum_ = sum;
}

// ---------------------------------------------------------------------------
// StratifiedStore
// ---------------------------------------------------------------------------

StratifiedStore::StratifiedStore(fs::path dir, std::size_t dimension,
                                 StoreOptions options)
    : dir_(std::move(dir)), dimension_(dimension), options_(options) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw StorageError("cannot create store directory " + dir_.string());
}

StratifiedStore::~StratifiedStore() = default;

Stratum& StratifiedStore::stratum_for(int k) {
  auto it = strata_.find(k);
  if (it == strata_.end()) {
    it = strata_
             .emplace(k, std::make_unique<Stratum>(k, dir_, dimension_, options_))
             .first;
  }
  return *it->second;
}

void StratifiedStore::note_operation() {
  ++operations_;
  if (options_.recount_interval > 0 &&
      operations_ % options_.recount_interval == 0) {
    recount();
  }
}

double StratifiedStore::total_weight() const {
  CompensatedSum sum;
  for (const auto& [k, s] : strata_) sum.add(s->weight_sum());
  return sum.value();
}

void StratifiedStore::insert(const StampedExample& example) {
  validate(example.example, dimension_);
  std::vector<std::byte> bytes(record_bytes());
  encode_record(example, bytes);
  push_back(bytes);
}

void StratifiedStore::push_back(std::span<const std::byte> record) {
  if (record.size() != record_bytes()) {
    throw InvalidInput("StratifiedStore: record size does not match dimension");
  }
  const double weight = RecordRef(record, dimension_).weight();
  stratum_for(stratum_index(weight)).push_back(record, weight);
  ++count_;
  note_operation();
}

double StratifiedStore::pop_front(int k, std::vector<std::byte>& out) {
  const auto it = strata_.find(k);
  if (it == strata_.end() || it->second->empty()) {
    throw EmptyStore("stratum " + std::to_string(k) + " is empty");
  }
  const double weight = it->second->pop_front(out);
  --count_;
  note_operation();
  return weight;
}

std::vector<int> StratifiedStore::nonempty_strata() const {
  std::vector<int> out;
  for (const auto& [k, s] : strata_) {
    if (!s->empty()) out.push_back(k);
  }
  return out;
}

std::uint64_t StratifiedStore::stratum_size(int k) const {
  const auto* s = find_stratum(k);
  return s ? s->size() : 0;
}

double StratifiedStore::stratum_weight(int k) const {
  const auto* s = find_stratum(k);
  return s ? s->weight_sum() : 0.0;
}

const Stratum* StratifiedStore::find_stratum(int k) const {
  const auto it = strata_.find(k);
  return it == strata_.end() ? nullptr : it->second.get();
}

void StratifiedStore::for_each_record(
    const std::function<void(int, const RecordRef&)>& visit) const {
  for (const auto& [k, s] : strata_) {
    s->for_each([&, k = k](std::span<const std::byte> rec) {
      visit(k, RecordRef(rec, dimension_));
    });
  }
}

StratifiedStore::Audit StratifiedStore::audit() const {
  Audit report;
  for (const auto& [k, s] : strata_) {
    CompensatedSum exact;
    s->for_each([&, k = k](std::span<const std::byte> rec) {
      const double w = RecordRef(rec, dimension_).weight();
      ++report.records;
      exact.add(w);
      if (stratum_index(w) != k) ++report.misplaced;
    });
    if (exact.value() > 0.0) {
      report.max_weight_sum_relative_error =
          std::max(report.max_weight_sum_relative_error,
                   std::abs(s->weight_sum() - exact.value()) / exact.value());
    }
  }
  return report;
}

void StratifiedStore::recount() {
  std::uint64_t total = 0;
  for (auto& [k, s] : strata_) {
    s->recount();
    total += s->size();
  }
  count_ = total;
}

void StratifiedStore::write_manifest(const fs::path& path) const {
  std::ofstream out(path);
  if (!out) throw StorageError("cannot write store manifest " + path.string());
  out << "sparrow-store 1\n";
  out << "dimension " << dimension_ << '\n';
  out << "records " << count_ << '\n';
  out.precision(17);
  for (const auto& [k, s] : strata_) {
    out << "stratum " << k << " count=" << s->size()
        << " weight_sum=" << s->weight_sum()
        << " buffered=" << s->buffered_records() << " segments=";
    if (s->segments().empty()) out << '-';
    bool first = true;
    for (const auto& seg : s->segments()) {
      if (!first) out << ',';
      first = false;
      out << seg.path.filename().string() << ':' << seg.consumed << '/'
          << seg.records;
    }
    out << '\n';
  }
  if (!out) throw StorageError("failed writing store manifest " + path.string());
}

}  // namespace sparrow

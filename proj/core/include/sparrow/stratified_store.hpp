#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "sparrow/core.hpp"
#include "sparrow/record.hpp"

namespace sparrow {

/// floor(log2(weight)), so that 2^k <= weight < 2^(k+1).
int stratum_index(double weight);

struct StoreOptions {
  /// Records held in memory at the head and at the tail of each stratum.
  std::size_t buffer_records = 4096;
  std::uint64_t segment_bytes = 16ull << 20;
  /// Exact recount of per-stratum weight sums every this many operations.
  std::uint64_t recount_interval = 1'000'000;
};

/// Disk-backed FIFO of records whose stamped weights lie in [2^k, 2^(k+1)).
///
/// Records flow tail buffer -> append-only segment files -> head buffer.
/// A segment is deleted once the head cursor has consumed all of it. When
/// no segment holds unread records, pops are served from the tail buffer
/// directly, so a small stratum never touches the disk.
class Stratum {
 public:
  Stratum(int index, std::filesystem::path dir, std::size_t dimension,
          const StoreOptions& options);
  ~Stratum();
  Stratum(const Stratum&) = delete;
  Stratum& operator=(const Stratum&) = delete;

  int index() const { return index_; }
  std::uint64_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  /// Incrementally maintained sum of stamped weights.
  double weight_sum() const { return weight_sum_.value(); }

  void push_back(std::span<const std::byte> record, double weight);
  /// Moves the head record into `out` and returns its stamped weight.
  double pop_front(std::vector<std::byte>& out);

  /// Visits every resident record in FIFO order without consuming it.
  void for_each(const std::function<void(std::span<const std::byte>)>& visit) const;

  /// Recomputes count and weight sum from the stored records.
  void recount();

  struct SegmentInfo {
    std::filesystem::path path;
    std::uint64_t records = 0;
    std::uint64_t consumed = 0;
  };
  const std::deque<SegmentInfo>& segments() const { return segments_; }
  std::size_t buffered_records() const;

 private:
  void flush_tail();
  void refill_head();
  std::filesystem::path segment_path(std::uint64_t id) const;

  int index_;
  std::filesystem::path dir_;
  std::size_t dimension_;
  std::size_t record_bytes_;
  StoreOptions options_;

  std::deque<SegmentInfo> segments_;
  std::uint64_t next_segment_id_ = 0;
  std::vector<std::byte> head_;
  std::size_t head_pos_ = 0;  // bytes of head_ already consumed
  std::vector<std::byte> tail_;

  std::uint64_t count_ = 0;
  CompensatedSum weight_sum_;
};

/// Examples partitioned into strata by floor(log2(stamped weight)).
class StratifiedStore {
 public:
  StratifiedStore(std::filesystem::path dir, std::size_t dimension,
                  StoreOptions options = {});
  ~StratifiedStore();
  StratifiedStore(const StratifiedStore&) = delete;
  StratifiedStore& operator=(const StratifiedStore&) = delete;

  std::size_t dimension() const { return dimension_; }
  std::size_t record_bytes() const { return record_size(dimension_); }
  std::uint64_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  double total_weight() const;
  const std::filesystem::path& directory() const { return dir_; }

  void insert(const StampedExample& example);
  /// Files the record under the stratum of its stamped weight.
  void push_back(std::span<const std::byte> record);
  /// Pops the head of stratum k; returns the stamped weight.
  double pop_front(int k, std::vector<std::byte>& out);

  /// Indices of strata that currently hold at least one record, ascending.
  std::vector<int> nonempty_strata() const;
  std::uint64_t stratum_size(int k) const;
  double stratum_weight(int k) const;
  const Stratum* find_stratum(int k) const;

  void for_each_record(
      const std::function<void(int stratum, const RecordRef&)>& visit) const;

  struct Audit {
    std::uint64_t records = 0;
    std::uint64_t misplaced = 0;  ///< records outside their stratum's band
    double max_weight_sum_relative_error = 0.0;
  };
  /// Full pass over every stratum checking the band invariant and the
  /// maintained weight sums.
  Audit audit() const;

  void recount();
  std::uint64_t operations() const { return operations_; }

  /// Text manifest: strata, segment files, counts and weight sums.
  void write_manifest(const std::filesystem::path& path) const;

 private:
  Stratum& stratum_for(int k);
  void note_operation();

  std::filesystem::path dir_;
  std::size_t dimension_;
  StoreOptions options_;
  std::map<int, std::unique_ptr<Stratum>> strata_;
  std::uint64_t count_ = 0;
  std::uint64_t operations_ = 0;
};

}  // namespace sparrow

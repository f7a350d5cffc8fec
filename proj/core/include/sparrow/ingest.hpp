#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "sparrow/core.hpp"
#include "sparrow/dataset.hpp"

namespace sparrow {

enum class InputFormat { Csv, SparseText };

/// "csv" or "sparse-text"; anything else is a UsageError.
InputFormat parse_input_format(std::string_view name);
const char* to_string(InputFormat format);

/// Accepts 1, +1, 0 and -1; 0 maps to the negative class.
Label parse_label(std::string_view token, std::size_t line);

/// `label,f1,f2,...`. A nonzero `dimension` is enforced.
LabeledExample parse_csv_line(std::string_view text, std::size_t line,
                              std::size_t dimension = 0);

/// `label idx:val ...` with 1-based indices, densified to `dimension`.
LabeledExample parse_sparse_line(std::string_view text, std::size_t line,
                                 std::size_t dimension);

/// Largest feature index in a sparse-text file.
std::size_t infer_sparse_dimension(const std::filesystem::path& input);

struct IngestOptions {
  InputFormat format = InputFormat::Csv;
  /// Required width; 0 infers it (first row for csv, a first pass for
  /// sparse text).
  std::size_t dimension = 0;
  std::uint64_t seed = 1;
  /// Records per shuffled run written to disk before the merge.
  std::size_t chunk_records = 1 << 20;
};

/// Parses `input`, writes a shuffled binary store at `output` with
/// weight 1 and version 0, and writes its manifest alongside.
///
/// The shuffle is external: runs of chunk_records are shuffled in memory and
/// spilled, then merged by repeatedly drawing a run with probability
/// proportional to its remaining records. The result is a uniformly random
/// permutation and depends only on the input and the seed.
DatasetManifest ingest(const std::filesystem::path& input,
                       const std::filesystem::path& output,
                       const IngestOptions& options);

/// Shuffles an existing binary store into `output` the same way.
DatasetManifest shuffle_store(const DatasetFile& input,
                              const std::filesystem::path& output,
                              std::uint64_t seed,
                              std::size_t chunk_records = 1 << 20);

}  // namespace sparrow

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sparrow/booster.hpp"

namespace sparrow {

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Flat `key = value` lines; `#` starts a comment. Throws ParseError with
/// the line number on malformed lines and duplicate keys.
ConfigEntries parse_config(std::istream& in);
ConfigEntries read_config(const std::filesystem::path& path);

/// Applies entries on top of `base`. Unknown keys and unparsable values
/// raise UsageError; the result is validated.
///
/// Keys: sample_size, ess_threshold, max_rules, gamma_init, max_leaves,
/// bins, seed, time_budget_seconds, prefetch_factor, work_dir, stop.c,
/// stop.sigma, stop.t0, stop.check_interval, sampler.buffer_records,
/// sampler.segment_bytes, sampler.recount_interval.
BoostConfig apply_config(const ConfigEntries& entries, BoostConfig base = {});

/// Every key of apply_config with its value in `cfg`.
ConfigEntries config_entries(const BoostConfig& cfg);

bool has_key(const ConfigEntries& entries, const std::string& key);

}  // namespace sparrow

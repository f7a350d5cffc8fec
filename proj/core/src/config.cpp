#include "sparrow/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>

namespace sparrow {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [p, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || p != end || value.empty()) {
    throw UsageError("config key '" + key + "': bad value '" + value + "'");
  }
  return out;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Setter = std::function<void(BoostConfig&, const std::string& key,
                                  const std::string& value)>;

template <typename T>
Setter number(T BoostConfig::*field) {
  return [field](BoostConfig& cfg, const std::string& key, const std::string& value) {
    cfg.*field = parse_number<T>(key, value);
  };
}

template <typename T>
Setter store_number(T StoreOptions::*field) {
  return [field](BoostConfig& cfg, const std::string& key, const std::string& value) {
    cfg.store.*field = parse_number<T>(key, value);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"sample_size", number(&BoostConfig::sample_size)},
      {"ess_threshold", number(&BoostConfig::ess_threshold)},
      {"max_rules", number(&BoostConfig::max_rules)},
      {"gamma_init", number(&BoostConfig::gamma_init)},
      {"max_leaves", number(&BoostConfig::max_leaves)},
      {"bins", number(&BoostConfig::bins)},
      {"seed", number(&BoostConfig::seed)},
      {"time_budget_seconds", number(&BoostConfig::time_budget_seconds)},
      {"prefetch_factor", number(&BoostConfig::prefetch_factor)},
      {"work_dir",
       [](BoostConfig& cfg, const std::string&, const std::string& value) {
         cfg.work_dir = value;
       }},
      {"stop.c", number(&BoostConfig::stop_c)},
      {"stop.sigma", number(&BoostConfig::stop_sigma)},
      {"stop.t0", number(&BoostConfig::stop_t0)},
      {"stop.check_interval", number(&BoostConfig::stop_check_interval)},
      {"sampler.buffer_records", store_number(&StoreOptions::buffer_records)},
      {"sampler.segment_bytes", store_number(&StoreOptions::segment_bytes)},
      {"sampler.recount_interval", store_number(&StoreOptions::recount_interval)},
  };
  return table;
}

}  // namespace

ConfigEntries parse_config(std::istream& in) {
  ConfigEntries entries;
  std::set<std::string> seen;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", number);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", number);
    if (!seen.insert(key).second) throw ParseError("duplicate key '" + key + "'", number);
    entries.emplace_back(std::move(key), std::move(value));
  }
  return entries;
}

ConfigEntries read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  return parse_config(in);
}

BoostConfig apply_config(const ConfigEntries& entries, BoostConfig base) {
  const auto& table = setters();
  for (const auto& [key, value] : entries) {
    const auto it = table.find(key);
    if (it == table.end()) throw UsageError("unknown config key '" + key + "'");
    it->second(base, key, value);
  }
  try {
    validate(base);
  } catch (const InvalidInput& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
  return base;
}

ConfigEntries config_entries(const BoostConfig& cfg) {
  ConfigEntries entries{
      {"sample_size", std::to_string(cfg.sample_size)},
      {"ess_threshold", format_real(cfg.ess_threshold)},
      {"max_rules", std::to_string(cfg.max_rules)},
      {"gamma_init", format_real(cfg.gamma_init)},
      {"max_leaves", std::to_string(cfg.max_leaves)},
      {"bins", std::to_string(cfg.bins)},
      {"seed", std::to_string(cfg.seed)},
      {"time_budget_seconds", format_real(cfg.time_budget_seconds)},
      {"prefetch_factor", format_real(cfg.prefetch_factor)},
      {"stop.c", format_real(cfg.stop_c)},
      {"stop.sigma", format_real(cfg.stop_sigma)},
      {"stop.t0", std::to_string(cfg.stop_t0)},
      {"stop.check_interval", std::to_string(cfg.stop_check_interval)},
      {"sampler.buffer_records", std::to_string(cfg.store.buffer_records)},
      {"sampler.segment_bytes", std::to_string(cfg.store.segment_bytes)},
      {"sampler.recount_interval", std::to_string(cfg.store.recount_interval)},
  };
  if (!cfg.work_dir.empty()) entries.emplace_back("work_dir", cfg.work_dir.string());
  return entries;
}

bool has_key(const ConfigEntries& entries, const std::string& key) {
  for (const auto& entry : entries) {
    if (entry.first == key) return true;
  }
  return false;
}

}  // namespace sparrow

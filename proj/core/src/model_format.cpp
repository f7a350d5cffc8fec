#include "sparrow/model_format.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sparrow/core.hpp"

namespace sparrow {

namespace {

constexpr const char* kMagic = "sparrow-model";
constexpr int kModelFormatVersion = 1;

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_real(const std::string& text, std::size_t line) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("bad real '" + text + "'", line);
  }
  return value;
}

template <typename Int>
Int parse_int(const std::string& text, std::size_t line) {
  Int value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("bad integer '" + text + "'", line);
  }
  return value;
}

bool next_line(std::istream& in, std::string& line, std::size_t& number) {
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

std::string expect_keyword(std::istream& in, std::size_t& number,
                           const std::string& keyword) {
  std::string line;
  if (!next_line(in, line, number)) {
    throw ParseError("unexpected end of model, expected '" + keyword + "'",
                     number);
  }
  if (line.rfind(keyword + " ", 0) != 0) {
    throw ParseError("expected '" + keyword + "'", number);
  }
  return line.substr(keyword.size() + 1);
}

}  // namespace

std::string format_scope(const Scope& scope) {
  if (scope.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < scope.size(); ++i) {
    if (i) out += '&';
    out += std::to_string(scope[i].feature);
    out += scope[i].left ? "<=" : ">";
    out += format_real(scope[i].threshold);
  }
  return out;
}

Scope parse_scope(const std::string& text) {
  Scope scope;
  if (text == "-") return scope;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t amp = text.find('&', start);
    const std::string part = text.substr(
        start, amp == std::string::npos ? std::string::npos : amp - start);
    const std::size_t op = part.find_first_of("<>");
    if (op == std::string::npos || op == 0) {
      throw InvalidInput("bad scope condition '" + part + "'");
    }
    Condition cond;
    cond.feature = parse_int<std::uint32_t>(part.substr(0, op), 0);
    std::string rest;
    if (part.compare(op, 2, "<=") == 0) {
      cond.left = true;
      rest = part.substr(op + 2);
    } else if (part[op] == '>') {
      cond.left = false;
      rest = part.substr(op + 1);
    } else {
      throw InvalidInput("bad scope operator in '" + part + "'");
    }
    cond.threshold = parse_real(rest, 0);
    scope.push_back(cond);
    if (amp == std::string::npos) break;
    start = amp + 1;
  }
  return scope;
}

void write_model(std::ostream& out, const Model& model) {
  out << kMagic << ' ' << kModelFormatVersion << '\n';
  out << "dimension " << model.dimension << '\n';
  out << "bins " << model.bins << '\n';
  for (const auto& [key, value] : model.config) {
    out << "config " << key << '=' << value << '\n';
  }
  const auto& rules = model.ensemble.rules();
  out << "rules " << rules.size() << '\n';
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& r = rules[i];
    out << i << ' ' << format_scope(r.rule.scope) << ' ' << r.rule.feature
        << ' ' << format_real(r.rule.threshold) << ' '
        << static_cast<int>(r.rule.polarity) << ' ' << format_real(r.alpha)
        << '\n';
  }
}

Model read_model(std::istream& in) {
  Model model;
  std::size_t number = 0;
  const std::string version = expect_keyword(in, number, kMagic);
  if (parse_int<int>(version, number) != kModelFormatVersion) {
    throw ParseError("unsupported model format version " + version, number);
  }
  model.dimension =
      parse_int<std::size_t>(expect_keyword(in, number, "dimension"), number);
  model.bins = parse_int<std::size_t>(expect_keyword(in, number, "bins"), number);

  std::string line;
  std::size_t rule_count = 0;
  while (true) {
    if (!next_line(in, line, number)) {
      throw ParseError("unexpected end of model, expected 'rules'", number);
    }
    if (line.rfind("config ", 0) == 0) {
      const std::string kv = line.substr(7);
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos) throw ParseError("bad config echo", number);
      model.config.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    } else if (line.rfind("rules ", 0) == 0) {
      rule_count = parse_int<std::size_t>(line.substr(6), number);
      break;
    } else {
      throw ParseError("unexpected header line", number);
    }
  }

  for (std::size_t i = 0; i < rule_count; ++i) {
    if (!next_line(in, line, number)) {
      throw ParseError("model ends after " + std::to_string(i) + " of " +
                           std::to_string(rule_count) + " rules",
                       number);
    }
    std::istringstream fields(line);
    std::string index, scope, feature, threshold, polarity, alpha, extra;
    if (!(fields >> index >> scope >> feature >> threshold >> polarity >>
          alpha) ||
        (fields >> extra)) {
      throw ParseError("rule line needs 6 fields", number);
    }
    if (parse_int<std::size_t>(index, number) != i) {
      throw ParseError("rule index out of sequence", number);
    }
    SplitRule rule;
    try {
      rule.scope = parse_scope(scope);
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), number);
    }
    rule.feature = parse_int<std::uint32_t>(feature, number);
    rule.threshold = parse_real(threshold, number);
    const int pol = parse_int<int>(polarity, number);
    if (pol != 1 && pol != -1) throw ParseError("polarity must be +-1", number);
    rule.polarity = static_cast<std::int8_t>(pol);
    if (model.dimension != 0 && rule.feature >= model.dimension) {
      throw ParseError("rule feature exceeds model dimension", number);
    }
    try {
      model.ensemble.append(std::move(rule), parse_real(alpha, number));
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), number);
    }
  }
  return model;
}

void save_model(const std::string& path, const Model& model) {
  std::ofstream out(path);
  if (!out) throw StorageError("cannot open model file " + path);
  write_model(out, model);
  if (!out) throw StorageError("failed writing model file " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot open model file " + path);
  return read_model(in);
}

}  // namespace sparrow

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sparrow/weak_learner.hpp"

namespace sparrow {

/// A trained ensemble plus the metadata echoed into the model file header.
struct Model {
  std::size_t dimension = 0;
  std::size_t bins = kDefaultBins;
  std::vector<std::pair<std::string, std::string>> config;
  Ensemble ensemble;
};

// Text format, one rule per line after the header:
//
//   sparrow-model 1
//   dimension <d>
//   bins <b>
//   config <key>=<value>        (zero or more)
//   rules <count>
//   <index> <scope> <feature> <threshold> <polarity> <alpha>
//
// <scope> is "-" for the root, otherwise conditions joined by '&', each
// written "<feature><=<threshold>" or "<feature>><threshold>". Reals are
// printed with 17 significant digits and therefore round-trip exactly.

void write_model(std::ostream& out, const Model& model);
Model read_model(std::istream& in);

void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

std::string format_scope(const Scope& scope);
Scope parse_scope(const std::string& text);

}  // namespace sparrow

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vgchaos {

struct BoundTerm {
  std::string name;
  double value = 0.0;
  double std_error = 0.0;
};

// Itemized bound: each term separately plus the combined value.
// c1, c2 are the multiplicative constants applied in total; the second-chaos
// and general-q bounds use 1 since no explicit constants are available.
struct BoundReport {
  std::string kind;
  std::vector<BoundTerm> terms;
  double total = 0.0;
  double c1 = 1.0;
  double c2 = 1.0;
  bool interior_negative = false;

  void add(std::string name, double value, double std_error = 0.0) {
    terms.push_back({std::move(name), value, std_error});
  }
  bool has(std::string_view name) const {
    for (const auto& t : terms)
      if (t.name == name) return true;
    return false;
  }
  const BoundTerm& get(std::string_view name) const {
    for (const auto& t : terms)
      if (t.name == name) return t;
    throw std::out_of_range("BoundReport: no term named " + std::string(name));
  }
  double term(std::string_view name) const { return get(name).value; }
};

}  // namespace vgchaos

#pragma once

#include <stdexcept>
#include <string>

namespace vgchaos {

// Dense tensor work beyond the desk-scale caps.
struct CapacityError : std::length_error {
  using std::length_error::length_error;
};

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Density evaluated exactly at the location for r <= 1.
struct PoleAtLocation : std::domain_error {
  using std::domain_error::domain_error;
};

// Input outside the hypothesis under which a formula is stated.
struct UnsupportedError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vgchaos

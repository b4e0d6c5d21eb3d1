#pragma once

#include <stdexcept>
#include <string>

namespace capdim {

// Argument outside a routine's documented domain (bad ratio, empty set, ...).
struct invalid_parameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A requested computation would blow past a configured cap (point counts,
// quadrature subdivisions, mesh index range).
struct resource_limit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative numeric routine stopped without reaching its tolerance.
// `residual` carries the best error estimate at the point of failure.
struct numerical_error : std::runtime_error {
  numerical_error(const std::string& msg, double res)
      : std::runtime_error(msg), residual(res) {}
  double residual;
};

}  // namespace capdim

#pragma once

#include <stdexcept>
#include <string>

namespace strtd {

/// Shapes or extents that do not line up (unfold/fold, mode products, factor sizes).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A quantity the algorithm divides by collapsed to zero (Lipschitz constant,
/// spectral norm, metric denominator).
class DegenerateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Non-finite values appeared while iterating.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace strtd

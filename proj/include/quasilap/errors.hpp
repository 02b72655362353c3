#pragma once

#include <stdexcept>
#include <string>

namespace quasilap {

/// Precondition violations: bad moduli, grid sizes, mismatched grids.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fixed-point or quadrature iteration failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A logarithm or square root would be evaluated across its cut, or an
/// eigenvalue sits on / crosses the spectral cut ray.
class BranchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symbol vanishing, |mu| >= 1, or a vanishing d f.
class EllipticityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Kernel dimension or spectral gap differs from what the construction requires.
class SpectralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace quasilap

#pragma once

#include <stdexcept>
#include <string>

namespace degreelab {

// Error categories surfaced by the library. The CLI maps them onto exit codes
// (invalid argument -> 2, resolution -> 3, resource limit -> 4).

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// The discretization is too coarse for the requested computation; refine the grid.
struct ResolutionInsufficient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A closed cap B(x, r) contains no grid point.
struct CapUnderResolved : ResolutionInsufficient {
  using ResolutionInsufficient::ResolutionInsufficient;
};

struct ResourceLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A located preimage has a (numerically) vanishing Jacobian.
struct NotRegularValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Ratio against a vanishing Dirichlet energy.
struct UndefinedRatio : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace degreelab

#pragma once

#include "degreelab/map_zoo.hpp"
#include "degreelab/sphere_geometry.hpp"

namespace degreelab {

struct DegreeResult {
  double raw = 0.0;  ///< integral value before rounding
  int degree = 0;    ///< nearest integer to raw
  double residual = 0.0;

  /// Residuals this large suggest an under-resolved sampling.
  bool suspect() const { return residual >= 0.1; }
};

DegreeResult make_degree_result(double raw);

/// Winding number of a d = 1 sampling: total wrapped angle swept by
/// consecutive image points over 2π. The grid must be ordered
/// counter-clockwise (uniform_circle_grid). Throws ResolutionInsufficient if
/// two consecutive images are (nearly) antipodal.
DegreeResult winding_number(const SampledMap& sm);

/// Discrete Kronecker integral on an oriented mesh: the signed solid angles of
/// the image triangles summed and divided by 4π. Throws ResolutionInsufficient
/// on an image triangle whose solid angle is ill-defined.
DegreeResult kronecker_degree(const TriangleMesh& mesh, const SampledMap& sm);

/// Dispatches on dimension: winding number (d = 1) or Kronecker (d = 2, needs
/// the grid's mesh).
DegreeResult compute_degree(const SphereGrid& grid, const SampledMap& sm);

/// Signed count of the preimages of a regular value. Preimages are located
/// by a scan over `resolution` samples (d = 1) or an icosphere of level
/// `resolution` (d = 2) and refined to 1e-10 chordal accuracy by bisection
/// (d = 1) or projected Newton iteration (d = 2).
/// Throws NotRegularValue when a preimage has |Jacobian| < 1e-6.
int preimage_count(const SphereMap& map, const SpherePoint& target, int resolution);

}  // namespace degreelab

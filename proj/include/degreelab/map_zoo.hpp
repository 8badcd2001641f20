#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "degreelab/sphere_geometry.hpp"

namespace degreelab {

using Complex = std::complex<double>;

/// A continuous map S^d -> S^d given by a pure evaluator. Outputs are
/// renormalized to unit length. Every map carries the textual spec that
/// rebuilds it through parse_map_spec().
class SphereMap {
 public:
  using Evaluator = std::function<SpherePoint(const SpherePoint&)>;

  SphereMap(int dim, std::string spec, Evaluator evaluator);

  int dim() const { return dim_; }
  const std::string& spec() const { return spec_; }
  SpherePoint operator()(const SpherePoint& x) const { return evaluator_(x).normalized(); }

 private:
  int dim_;
  std::string spec_;
  Evaluator evaluator_;
};

/// Values of a map at the points of a quadrature grid.
struct SampledMap {
  std::shared_ptr<const QuadratureGrid> grid;
  Eigen::Matrix3Xd values;

  int dim() const { return grid->dim; }
  Eigen::Index size() const { return values.cols(); }
};

// Stereographic chart: projection from the north pole (0, 0, 1) onto the
// equatorial plane, z = (x + iy) / (1 - x3). Points are handled through
// homogeneous pairs (a, b) with z = a / b so that the north pole (b = 0)
// needs no special casing.

/// Homogeneous stereographic coordinates of x; the pair has norm of order 1.
std::pair<Complex, Complex> stereographic_pair(const SpherePoint& x);

/// Inverse stereographic projection of the point a / b of the Riemann sphere.
SpherePoint inverse_stereographic(Complex a, Complex b);

inline SpherePoint inverse_stereographic(Complex z) { return inverse_stereographic(z, Complex(1.0)); }

SphereMap identity_map(int dim);
SphereMap constant_map(int dim);
SphereMap antipodal_map(int dim);

/// d = 1: angle θ -> kθ. Requires |k| <= 64.
SphereMap power_map(int k);

/// d = 2: z -> P(z) / Q(z) in stereographic coordinates. Coefficients are in
/// ascending order; trailing zeros are dropped. Poles map to the north pole.
SphereMap rational_map(std::vector<Complex> numerator, std::vector<Complex> denominator);

/// Degree-k map with its charge concentrated in a cap of scale 1/lambda.
/// d = 1: θ -> k·M_λ(θ) with the circle dilation M_λ(θ) = 2·atan2(λ sin(θ/2), cos(θ/2)).
/// d = 2: z -> (λz)^k (conjugated for k < 0). The concentration cap is centred
/// at angle 0 (d = 1) or at the south pole z = 0 (d = 2).
/// Requires lambda in [1, 1e4] and |k| <= 16.
SphereMap bubble_map(int dim, int k, double lambda);

/// Sum of unit-charge bubbles at distinct caps, total degree sign·|centers|.
/// d = 1: θ -> sign·Σ_i M_{λ_i}(θ - c_i), centers given as angles.
/// d = 2: z -> Π_i λ_i (z - a_i) (conjugated for sign = -1), centers given as
/// stereographic coordinates a_i.
SphereMap multibubble_map(int dim, int sign, std::vector<double> lambdas, std::vector<Complex> centers);

/// base plus a seeded smooth vector field of pointwise norm <= amplitude,
/// renormalized. Basis: Schmidt semi-normalized real spherical harmonics up
/// to degree 4 (d = 2), Fourier modes up to order 8 (d = 1).
/// Requires 0 <= amplitude < 0.9.
SphereMap perturb_map(const SphereMap& base, double amplitude, std::uint64_t seed);

/// Rotation of the codomain: x -> R g(x), R the rotation by angle about axis.
/// For d = 1 the axis is ignored and the rotation is about e3.
SphereMap rotated_map(const SphereMap& base, const Eigen::Vector3d& axis, double angle);

/// x -> codomain · g(domain^T x) for orthogonal matrices preserving the
/// d = 1 plane. Used for invariance checks; the spec string is annotated.
SphereMap conjugated_map(const SphereMap& base, const Eigen::Matrix3d& codomain, const Eigen::Matrix3d& domain);

/// Textual map spec, e.g. `power:k=3`, `rational:num=0,1;den=1`,
/// `bubble:k=2,lambda=50`, `perturb:base=power:k=1,amp=0.1,seed=7`.
/// Families without an intrinsic dimension use `d=` or default_dim.
/// Grammar is documented in README.md.
SphereMap parse_map_spec(std::string_view spec, int default_dim = 2);

/// Pointwise evaluation on every grid point, renormalized.
SampledMap sample_map(const SphereMap& map, std::shared_ptr<const QuadratureGrid> grid);

/// Differential of g at x in oriented orthonormal frames of the tangent
/// spaces at x and g(x), by central differences along geodesic steps of size
/// h. The result is d x d (top-left block of the returned 2 x 2 matrix for d = 1).
Eigen::Matrix2d differential(const SphereMap& map, const SpherePoint& x, double h);

/// Frobenius norm of the differential. Requires h in [1e-7, 1e-2].
double gradient_norm(const SphereMap& map, const SpherePoint& x, double h = 1e-4);

/// Signed Jacobian determinant of g at x (orientation of both frames matched).
double jacobian(const SphereMap& map, const SpherePoint& x, double h = 1e-6);

/// Shortest decimal that round-trips to value.
std::string format_real(double value);

/// Complex number in the map-spec syntax: `1`, `-2.5`, `3i`, `0.5-1.5i`.
Complex parse_complex(std::string_view text);
std::string format_complex(Complex value);

}  // namespace degreelab

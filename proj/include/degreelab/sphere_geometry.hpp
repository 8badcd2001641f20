#pragma once

#include <array>
#include <cmath>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace degreelab {

/// A point of S^d embedded in R^3. For d = 1 the circle lives in the
/// xy-plane and the third coordinate is identically zero.
using SpherePoint = Eigen::Vector3d;

/// |S^d|: 2π for d = 1, 4π for d = 2.
double sphere_measure(int dim);

/// Euclidean (chordal) distance in the ambient space; the metric |x - y| of
/// every double integral in this library.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar chordal_distance(const Eigen::MatrixBase<DerivedA>& p,
                                           const Eigen::MatrixBase<DerivedB>& q) {
  return (p - q).norm();
}

/// Signed solid angle of the geodesic triangle (a, b, c) on the unit sphere,
/// positive when det(a, b, c) > 0:
///   tan(Ω/2) = det(a, b, c) / (1 + a·b + b·c + c·a).
/// Returns a value in (-2π, 2π).
template <typename DerivedA, typename DerivedB, typename DerivedC>
typename DerivedA::Scalar signed_solid_angle(const Eigen::MatrixBase<DerivedA>& a,
                                             const Eigen::MatrixBase<DerivedB>& b,
                                             const Eigen::MatrixBase<DerivedC>& c) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar det = a.dot(b.cross(c));
  const Scalar den = Scalar(1) + a.dot(b) + b.dot(c) + c.dot(a);
  return Scalar(2) * std::atan2(det, den);
}

/// Point of the circle at angle theta.
inline SpherePoint circle_point(double theta) {
  return {std::cos(theta), std::sin(theta), 0.0};
}

/// Angle of a d = 1 point in (-π, π].
inline double circle_angle(const SpherePoint& p) { return std::atan2(p.y(), p.x()); }

/// Quadrature on S^d: unit points with positive weights summing to |S^d|.
struct QuadratureGrid {
  int dim = 2;
  Eigen::Matrix3Xd points;
  Eigen::VectorXd weights;
  /// Largest distance between neighbouring points: chordal step for circles,
  /// longest mesh edge for icospheres, hexagonal-lattice estimate for Fibonacci.
  double max_spacing = 0.0;

  Eigen::Index size() const { return points.cols(); }
  SpherePoint point(Eigen::Index i) const { return points.col(i); }
};

/// Oriented triangulation of S^2; each triangle satisfies det(v_a, v_b, v_c) > 0.
struct TriangleMesh {
  Eigen::Matrix3Xd vertices;
  std::vector<std::array<int, 3>> triangles;
  bool outward_oriented = true;

  std::size_t edge_count() const;
  long euler_characteristic() const;
};

/// n equispaced points at angles 2πi/n, weights 2π/n. Requires n >= 3.
QuadratureGrid uniform_circle_grid(int n);

/// Subdivided icosahedron projected to S^2 (10·4^L + 2 vertices,
/// 20·4^L triangles). Vertex weights are one third of the spherical areas of
/// the incident triangles. The poles (0, 0, ±1) are vertices.
std::pair<TriangleMesh, QuadratureGrid> icosphere_mesh(int level);

/// n-point Fibonacci spiral on S^2 with equal weights 4π/n. Requires n >= 12.
QuadratureGrid fibonacci_sphere_grid(int n);

/// A quadrature grid with the optional mesh it was built from, as produced
/// from a textual grid spec: "circle:<n>", "icosphere:<level>", "fibonacci:<n>".
struct SphereGrid {
  std::string spec;
  std::shared_ptr<const QuadratureGrid> quadrature;
  std::shared_ptr<const TriangleMesh> mesh;

  int dim() const { return quadrature->dim; }
};

SphereGrid make_grid(std::string_view spec);

/// Plain-text grid format: header `dim n`, then `x y w` (d = 1) or `x y z w`
/// (d = 2) per point, then one `tri a b c` line per triangle when a mesh is given.
void write_grid(std::ostream& out, const QuadratureGrid& grid, const TriangleMesh* mesh = nullptr);

/// Inverse of write_grid; leading `#` lines are skipped. Triangles, if
/// present, are stored in *mesh.
QuadratureGrid read_grid(std::istream& in, TriangleMesh* mesh = nullptr);

/// Orthonormal tangent basis at p (d vectors). For d = 2 the pair (t1, t2)
/// satisfies t1 × t2 = p, for d = 1 t1 is the counter-clockwise direction.
std::array<Eigen::Vector3d, 2> tangent_frame(const SpherePoint& p, int dim);

}  // namespace degreelab

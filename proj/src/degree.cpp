#include "degreelab/degree.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "degreelab/errors.hpp"

namespace degreelab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRootTolerance = 1e-10;
constexpr double kMinJacobian = 1e-6;

// Wrapped angle from p to q in (-π, π], both on the d = 1 circle.
double angle_increment(const SpherePoint& p, const SpherePoint& q) {
  return std::atan2(p.x() * q.y() - p.y() * q.x(), p.dot(q));
}

int preimages_on_circle(const SphereMap& map, const SpherePoint& target, int resolution) {
  if (resolution < 3) throw InvalidArgument("preimage scan needs at least 3 samples");
  auto offset = [&](double theta) { return angle_increment(target, map(circle_point(theta))); };

  int count = 0;
  const double h = 2.0 * kPi / resolution;
  double f0 = offset(0.0);
  for (int i = 0; i < resolution; ++i) {
    double lo = i * h;
    double hi = (i + 1) * h;
    const double f_hi = offset(hi);
    const double f_lo = f0;
    f0 = f_hi;
    const bool crosses = (f_lo < 0.0) != (f_hi < 0.0);
    if (!crosses || std::abs(f_lo) > kPi / 2 || std::abs(f_hi) > kPi / 2) continue;

    const bool rising = f_lo < 0.0;
    double mid = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
      mid = 0.5 * (lo + hi);
      if (chordal_distance(map(circle_point(mid)), target) < kRootTolerance || hi - lo < 1e-15) break;
      const bool below = offset(mid) < 0.0;
      (below == rising ? lo : hi) = mid;
    }
    const double jac = jacobian(map, circle_point(mid));
    if (std::abs(jac) < kMinJacobian) throw NotRegularValue("preimage with vanishing derivative");
    count += jac > 0.0 ? 1 : -1;
  }
  return count;
}

bool contains(const SpherePoint& a, const SpherePoint& b, const SpherePoint& c, const SpherePoint& t) {
  const double orient = a.dot(b.cross(c));
  if (orient == 0.0) return false;
  const double s = orient > 0.0 ? 1.0 : -1.0;
  return s * t.dot(a.cross(b)) >= 0.0 && s * t.dot(b.cross(c)) >= 0.0 && s * t.dot(c.cross(a)) >= 0.0 &&
         t.dot(a + b + c) > 0.0;
}

// Newton iteration for g(x) = target in tangent coordinates.
bool refine_preimage(const SphereMap& map, const SpherePoint& target, SpherePoint& x) {
  for (int iter = 0; iter < 60; ++iter) {
    const SpherePoint gx = map(x);
    if (chordal_distance(gx, target) < kRootTolerance) return true;
    const auto image_frame = tangent_frame(gx, 2);
    const Eigen::Vector2d residual(image_frame[0].dot(target - gx), image_frame[1].dot(target - gx));
    const Eigen::Matrix2d d = differential(map, x, 1e-7);
    if (std::abs(d.determinant()) < 1e-300) return false;
    Eigen::Vector2d step = d.partialPivLu().solve(residual);
    if (step.norm() > 0.5) step *= 0.5 / step.norm();
    const auto frame = tangent_frame(x, 2);
    x = (x + step[0] * frame[0] + step[1] * frame[1]).normalized();
  }
  return chordal_distance(map(x), target) < kRootTolerance;
}

// Domain triangles whose image has an edge longer than this are split before
// the containment test, so that folded or wrapped images are not missed.
constexpr double kMaxImageEdge = 0.25;
constexpr int kMaxSplitDepth = 12;

struct RootSearch {
  const SphereMap& map;
  const SpherePoint& target;
  std::vector<SpherePoint> roots;

  void visit(const SpherePoint& a, const SpherePoint& b, const SpherePoint& c, const SpherePoint& ga,
             const SpherePoint& gb, const SpherePoint& gc, int depth) {
    const double edge = std::max({chordal_distance(ga, gb), chordal_distance(gb, gc), chordal_distance(gc, ga)});
    if (edge > kMaxImageEdge && depth < kMaxSplitDepth) {
      const SpherePoint ab = (a + b).normalized(), bc = (b + c).normalized(), ca = (c + a).normalized();
      const SpherePoint gab = map(ab), gbc = map(bc), gca = map(ca);
      visit(a, ab, ca, ga, gab, gca, depth + 1);
      visit(ab, b, bc, gab, gb, gbc, depth + 1);
      visit(ca, bc, c, gca, gbc, gc, depth + 1);
      visit(ab, bc, ca, gab, gbc, gca, depth + 1);
      return;
    }
    if (!contains(ga, gb, gc, target)) return;
    // Start from the domain point with the image triangle's barycentric weights.
    const double wa = target.dot(gb.cross(gc));
    const double wb = target.dot(gc.cross(ga));
    const double wc = target.dot(ga.cross(gb));
    const double total = wa + wb + wc;
    SpherePoint x = total != 0.0 ? SpherePoint((wa * a + wb * b + wc * c) / total) : SpherePoint(a + b + c);
    x.normalize();
    if (!refine_preimage(map, target, x)) return;
    for (const auto& r : roots) {
      if (chordal_distance(r, x) < 1e-7) return;
    }
    roots.push_back(x);
  }
};

int preimages_on_sphere(const SphereMap& map, const SpherePoint& target, int resolution) {
  const auto [mesh, grid] = icosphere_mesh(resolution);
  std::vector<SpherePoint> images(static_cast<std::size_t>(mesh.vertices.cols()));
  for (Eigen::Index i = 0; i < mesh.vertices.cols(); ++i) images[i] = map(mesh.vertices.col(i));

  RootSearch search{map, target, {}};
  for (const auto& [a, b, c] : mesh.triangles) {
    search.visit(mesh.vertices.col(a), mesh.vertices.col(b), mesh.vertices.col(c), images[a], images[b], images[c], 0);
  }

  int count = 0;
  for (const auto& r : search.roots) {
    const double jac = jacobian(map, r);
    if (std::abs(jac) < kMinJacobian) throw NotRegularValue("preimage with vanishing Jacobian");
    count += jac > 0.0 ? 1 : -1;
  }
  return count;
}

}  // namespace

DegreeResult make_degree_result(double raw) {
  DegreeResult r;
  r.raw = raw;
  r.degree = static_cast<int>(std::lround(raw));
  r.residual = std::abs(raw - r.degree);
  return r;
}

DegreeResult winding_number(const SampledMap& sm) {
  if (sm.dim() != 1) throw InvalidArgument("winding number needs a d = 1 sampling");
  const auto& pts = sm.grid->points;
  const Eigen::Index n = sm.size();
  double domain_turn = 0.0;
  double image_turn = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = (i + 1) % n;
    domain_turn += angle_increment(pts.col(i), pts.col(j));
    const SpherePoint gi = sm.values.col(i);
    const SpherePoint gj = sm.values.col(j);
    if (chordal_distance(gi, gj) >= 2.0 - 1e-6) {
      throw ResolutionInsufficient("consecutive image points are antipodal; refine the circle grid");
    }
    image_turn += angle_increment(gi, gj);
  }
  if (std::abs(domain_turn - 2.0 * kPi) > 1e-6) {
    throw InvalidArgument("circle grid must be ordered counter-clockwise");
  }
  return make_degree_result(image_turn / (2.0 * kPi));
}

DegreeResult kronecker_degree(const TriangleMesh& mesh, const SampledMap& sm) {
  if (sm.dim() != 2) throw InvalidArgument("Kronecker degree needs a d = 2 sampling");
  if (mesh.vertices.cols() != sm.size()) throw InvalidArgument("mesh and sampling sizes differ");
  double total = 0.0;
  for (const auto& [a, b, c] : mesh.triangles) {
    const auto ga = sm.values.col(a);
    const auto gb = sm.values.col(b);
    const auto gc = sm.values.col(c);
    const double det = ga.dot(gb.cross(gc));
    const double den = 1.0 + ga.dot(gb) + gb.dot(gc) + gc.dot(ga);
    if (std::abs(det) < 1e-12 && den < 1e-12) {
      throw ResolutionInsufficient("image triangle spans antipodal points; refine the mesh");
    }
    total += 2.0 * std::atan2(det, den);
  }
  return make_degree_result(total / (4.0 * kPi));
}

DegreeResult compute_degree(const SphereGrid& grid, const SampledMap& sm) {
  if (grid.dim() == 1) return winding_number(sm);
  if (!grid.mesh) throw InvalidArgument("degree on S^2 needs a meshed grid (icosphere)");
  return kronecker_degree(*grid.mesh, sm);
}

int preimage_count(const SphereMap& map, const SpherePoint& target, int resolution) {
  if (std::abs(target.norm() - 1.0) > 1e-10) throw InvalidArgument("target must be a unit vector");
  if (map.dim() == 1) return preimages_on_circle(map, target, resolution);
  return preimages_on_sphere(map, target, resolution);
}

}  // namespace degreelab

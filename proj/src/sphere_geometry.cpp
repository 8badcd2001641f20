#include "degreelab/sphere_geometry.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "degreelab/errors.hpp"

namespace degreelab {

namespace {

constexpr double kPi = std::numbers::pi;

void normalize_columns(Eigen::Matrix3Xd& pts) {
  for (Eigen::Index i = 0; i < pts.cols(); ++i) pts.col(i).normalize();
}

TriangleMesh icosahedron() {
  TriangleMesh mesh;
  mesh.vertices.resize(3, 12);
  const double z = 1.0 / std::sqrt(5.0);
  const double r = 2.0 / std::sqrt(5.0);
  mesh.vertices.col(0) << 0.0, 0.0, 1.0;
  for (int k = 0; k < 5; ++k) {
    const double upper = 2.0 * kPi * k / 5.0;
    const double lower = upper + kPi / 5.0;
    mesh.vertices.col(1 + k) << r * std::cos(upper), r * std::sin(upper), z;
    mesh.vertices.col(6 + k) << r * std::cos(lower), r * std::sin(lower), -z;
  }
  mesh.vertices.col(11) << 0.0, 0.0, -1.0;

  for (int k = 0; k < 5; ++k) {
    const int k1 = (k + 1) % 5;
    mesh.triangles.push_back({0, 1 + k, 1 + k1});
    mesh.triangles.push_back({1 + k, 6 + k, 1 + k1});
    mesh.triangles.push_back({1 + k1, 6 + k, 6 + k1});
    mesh.triangles.push_back({11, 6 + k1, 6 + k});
  }
  for (auto& t : mesh.triangles) {
    const SpherePoint a = mesh.vertices.col(t[0]);
    const SpherePoint b = mesh.vertices.col(t[1]);
    const SpherePoint c = mesh.vertices.col(t[2]);
    if (a.dot(b.cross(c)) < 0.0) std::swap(t[1], t[2]);
  }
  return mesh;
}

TriangleMesh subdivide(const TriangleMesh& coarse) {
  TriangleMesh fine;
  std::vector<SpherePoint> verts;
  verts.reserve(static_cast<std::size_t>(coarse.vertices.cols()) * 4);
  for (Eigen::Index i = 0; i < coarse.vertices.cols(); ++i) verts.emplace_back(coarse.vertices.col(i));

  std::unordered_map<std::uint64_t, int> midpoints;
  auto midpoint = [&](int a, int b) {
    const auto key = (static_cast<std::uint64_t>(std::min(a, b)) << 32) | static_cast<std::uint32_t>(std::max(a, b));
    if (auto it = midpoints.find(key); it != midpoints.end()) return it->second;
    const int idx = static_cast<int>(verts.size());
    verts.emplace_back((verts[a] + verts[b]).normalized());
    midpoints.emplace(key, idx);
    return idx;
  };

  fine.triangles.reserve(coarse.triangles.size() * 4);
  for (const auto& [a, b, c] : coarse.triangles) {
    const int ab = midpoint(a, b);
    const int bc = midpoint(b, c);
    const int ca = midpoint(c, a);
    fine.triangles.push_back({a, ab, ca});
    fine.triangles.push_back({ab, b, bc});
    fine.triangles.push_back({ca, bc, c});
    fine.triangles.push_back({ab, bc, ca});
  }
  fine.vertices.resize(3, static_cast<Eigen::Index>(verts.size()));
  for (std::size_t i = 0; i < verts.size(); ++i) fine.vertices.col(static_cast<Eigen::Index>(i)) = verts[i];
  return fine;
}

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw InvalidArgument("invalid " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

double sphere_measure(int dim) {
  if (dim == 1) return 2.0 * kPi;
  if (dim == 2) return 4.0 * kPi;
  throw InvalidArgument("only d = 1 and d = 2 are supported");
}

std::size_t TriangleMesh::edge_count() const {
  std::set<std::pair<int, int>> edges;
  for (const auto& [a, b, c] : triangles) {
    edges.emplace(std::minmax(a, b));
    edges.emplace(std::minmax(b, c));
    edges.emplace(std::minmax(c, a));
  }
  return edges.size();
}

long TriangleMesh::euler_characteristic() const {
  return static_cast<long>(vertices.cols()) - static_cast<long>(edge_count()) +
         static_cast<long>(triangles.size());
}

QuadratureGrid uniform_circle_grid(int n) {
  if (n < 3) throw InvalidArgument("circle grid needs n >= 3");
  QuadratureGrid grid;
  grid.dim = 1;
  grid.points.resize(3, n);
  for (int i = 0; i < n; ++i) grid.points.col(i) = circle_point(2.0 * kPi * i / n);
  normalize_columns(grid.points);
  grid.weights = Eigen::VectorXd::Constant(n, 2.0 * kPi / n);
  grid.max_spacing = 2.0 * std::sin(kPi / n);
  return grid;
}

std::pair<TriangleMesh, QuadratureGrid> icosphere_mesh(int level) {
  if (level < 0) throw InvalidArgument("icosphere level must be nonnegative");
  if (level > 8) throw ResourceLimit("icosphere level > 8 exceeds the memory guard");

  TriangleMesh mesh = icosahedron();
  for (int l = 0; l < level; ++l) mesh = subdivide(mesh);
  normalize_columns(mesh.vertices);

  QuadratureGrid grid;
  grid.dim = 2;
  grid.points = mesh.vertices;
  grid.weights = Eigen::VectorXd::Zero(mesh.vertices.cols());
  double max_edge = 0.0;
  for (const auto& [a, b, c] : mesh.triangles) {
    const auto va = mesh.vertices.col(a);
    const auto vb = mesh.vertices.col(b);
    const auto vc = mesh.vertices.col(c);
    const double third = signed_solid_angle(va, vb, vc) / 3.0;
    grid.weights[a] += third;
    grid.weights[b] += third;
    grid.weights[c] += third;
    max_edge = std::max({max_edge, chordal_distance(va, vb), chordal_distance(vb, vc), chordal_distance(vc, va)});
  }
  grid.max_spacing = max_edge;
  return {std::move(mesh), std::move(grid)};
}

QuadratureGrid fibonacci_sphere_grid(int n) {
  if (n < 12) throw InvalidArgument("Fibonacci grid needs n >= 12");
  QuadratureGrid grid;
  grid.dim = 2;
  grid.points.resize(3, n);
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    grid.points.col(i) << r * std::cos(phi), r * std::sin(phi), z;
  }
  normalize_columns(grid.points);
  grid.weights = Eigen::VectorXd::Constant(n, 4.0 * kPi / n);
  grid.max_spacing = std::sqrt(2.0 * (4.0 * kPi / n) / std::sqrt(3.0));
  return grid;
}

SphereGrid make_grid(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw InvalidArgument("grid spec must be <kind>:<size>: '" + std::string(spec) + "'");
  const auto kind = spec.substr(0, colon);
  const int size = parse_int(spec.substr(colon + 1), "grid size");

  SphereGrid grid;
  grid.spec = std::string(spec);
  if (kind == "circle") {
    grid.quadrature = std::make_shared<QuadratureGrid>(uniform_circle_grid(size));
  } else if (kind == "icosphere") {
    auto [mesh, quad] = icosphere_mesh(size);
    grid.mesh = std::make_shared<TriangleMesh>(std::move(mesh));
    grid.quadrature = std::make_shared<QuadratureGrid>(std::move(quad));
  } else if (kind == "fibonacci") {
    grid.quadrature = std::make_shared<QuadratureGrid>(fibonacci_sphere_grid(size));
  } else {
    throw InvalidArgument("unknown grid kind '" + std::string(kind) + "'");
  }
  return grid;
}

void write_grid(std::ostream& out, const QuadratureGrid& grid, const TriangleMesh* mesh) {
  std::ostringstream body;
  body.precision(17);
  body << grid.dim << ' ' << grid.size() << '\n';
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    body << grid.points(0, i) << ' ' << grid.points(1, i) << ' ';
    if (grid.dim == 2) body << grid.points(2, i) << ' ';
    body << grid.weights[i] << '\n';
  }
  if (mesh != nullptr) {
    for (const auto& [a, b, c] : mesh->triangles) body << "tri " << a << ' ' << b << ' ' << c << '\n';
  }
  out << body.str();
}

QuadratureGrid read_grid(std::istream& in, TriangleMesh* mesh) {
  QuadratureGrid grid;
  Eigen::Index n = 0;
  std::string line;
  while ((in >> std::ws) && in.peek() == '#') std::getline(in, line);
  if (!(in >> grid.dim >> n) || (grid.dim != 1 && grid.dim != 2) || n <= 0) {
    throw InvalidArgument("malformed grid header");
  }
  grid.points = Eigen::Matrix3Xd::Zero(3, n);
  grid.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    in >> grid.points(0, i) >> grid.points(1, i);
    if (grid.dim == 2) in >> grid.points(2, i);
    in >> grid.weights[i];
    if (!in) throw InvalidArgument("malformed grid row " + std::to_string(i));
  }
  std::string tag;
  std::vector<std::array<int, 3>> triangles;
  while (in >> tag) {
    if (tag != "tri") throw InvalidArgument("unexpected token '" + tag + "' in grid file");
    std::array<int, 3> t{};
    if (!(in >> t[0] >> t[1] >> t[2])) throw InvalidArgument("malformed triangle row");
    triangles.push_back(t);
  }
  if (mesh != nullptr) {
    mesh->vertices = grid.points;
    mesh->triangles = std::move(triangles);
  }
  return grid;
}

std::array<Eigen::Vector3d, 2> tangent_frame(const SpherePoint& p, int dim) {
  if (dim == 1) {
    return {Eigen::Vector3d(-p.y(), p.x(), 0.0).normalized(), Eigen::Vector3d::Zero()};
  }
  Eigen::Index axis = 0;
  p.cwiseAbs().minCoeff(&axis);
  const Eigen::Vector3d a = Eigen::Vector3d::Unit(axis);
  const Eigen::Vector3d t1 = (a - a.dot(p) * p).normalized();
  return {t1, p.cross(t1)};
}

}  // namespace degreelab

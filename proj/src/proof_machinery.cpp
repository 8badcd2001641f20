#include "degreelab/proof_machinery.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "degreelab/errors.hpp"
#include "degreelab/parallel.hpp"
#include "degreelab/random.hpp"

namespace degreelab {

namespace {

double cap_radius(int step_index, double step) { return 2.0 * (static_cast<double>(step_index) * step); }

int march_length(double step) { return static_cast<int>(std::floor(1.0 / step + 1e-9)); }

void validate_step(double step) {
  if (!(step >= 1e-4 && step <= 1e-1)) throw InvalidArgument("rho step must lie in [1e-4, 1e-1]");
}

}  // namespace

Eigen::Vector3d cap_average(const SampledMap& sm, const SpherePoint& center, double radius) {
  const auto& grid = *sm.grid;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  double weight = 0.0;
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    if ((grid.points.col(j) - center).norm() <= radius) {
      sum += grid.weights[j] * sm.values.col(j);
      weight += grid.weights[j];
    }
  }
  if (weight == 0.0) throw CapUnderResolved("cap B(x, r) contains no grid point; refine the grid");
  return sum / weight;
}

Eigen::Vector3d average_extension(const SampledMap& sm, const Eigen::Vector3d& X) {
  const double norm = X.norm();
  if (!(norm < 1.0)) throw InvalidArgument("extension point must lie in the open unit ball");
  if (norm == 0.0) return cap_average(sm, SpherePoint::UnitX(), 2.0);
  SpherePoint x = X / norm;
  if (sm.dim() == 1) x.z() = 0.0;
  return cap_average(sm, x, 2.0 * (1.0 - norm));
}

RhoResult rho_detail(const SampledMap& sm, const SpherePoint& x, double step) {
  validate_step(step);
  const auto& grid = *sm.grid;
  const int steps = march_length(step);

  // Bucket m holds the points first covered by the cap of step m, so that
  // prefix sums give every cap along the march from one pass over the grid.
  std::vector<double> bucket_weight(static_cast<std::size_t>(steps) + 1, 0.0);
  Eigen::Matrix3Xd bucket_sum = Eigen::Matrix3Xd::Zero(3, steps + 1);
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    const double dist = (grid.points.col(j) - x).norm();
    int m = std::max(1, static_cast<int>(std::ceil(dist / (2.0 * step))));
    while (m > 1 && dist <= cap_radius(m - 1, step)) --m;
    while (m <= steps && dist > cap_radius(m, step)) ++m;
    if (m > steps) continue;
    bucket_weight[static_cast<std::size_t>(m)] += grid.weights[j];
    bucket_sum.col(m) += grid.weights[j] * sm.values.col(j);
  }

  double weight = 0.0;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (int m = 1; m <= steps; ++m) {
    weight += bucket_weight[static_cast<std::size_t>(m)];
    sum += bucket_sum.col(m);
    if (weight == 0.0) continue;
    if ((sum / weight).norm() <= kAlpha) {
      RhoResult r;
      r.rho = std::min(1.0, static_cast<double>(m) * step);
      r.crossed = true;
      r.step_index = m;
      return r;
    }
  }
  return {};
}

RhoField rho_field(const SampledMap& sm, double step) {
  validate_step(step);
  RhoField field;
  field.grid = sm.grid;
  field.values.resize(static_cast<std::size_t>(sm.size()));
  constexpr Eigen::Index kBlock = 64;
  const auto n_blocks = static_cast<std::size_t>((sm.size() + kBlock - 1) / kBlock);
  parallel_for(n_blocks, [&](std::size_t block) {
    const auto begin = static_cast<Eigen::Index>(block) * kBlock;
    const auto end = std::min(sm.size(), begin + kBlock);
    for (Eigen::Index i = begin; i < end; ++i) {
      field.values[static_cast<std::size_t>(i)] = rho(sm, sm.grid->point(i), step);
    }
  });
  return field;
}

CrossingCheck crossing_check(const SampledMap& sm, const SpherePoint& x, const RhoResult& r, double step) {
  CrossingCheck check;
  if (!r.crossed || r.rho >= 1.0) return check;
  const int m = r.step_index;
  check.norm = cap_average(sm, x, cap_radius(m, step)).norm();
  double modulus = 0.0;
  if (m > 1) {
    try {
      modulus = std::max(modulus, std::abs(cap_average(sm, x, cap_radius(m - 1, step)).norm() - check.norm));
    } catch (const CapUnderResolved&) {
    }
  }
  if (m < march_length(step)) {
    modulus = std::max(modulus, std::abs(cap_average(sm, x, cap_radius(m + 1, step)).norm() - check.norm));
  }
  check.tolerance = modulus + 1e-12;
  check.consistent = std::abs(check.norm - kAlpha) <= check.tolerance;
  return check;
}

RhoDegreeBound rho_degree_bound(const SphereGrid& grid, const SampledMap& sm, double step) {
  RhoDegreeBound bound;
  bound.degree = compute_degree(grid, sm);
  bound.lhs = std::abs(bound.degree.degree);

  const RhoField field = rho_field(sm, step);
  std::vector<double> terms(field.values.size(), 0.0);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double r = field.values[i];
    if (r < 1.0) terms[i] = sm.grid->weights[static_cast<Eigen::Index>(i)] * std::pow(r, -sm.dim());
  }
  bound.rhs = pairwise_sum(terms);
  if (bound.rhs > 0.0) {
    bound.ratio = bound.lhs / bound.rhs;
  } else {
    bound.violation = bound.lhs != 0;
  }
  return bound;
}

double Ball::measure() const {
  if (dim == 1) return 2.0 * radius;
  if (dim == 2) return std::numbers::pi * radius * radius;
  throw InvalidArgument("balls are supported for d = 1 and d = 2");
}

BallQuadrature ball_quadrature(const Ball& ball, int n) {
  if (n < 2) throw InvalidArgument("ball quadrature needs n >= 2");
  if (!(ball.radius > 0.0)) throw InvalidArgument("ball radius must be positive");
  BallQuadrature q;
  q.ball = ball;
  if (ball.dim == 1) {
    q.points = Eigen::Matrix2Xd::Zero(2, n);
    const double h = 2.0 * ball.radius / n;
    for (int i = 0; i < n; ++i) q.points(0, i) = ball.center.x() - ball.radius + (i + 0.5) * h;
    q.points.row(1).setConstant(ball.center.y());
    q.weight = h;
  } else {
    const int total = n * n;
    q.points.resize(2, total);
    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < total; ++k) {
      const double r = ball.radius * std::sqrt((k + 0.5) / total);
      const double theta = golden_angle * k;
      q.points.col(k) = ball.center + r * Eigen::Vector2d(std::cos(theta), std::sin(theta));
    }
    q.weight = ball.measure() / total;
  }
  return q;
}

std::vector<Lemma1Report> lemma1_check(const ScalarField& f, const Ball& ball, double p,
                                       std::span<const double> deltas, int n) {
  if (!(p >= 1.0)) throw InvalidArgument("lemma1 needs p >= 1");
  if (deltas.empty()) throw InvalidArgument("no delta given");
  for (double d : deltas) {
    if (!(d > 0.0)) throw InvalidArgument("delta must be positive");
  }

  const BallQuadrature q = ball_quadrature(ball, n);
  const Eigen::Index m = q.points.cols();
  std::vector<double> values(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) values[static_cast<std::size_t>(i)] = f(q.points.col(i));

  std::vector<std::size_t> order(deltas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return deltas[a] < deltas[b]; });
  std::vector<double> sorted(deltas.size());
  for (std::size_t k = 0; k < order.size(); ++k) sorted[k] = deltas[order[k]];

  const std::size_t nk = sorted.size();
  const double half_power = 0.5 * (ball.dim + p);
  const bool unit_p = p == 1.0;
  // |x - y|^{-(d+p)} from the squared distance; integer and half-integer
  // powers avoid std::pow in the pair loop.
  auto kernel = [half_power](double s) {
    if (half_power == 1.0) return 1.0 / s;
    if (half_power == 1.5) return 1.0 / (s * std::sqrt(s));
    if (half_power == 2.0) return 1.0 / (s * s);
    return std::pow(s, -half_power);
  };
  std::vector<double> row_osc(static_cast<std::size_t>(m), 0.0);
  std::vector<double> row_kernel(static_cast<std::size_t>(m) * nk, 0.0);
  std::vector<double> bins(nk + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    std::fill(bins.begin(), bins.end(), 0.0);
    double osc = 0.0;
    const double fi = values[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double diff = std::abs(fi - values[static_cast<std::size_t>(j)]);
      osc += unit_p ? diff : std::pow(diff, p);
      if (!(diff > sorted[0])) continue;
      std::size_t bin = 0;
      for (std::size_t k = 0; k < nk; ++k) bin += diff > sorted[k] ? 1 : 0;
      const double s = (q.points.col(i) - q.points.col(j)).squaredNorm();
      bins[bin] += kernel(s);
    }
    row_osc[static_cast<std::size_t>(i)] = osc;
    double running = 0.0;
    for (std::size_t b = nk; b >= 1; --b) {
      running += bins[b];
      row_kernel[static_cast<std::size_t>(i) * nk + b - 1] = running;
    }
  }

  const double measure = ball.measure();
  const double w2 = q.weight * q.weight;
  const double lhs = 2.0 * w2 * pairwise_sum(row_osc) / (measure * measure);
  std::vector<Lemma1Report> reports(deltas.size());
  std::vector<double> column(static_cast<std::size_t>(m));
  for (std::size_t k = 0; k < nk; ++k) {
    for (Eigen::Index i = 0; i < m; ++i) {
      column[static_cast<std::size_t>(i)] = row_kernel[static_cast<std::size_t>(i) * nk + k];
    }
    const double delta = sorted[k];
    const double dp = std::pow(delta, p);
    Lemma1Report& r = reports[order[k]];
    r.p = p;
    r.delta = delta;
    r.ball_measure = measure;
    r.lhs = lhs;
    r.rhs_core = std::pow(measure, p / ball.dim - 1.0) * 2.0 * w2 * dp * pairwise_sum(column);
    r.ratio_bound = lhs / (r.rhs_core + dp);
  }
  return reports;
}

Lemma1Report lemma1_check(const ScalarField& f, const Ball& ball, double p, double delta, int n) {
  return lemma1_check(f, ball, p, std::span(&delta, 1), n).front();
}

ScalarField random_test_function(TestFunctionKind kind, const Ball& ball, std::uint64_t seed) {
  SeededStream stream(seed, "lemma1-test-function");
  Eigen::Vector2d direction = Eigen::Vector2d::UnitX();
  if (ball.dim == 2) {
    const double angle = 2.0 * std::numbers::pi * stream.uniform();
    direction = {std::cos(angle), std::sin(angle)};
  }
  // Ridge coordinate in [0, 1] across the ball.
  auto coordinate = [center = ball.center, radius = ball.radius, direction](const Eigen::Vector2d& x) {
    return 0.5 * ((x - center).dot(direction) / radius + 1.0);
  };

  if (kind == TestFunctionKind::PiecewiseLinear) {
    const int knots = 2 + static_cast<int>(stream.next_u64() % 7);
    std::vector<double> positions{0.0, 1.0};
    for (int k = 2; k < knots; ++k) positions.push_back(stream.uniform());
    std::sort(positions.begin(), positions.end());
    std::vector<double> heights;
    for (int k = 0; k < knots; ++k) heights.push_back(stream.uniform(-1.0, 1.0));
    return [coordinate, positions, heights](const Eigen::Vector2d& x) {
      const double s = std::clamp(coordinate(x), 0.0, 1.0);
      const auto it = std::upper_bound(positions.begin(), positions.end(), s);
      const auto hi = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - positions.begin(), 1,
                                                                            static_cast<std::ptrdiff_t>(positions.size()) - 1));
      const double span = positions[hi] - positions[hi - 1];
      const double t = span > 0.0 ? (s - positions[hi - 1]) / span : 0.0;
      return heights[hi - 1] + t * (heights[hi] - heights[hi - 1]);
    };
  }

  const int order = 1 + static_cast<int>(stream.next_u64() % 6);
  std::vector<double> a, b;
  for (int k = 1; k <= order; ++k) {
    a.push_back(stream.uniform(-1.0, 1.0) / k);
    b.push_back(stream.uniform(-1.0, 1.0) / k);
  }
  return [coordinate, a, b](const Eigen::Vector2d& x) {
    const double s = coordinate(x);
    double v = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double arg = 2.0 * std::numbers::pi * static_cast<double>(k + 1) * s;
      v += a[k] * std::cos(arg) + b[k] * std::sin(arg);
    }
    return v;
  };
}

TestFunctionKind parse_test_function_kind(std::string_view text) {
  if (text == "pl" || text == "piecewise-linear") return TestFunctionKind::PiecewiseLinear;
  if (text == "trig" || text == "trigonometric") return TestFunctionKind::Trigonometric;
  throw InvalidArgument("unknown test function kind '" + std::string(text) + "'");
}

}  // namespace degreelab

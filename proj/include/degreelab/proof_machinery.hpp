#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "degreelab/degree.hpp"
#include "degreelab/map_zoo.hpp"
#include "degreelab/sphere_geometry.hpp"

namespace degreelab {

/// Level at which the extension is considered to have left the target sphere.
inline constexpr double kAlpha = 0.5;

/// Weighted mean of the sampled values over the closed cap
/// B(center, radius) = {y : |y - center| <= radius}. Not renormalized.
/// Throws CapUnderResolved if the cap holds no grid point.
Eigen::Vector3d cap_average(const SampledMap& sm, const SpherePoint& center, double radius);

/// Average extension u(X) into the open unit ball: the cap average over
/// B(X/|X|, 2(1 - |X|)). X = 0 averages over the whole sphere.
Eigen::Vector3d average_extension(const SampledMap& sm, const Eigen::Vector3d& X);

/// Outcome of the inward radial march from x.
struct RhoResult {
  double rho = 1.0;
  /// True when |u| dropped to 1/2 or below before the centre was reached.
  bool crossed = false;
  /// Index m of the crossing step, rho = m * step.
  int step_index = 0;
};

/// Marches t = step, 2·step, ... along X = (1 - t) x and returns the first t
/// with |u(X)| <= 1/2 (cap radius 2t), or 1 if there is none. Leading steps
/// whose cap contains no grid point are skipped. Requires step in [1e-4, 1e-1].
RhoResult rho_detail(const SampledMap& sm, const SpherePoint& x, double step);

inline double rho(const SampledMap& sm, const SpherePoint& x, double step) { return rho_detail(sm, x, step).rho; }

/// ρ at every grid point, in grid order.
struct RhoField {
  std::shared_ptr<const QuadratureGrid> grid;
  std::vector<double> values;
};

RhoField rho_field(const SampledMap& sm, double step);

/// Check of the crossing characterization |⨍_{B(x, 2ρ)} g| = 1/2 at a
/// returned ρ < 1. The tolerance is the measured change of the cap-average
/// norm over one step on either side of ρ.
struct CrossingCheck {
  double norm = 0.0;
  double tolerance = 0.0;
  bool consistent = true;
};

CrossingCheck crossing_check(const SampledMap& sm, const SpherePoint& x, const RhoResult& r, double step);

/// |deg g| against ∫_{ρ(x) < 1} ρ(x)^{-d} dx.
struct RhoDegreeBound {
  int lhs = 0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool violation = false;  ///< rhs = 0 while lhs != 0
  DegreeResult degree;
};

RhoDegreeBound rho_degree_bound(const SphereGrid& grid, const SampledMap& sm, double step);

/// Ball in R^d: an interval (center - r, center + r) on the first axis for
/// d = 1, a disk for d = 2.
struct Ball {
  int dim = 1;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.5;

  double measure() const;
};

/// Equal-weight discretization of a ball: n midpoints (d = 1) or a sunflower
/// of n^2 points (d = 2).
struct BallQuadrature {
  Ball ball;
  Eigen::Matrix2Xd points;
  double weight = 0.0;
};

BallQuadrature ball_quadrature(const Ball& ball, int n);

using ScalarField = std::function<double(const Eigen::Vector2d&)>;

struct Lemma1Report {
  double p = 1.0;
  double delta = 0.0;
  double ball_measure = 0.0;
  double lhs = 0.0;       ///< |B|^{-2} ∬ |f(x) - f(y)|^p
  double rhs_core = 0.0;  ///< |B|^{p/d - 1} ∬_{|f(x)-f(y)| > δ} δ^p / |x - y|^{d+p}
  double ratio_bound = 0.0;  ///< lhs / (rhs_core + δ^p)
};

/// Both sides of the mean-oscillation inequality on a ball for one or more δ
/// from a single pass over the point pairs. Requires p >= 1.
std::vector<Lemma1Report> lemma1_check(const ScalarField& f, const Ball& ball, double p,
                                       std::span<const double> deltas, int n);

Lemma1Report lemma1_check(const ScalarField& f, const Ball& ball, double p, double delta, int n);

/// Random test functions on a ball. Piecewise-linear: 2..8 random knots with
/// values in [-1, 1]. Trigonometric: degree <= 6 with coefficients
/// uniform in [-1/m, 1/m]. For d = 2 both are ridge functions along a random
/// direction.
enum class TestFunctionKind { PiecewiseLinear, Trigonometric };

ScalarField random_test_function(TestFunctionKind kind, const Ball& ball, std::uint64_t seed);

TestFunctionKind parse_test_function_kind(std::string_view text);

}  // namespace degreelab

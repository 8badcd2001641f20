#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "degreelab/errors.hpp"
#include "degreelab/map_zoo.hpp"
#include "degreelab/nonlocal_energy.hpp"
#include "degreelab/parallel.hpp"
#include "degreelab/random.hpp"
#include "test_support.hpp"

using namespace degreelab;
using degreelab::support::identity_energy_oracle;

namespace {

double closed_form_circle(double delta) { return 4.0 * std::numbers::pi * std::sqrt(1.0 - delta * delta / 4.0); }

}  // namespace

TEST(EnergyOracle, OneDimensionalIntegralMatchesClosedForms) {
  for (double delta : {0.05, 0.25, 0.5, 1.0, 1.9}) {
    EXPECT_NEAR(identity_energy_oracle(1, delta) / closed_form_circle(delta), 1.0, 1e-9);
    const double sphere = 4.0 * std::numbers::pi * std::numbers::pi * (1.0 - delta * delta / 4.0);
    EXPECT_NEAR(identity_energy_oracle(2, delta) / sphere, 1.0, 1e-9);
  }
}

TEST(ThresholdEnergy, IdentityOnCircle) {
  const SphereGrid grid = make_grid("circle:8192");
  const SampledMap sm = sample_map(identity_map(1), grid.quadrature);
  for (double delta : {0.25, 0.5, 1.0}) {
    const EnergyReport r = threshold_energy(sm, delta);
    EXPECT_NEAR(r.value / identity_energy_oracle(1, delta), 1.0, 0.005) << delta;
    EXPECT_FALSE(r.under_resolved);
    EXPECT_EQ(r.samples, 8192);
    EXPECT_EQ(r.estimator, Estimator::PairwiseQuadrature);
  }
  EXPECT_NEAR(threshold_energy(sm, 0.5).value, 12.1673, 0.005 * 12.1673);
}

TEST(ThresholdEnergy, IdentityOnSphere) {
  const SphereGrid grid = make_grid("icosphere:5");
  const SampledMap sm = sample_map(identity_map(2), grid.quadrature);
  for (double delta : {0.5, 1.0}) {
    EXPECT_NEAR(threshold_energy(sm, delta).value / identity_energy_oracle(2, delta), 1.0, 0.02) << delta;
  }
}

TEST(ThresholdEnergy, TrivialZeros) {
  const SphereGrid grid = make_grid("icosphere:3");
  EXPECT_EQ(threshold_energy(sample_map(constant_map(2), grid.quadrature), 0.3).value, 0.0);
  EXPECT_EQ(threshold_energy(sample_map(identity_map(2), grid.quadrature), 2.0).value, 0.0);
  const SphereGrid circle = make_grid("circle:512");
  EXPECT_EQ(threshold_energy(sample_map(constant_map(1), circle.quadrature), 0.01).value, 0.0);
  EXPECT_EQ(threshold_energy(sample_map(power_map(5), circle.quadrature), 2.0).value, 0.0);
}

TEST(ThresholdEnergy, DeltaDomain) {
  const SphereGrid grid = make_grid("circle:64");
  const SampledMap sm = sample_map(identity_map(1), grid.quadrature);
  EXPECT_THROW(threshold_energy(sm, 0.0), InvalidArgument);
  EXPECT_THROW(threshold_energy(sm, -1.0), InvalidArgument);
  EXPECT_THROW(threshold_energy(sm, 2.5), InvalidArgument);
  EXPECT_THROW(threshold_energies(sm, std::vector<double>{}), InvalidArgument);
}

TEST(ThresholdEnergy, UnscaledIsMonotoneInDelta) {
  const SphereGrid grid = make_grid("icosphere:3");
  for (const char* spec : {"identity:d=2", "bubble:k=1,lambda=10,d=2", "perturb:base=identity:d=2,amp=0.5,seed=3"}) {
    const SampledMap sm = sample_map(parse_map_spec(spec), grid.quadrature);
    double previous = INFINITY;
    for (double delta = 0.05; delta <= 2.0; delta += 0.05) {
      const double v = threshold_energy(sm, delta, false).value;
      EXPECT_LE(v, previous) << spec << " " << delta;
      previous = v;
    }
  }
}

TEST(ThresholdEnergy, ReversedPairOrderAgrees) {
  const SphereGrid grid = make_grid("icosphere:4");
  for (const char* spec : {"identity:d=2", "bubble:k=2,lambda=5,d=2", "rational:num=1,0,2;den=0,1"}) {
    const SampledMap sm = sample_map(parse_map_spec(spec), grid.quadrature);
    for (double delta : {0.2, 0.7}) {
      const double a = threshold_energy(sm, delta).value;
      const double b = threshold_energy_reversed(sm, delta).value;
      EXPECT_NEAR(a, b, 1e-12 * std::abs(a)) << spec;
    }
  }
}

TEST(ThresholdEnergy, BitIdenticalAcrossThreadCounts) {
  const SphereGrid grid = make_grid("icosphere:4");
  const SampledMap sm = sample_map(parse_map_spec("perturb:base=identity:d=2,amp=0.3,seed=1"), grid.quadrature);
  const std::vector<double> deltas{0.1, 0.3, 0.9};
  set_thread_count(1);
  const auto one = threshold_energies(sm, deltas);
  set_thread_count(7);
  const auto seven = threshold_energies(sm, deltas);
  for (std::size_t k = 0; k < deltas.size(); ++k) EXPECT_EQ(one[k].value, seven[k].value);
}

TEST(ThresholdEnergy, MultiDeltaMatchesSingleCalls) {
  const SphereGrid grid = make_grid("circle:2048");
  const SampledMap sm = sample_map(bubble_map(1, 2, 4.0), grid.quadrature);
  const std::vector<double> deltas{1.0, 0.1, 0.5, 0.1};
  const auto multi = threshold_energies(sm, deltas, true);
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    EXPECT_EQ(multi[k].delta, deltas[k]);
    const double single = threshold_energy(sm, deltas[k]).value;
    EXPECT_NEAR(multi[k].value, single, 1e-12 * single);
  }
}

TEST(ThresholdEnergy, CodomainRotationIsExact) {
  const SphereGrid grid = make_grid("icosphere:4");
  const SphereMap base = parse_map_spec("bubble:k=1,lambda=3,d=2");
  const SphereMap rotated = rotated_map(base, Eigen::Vector3d(1, -1, 2), 2.0);
  for (double delta : {0.3, 1.17}) {
    const double a = threshold_energy(sample_map(base, grid.quadrature), delta).value;
    const double b = threshold_energy(sample_map(rotated, grid.quadrature), delta).value;
    EXPECT_NEAR(a, b, 1e-12 * a);
  }
}

TEST(ThresholdEnergy, DomainRotationWithinQuadratureTolerance) {
  const SphereGrid grid = make_grid("circle:4096");
  const SphereMap base = parse_map_spec("perturb:base=power:k=2,amp=0.3,seed=4");
  const Eigen::Matrix3d q = Eigen::AngleAxisd(0.123, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const Eigen::Matrix3d r = Eigen::AngleAxisd(-0.7, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const SphereMap moved = conjugated_map(base, r, q);
  for (double delta : {0.2, 0.5}) {
    const double a = threshold_energy(sample_map(base, grid.quadrature), delta).value;
    const double b = threshold_energy(sample_map(moved, grid.quadrature), delta).value;
    EXPECT_NEAR(a / b, 1.0, 1e-3);
  }
}

TEST(ThresholdEnergy, ResolutionFloorIsFlagged) {
  const SphereGrid grid = make_grid("circle:64");
  const SampledMap sm = sample_map(identity_map(1), grid.quadrature);
  EXPECT_TRUE(threshold_energy(sm, 0.05).under_resolved);
  EXPECT_FALSE(threshold_energy(sm, 1.5).under_resolved);
  EXPECT_GT(threshold_energy(sm, 0.05).lipschitz_estimate, 0.9);
}

TEST(ComponentEnergy, PredicateOnRandomPairs) {
  SeededStream s(2024);
  for (int d : {1, 2}) {
    for (int i = 0; i < 100000; ++i) {
      Eigen::Vector3d a(s.normal(), s.normal(), d == 2 ? s.normal() : 0.0);
      Eigen::Vector3d b(s.normal(), s.normal(), d == 2 ? s.normal() : 0.0);
      a.normalize();
      b.normalize();
      const double delta = 2.0 * s.uniform();
      if ((a - b).norm() > delta * std::sqrt(d + 1.0)) {
        ASSERT_GT((a - b).head(d + 1).cwiseAbs().maxCoeff(), delta);
      }
    }
  }
}

TEST(ComponentEnergy, ComponentsDominateScaledThreshold) {
  const SphereGrid grid = make_grid("icosphere:3");
  const SampledMap sm = sample_map(parse_map_spec("bubble:k=1,lambda=4,d=2"), grid.quadrature);
  const double delta = 0.4;
  double sum = 0.0;
  for (int j = 1; j <= 3; ++j) sum += component_threshold_energy(sm, j, delta).value;
  // Compare unscaled pair sets: every pair above δ√3 has a component above δ.
  const double wide = threshold_energy(sm, delta * std::sqrt(3.0), false).value;
  EXPECT_GE(sum / (delta * delta), wide);
  EXPECT_LE(component_threshold_energy(sm, 3, delta).value, threshold_energy(sm, delta).value);
  EXPECT_THROW(component_threshold_energy(sm, 0, delta), InvalidArgument);
  EXPECT_THROW(component_threshold_energy(sm, 4, delta), InvalidArgument);
}

TEST(MonteCarlo, AgreesWithOracle) {
  const EnergyReport r = monte_carlo_energy(identity_map(1), 0.5, 200000, 7);
  EXPECT_EQ(r.estimator, Estimator::MonteCarlo);
  EXPECT_GT(r.std_error, 0.0);
  EXPECT_LT(std::abs(r.value - closed_form_circle(0.5)), 4.0 * r.std_error);
  const EnergyReport again = monte_carlo_energy(identity_map(1), 0.5, 200000, 7);
  EXPECT_EQ(r.value, again.value);
  EXPECT_NE(r.value, monte_carlo_energy(identity_map(1), 0.5, 200000, 8).value);
  EXPECT_THROW(monte_carlo_energy(identity_map(1), 0.5, 999, 7), InvalidArgument);
  EXPECT_EQ(monte_carlo_energy(constant_map(2), 0.5, 1000, 1).value, 0.0);
}

TEST(Dirichlet, ClosedForms) {
  const SphereGrid circle = make_grid("circle:1024");
  const SphereGrid sphere = make_grid("icosphere:4");
  EXPECT_NEAR(dirichlet_energy(identity_map(1), *circle.quadrature) / (2.0 * std::numbers::pi), 1.0, 1e-4);
  EXPECT_NEAR(dirichlet_energy(identity_map(2), *sphere.quadrature) / (8.0 * std::numbers::pi), 1.0, 1e-4);
  EXPECT_NEAR(dirichlet_energy(power_map(2), *circle.quadrature) / (4.0 * std::numbers::pi), 1.0, 1e-4);
  EXPECT_EQ(dirichlet_energy(constant_map(2), *sphere.quadrature), 0.0);
}

TEST(BBM, IdentityOnCircle) {
  const auto grid = make_grid("circle:8192").quadrature;
  const std::vector<double> deltas{0.4, 0.2, 0.1, 0.05};
  const BBMEstimate id = bbm_limit_estimate(identity_map(1), grid, deltas);
  EXPECT_NEAR(id.k_estimate, 2.0, 0.04);
  const BBMEstimate p2 = bbm_limit_estimate(power_map(2), grid, deltas);
  EXPECT_NEAR(p2.k_estimate / id.k_estimate, 1.0, 0.05);
  EXPECT_EQ(id.ratios.size(), deltas.size());
}

TEST(BBM, Errors) {
  const auto grid = make_grid("circle:256").quadrature;
  EXPECT_THROW(bbm_limit_estimate(constant_map(1), grid, std::vector<double>{0.4, 0.2}), UndefinedRatio);
  EXPECT_THROW(bbm_limit_estimate(identity_map(1), grid, std::vector<double>{0.2, 0.4}), InvalidArgument);
  EXPECT_THROW(bbm_limit_estimate(identity_map(1), grid, std::vector<double>{0.2}), InvalidArgument);
}

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "degreelab/map_zoo.hpp"
#include "degreelab/sphere_geometry.hpp"

namespace degreelab {

enum class Estimator { PairwiseQuadrature, MonteCarlo };

std::string_view to_string(Estimator e);

/// Value of the thresholded double integral
///   E_δ(g) = ∬_{|g(x) - g(y)| > δ} δ^d / |x - y|^{2d} dx dy
/// (without the δ^d factor when scaled = false).
struct EnergyReport {
  double delta = 0.0;
  bool scaled = true;
  double value = 0.0;
  Estimator estimator = Estimator::PairwiseQuadrature;
  std::int64_t samples = 0;  ///< grid points or Monte Carlo pairs
  double std_error = 0.0;    ///< 0 for quadrature
  double pair_fraction = 0.0;
  double lipschitz_estimate = 0.0;
  /// δ < 4 · grid spacing · Lipschitz estimate: the discrete pair set
  /// under-resolves the threshold shell.
  bool under_resolved = false;
};

/// Sum over ordered pairs i != j with |g_i - g_j| > δ (strict) of
/// w_i w_j δ^d / |x_i - x_j|^{2d}. Rows are reduced in a fixed pairwise
/// tree, so the result is bit-identical for any thread count.
EnergyReport threshold_energy(const SampledMap& sm, double delta, bool scaled = true);

/// Same as threshold_energy for several δ from a single pass over the pairs.
/// Entries agree with the single-δ calls up to summation rounding.
std::vector<EnergyReport> threshold_energies(const SampledMap& sm, std::span<const double> deltas, bool scaled = true);

/// Scaled energy with the threshold applied to one image component,
/// |g_j(ξ) - g_j(η)| > δ, for j in 1..d+1.
EnergyReport component_threshold_energy(const SampledMap& sm, int component, double delta);

/// threshold_energy with the pair loop run in reverse (rows descending, each
/// row summing its lower-index partners). Used to check the pair symmetry.
EnergyReport threshold_energy_reversed(const SampledMap& sm, double delta, bool scaled = true);

/// Monte Carlo estimate from n_samples i.i.d. uniform pairs on S^d x S^d:
/// mean of |S^d|^2 · 1{|g(x) - g(y)| > δ} · δ^d / |x - y|^{2d}, with the
/// standard error of the mean. Requires n_samples >= 1000.
EnergyReport monte_carlo_energy(const SphereMap& map, double delta, std::int64_t n_samples, std::uint64_t seed,
                                bool scaled = true);

/// ∫ |∇g|^d over the grid's quadrature.
double dirichlet_energy(const SphereMap& map, const QuadratureGrid& grid, double h = 1e-4);

struct BBMEstimate {
  double k_estimate = 0.0;  ///< intercept of the linear fit r(δ) ≈ K + a·δ
  double slope = 0.0;
  double residual = 0.0;  ///< max |r(δ) - fit(δ)|
  double dirichlet = 0.0;
  std::vector<double> deltas;
  std::vector<double> energies;
  std::vector<double> ratios;
  bool under_resolved = false;
};

/// r(δ) = E_δ(g) / ∫|∇g|^d for strictly decreasing deltas, extrapolated
/// linearly to δ = 0. Throws UndefinedRatio for maps with zero Dirichlet energy.
BBMEstimate bbm_limit_estimate(const SphereMap& map, std::shared_ptr<const QuadratureGrid> grid,
                               std::span<const double> deltas, double h = 1e-4);

}  // namespace degreelab

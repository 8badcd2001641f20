#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "degreelab/map_zoo.hpp"
#include "degreelab/sphere_geometry.hpp"

namespace degreelab {

/// ℓ_d = sqrt(2 + 2/(d + 1)), the threshold above which the degree estimate fails.
double ell_constant(int d);

/// One (map, δ) evaluation of |deg g| / E_δ(g).
///
/// Flags (joined with '|'): `ok`, `degenerate` (energy 0 and degree 0, ratio
/// reported as 0), `violation-witness` (energy 0 with nonzero degree, ratio
/// is +inf), `under-resolved`, `suspect-degree`, or `error:<message>` when the
/// row could not be computed.
struct SweepRecord {
  std::string map_spec;
  int dim = 0;
  std::int64_t n = 0;
  double delta = 0.0;
  int degree = 0;
  double degree_residual = 0.0;
  double energy_scaled = 0.0;
  double ratio = 0.0;
  double runtime_ms = 0.0;
  std::string flag = "ok";
};

/// Requires delta in (0, 2). Resolution errors of the degree computation propagate.
SweepRecord ratio(const SphereMap& map, const SphereGrid& grid, double delta);

/// Zoo population used by `sweep --families default`.
std::vector<std::string> default_families(int d);

/// n points log-spaced from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, int n);

/// `log:lo:hi:n`, `lin:lo:hi:n` or a comma-separated list.
std::vector<double> parse_delta_grid(std::string_view text);

struct DeltaSummary {
  double delta = 0.0;
  double max_ratio = 0.0;  ///< empirical C(δ): a lower bound for the best constant
  std::string argmax;
};

struct SweepResult {
  std::vector<SweepRecord> records;  ///< family-major, δ in input order
  std::vector<DeltaSummary> summary;
  double headline_c = 0.0;  ///< max over δ of empirical C(δ)
  /// max / min of the positive empirical C(δ) values; 0 if there are none.
  double flatness = 0.0;
};

/// Every family at every δ on one grid. Families are map specs parsed with
/// the grid's dimension as default; a family that fails is recorded with an
/// error flag on each of its rows and the sweep continues.
SweepResult sweep(const std::vector<std::string>& families, std::span<const double> deltas, const SphereGrid& grid);

struct SearchResult {
  std::string best_spec;
  SweepRecord best;
  SweepRecord seed;
  int evaluations = 0;
  int accepted = 0;
  int rejected = 0;
  std::vector<std::string> log;  ///< one line per rejected candidate
};

/// Simulated annealing on log(ratio) over multibubble parameters (log λ_i and
/// centres) plus a seeded perturbation, at fixed degree and δ. The chain
/// starts from λ_i = 1 with evenly spaced centres (the identity for degree
/// ±1). Candidates whose degree differs from target_degree, or whose energy is
/// under-resolved, are rejected and logged; a new best is re-verified on a
/// refined grid. `budget` counts evaluations including the seed.
/// grid_spec defaults to circle:1024 (d = 1) and icosphere:4 (d = 2).
SearchResult extremal_search(int d, int target_degree, double delta, int budget, std::uint64_t seed,
                             std::string_view grid_spec = {});

struct ProbeReport {
  int dim = 0;
  double delta = 0.0;
  double ell = 0.0;
  std::vector<SweepRecord> rows;
  std::vector<double> energy_unscaled;
  /// Ratios strictly increase along the family list.
  bool ratio_increasing = false;
};

/// Degree, unscaled energy and ratio of each family for δ in [ℓ_d, 2). The
/// default family list is bubble(1, λ) for λ in {1, 10, 100}.
ProbeReport failure_probe(int d, double delta, std::vector<std::string> families, const SphereGrid& grid);

}  // namespace degreelab

#include "degreelab/nonlocal_energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "degreelab/errors.hpp"
#include "degreelab/parallel.hpp"
#include "degreelab/random.hpp"

namespace degreelab {

namespace {

constexpr Eigen::Index kRowBlock = 32;
constexpr Eigen::Index kColumnTile = 2048;

struct PairTotals {
  std::vector<double> sums;          // per threshold, ordered pairs
  std::vector<std::int64_t> counts;  // per threshold, ordered pairs
  double lipschitz = 0.0;
};

void validate_delta(double delta) {
  if (!(delta > 0.0 && delta <= 2.0)) throw InvalidArgument("delta must lie in (0, 2]");
}

// Accumulates, for each squared threshold t_k (ascending), the sum over
// unordered pairs with gap(i, j) > t_k of w_i w_j / s^Dim, s = |x_i - x_j|^2.
// gap(i, j) returns a squared image gap. Row i pairs with j > i (or j < i in
// reversed mode); rows are then combined by pairwise_sum in row order.
template <int Dim, typename Gap>
PairTotals accumulate_pairs(const QuadratureGrid& grid, const Gap& gap, std::span<const double> thresholds,
                            bool reversed) {
  const Eigen::Index n = grid.size();
  const std::size_t nk = thresholds.size();
  const double* x = grid.points.data();
  const double* w = grid.weights.data();
  const double near2 = 2.25 * grid.max_spacing * grid.max_spacing;

  std::vector<double> row_sums(static_cast<std::size_t>(n) * nk, 0.0);
  std::vector<std::int64_t> row_counts(static_cast<std::size_t>(n) * nk, 0);
  std::vector<double> row_lip(static_cast<std::size_t>(n), 0.0);

  const auto n_blocks = static_cast<std::size_t>((n + kRowBlock - 1) / kRowBlock);
  parallel_for(n_blocks, [&](std::size_t block) {
    const Eigen::Index begin = static_cast<Eigen::Index>(block) * kRowBlock;
    const Eigen::Index end = std::min(n, begin + kRowBlock);
    const auto rows = static_cast<std::size_t>(end - begin);
    // Per-row bins: bin b collects pairs whose gap exceeds exactly the b
    // smallest thresholds; suffix sums then give the per-threshold totals.
    std::vector<double> local(rows * (nk + 1), 0.0);
    std::vector<std::int64_t> local_count(rows * (nk + 1), 0);
    std::vector<double> lip(rows, 0.0);

    auto visit = [&](Eigen::Index i, Eigen::Index j) {
      const auto r = static_cast<std::size_t>(i - begin);
      const double d0 = x[3 * i] - x[3 * j], d1 = x[3 * i + 1] - x[3 * j + 1], d2 = x[3 * i + 2] - x[3 * j + 2];
      const double s = d0 * d0 + d1 * d1 + d2 * d2;
      const double g = gap(i, j);
      if (s < near2) lip[r] = std::max(lip[r], g / s);
      if (!(g > thresholds[0])) return;
      std::size_t bin = 0;
      for (std::size_t k = 0; k < nk; ++k) bin += g > thresholds[k] ? 1 : 0;
      local[r * (nk + 1) + bin] += Dim == 1 ? w[j] / s : w[j] / (s * s);
      ++local_count[r * (nk + 1) + bin];
    };

    if (!reversed) {
      // Column tiles keep the partner points cache-resident; each row still
      // visits its partners in ascending order.
      for (Eigen::Index j0 = begin + 1; j0 < n; j0 += kColumnTile) {
        const Eigen::Index j1 = std::min(n, j0 + kColumnTile);
        for (Eigen::Index i = begin; i < end; ++i) {
          for (Eigen::Index j = std::max(i + 1, j0); j < j1; ++j) visit(i, j);
        }
      }
    } else {
      for (Eigen::Index i = begin; i < end; ++i) {
        for (Eigen::Index j = i - 1; j >= 0; --j) visit(i, j);
      }
    }

    for (Eigen::Index i = begin; i < end; ++i) {
      const auto r = static_cast<std::size_t>(i - begin);
      double running = 0.0;
      std::int64_t running_count = 0;
      for (std::size_t b = nk; b >= 1; --b) {
        running += local[r * (nk + 1) + b];
        running_count += local_count[r * (nk + 1) + b];
        row_sums[static_cast<std::size_t>(i) * nk + b - 1] = w[i] * running;
        row_counts[static_cast<std::size_t>(i) * nk + b - 1] = running_count;
      }
      row_lip[static_cast<std::size_t>(i)] = lip[r];
    }
  });

  PairTotals totals;
  totals.sums.resize(nk);
  totals.counts.resize(nk);
  std::vector<double> column(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < nk; ++k) {
    std::int64_t count = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
      const Eigen::Index i = reversed ? n - 1 - r : r;
      column[static_cast<std::size_t>(r)] = row_sums[static_cast<std::size_t>(i) * nk + k];
      count += row_counts[static_cast<std::size_t>(i) * nk + k];
    }
    totals.sums[k] = 2.0 * pairwise_sum(column);
    totals.counts[k] = 2 * count;
  }
  totals.lipschitz = std::sqrt(*std::max_element(row_lip.begin(), row_lip.end()));
  return totals;
}

template <typename Gap>
PairTotals accumulate(const QuadratureGrid& grid, const Gap& gap, std::span<const double> thresholds, bool reversed) {
  if (grid.dim == 1) return accumulate_pairs<1>(grid, gap, thresholds, reversed);
  return accumulate_pairs<2>(grid, gap, thresholds, reversed);
}

std::vector<EnergyReport> energies_impl(const SampledMap& sm, std::span<const double> deltas, bool scaled,
                                        int component, bool reversed) {
  if (sm.size() < 3) throw InvalidArgument("energy needs at least 3 grid points");
  if (deltas.empty()) throw InvalidArgument("no delta given");
  for (double d : deltas) validate_delta(d);
  const int dim = sm.dim();

  std::vector<std::size_t> order(deltas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return deltas[a] < deltas[b]; });
  std::vector<double> thresholds(deltas.size());
  for (std::size_t k = 0; k < order.size(); ++k) thresholds[k] = deltas[order[k]] * deltas[order[k]];

  const double* g = sm.values.data();
  PairTotals totals;
  if (component == 0) {
    auto gap = [g](Eigen::Index i, Eigen::Index j) {
      const double a = g[3 * i] - g[3 * j], b = g[3 * i + 1] - g[3 * j + 1], c = g[3 * i + 2] - g[3 * j + 2];
      return std::min(a * a + b * b + c * c, 4.0);
    };
    totals = accumulate(*sm.grid, gap, thresholds, reversed);
  } else {
    const int c = component - 1;
    auto gap = [g, c](Eigen::Index i, Eigen::Index j) {
      const double a = g[3 * i + c] - g[3 * j + c];
      return std::min(a * a, 4.0);
    };
    totals = accumulate(*sm.grid, gap, thresholds, reversed);
  }

  const double n = static_cast<double>(sm.size());
  std::vector<EnergyReport> reports(deltas.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double delta = deltas[order[k]];
    EnergyReport& r = reports[order[k]];
    r.delta = delta;
    r.scaled = scaled;
    r.value = scaled ? std::pow(delta, dim) * totals.sums[k] : totals.sums[k];
    r.estimator = Estimator::PairwiseQuadrature;
    r.samples = sm.size();
    r.pair_fraction = static_cast<double>(totals.counts[k]) / (n * (n - 1.0));
    r.lipschitz_estimate = totals.lipschitz;
    r.under_resolved = delta < 4.0 * sm.grid->max_spacing * totals.lipschitz;
  }
  return reports;
}

SpherePoint uniform_point(SeededStream& stream, int dim) {
  if (dim == 1) return circle_point(2.0 * std::numbers::pi * stream.uniform());
  const double z = 2.0 * stream.uniform() - 1.0;
  const double phi = 2.0 * std::numbers::pi * stream.uniform();
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

}  // namespace

std::string_view to_string(Estimator e) {
  return e == Estimator::PairwiseQuadrature ? "pairwise-quadrature" : "monte-carlo";
}

EnergyReport threshold_energy(const SampledMap& sm, double delta, bool scaled) {
  return energies_impl(sm, std::span(&delta, 1), scaled, 0, false).front();
}

std::vector<EnergyReport> threshold_energies(const SampledMap& sm, std::span<const double> deltas, bool scaled) {
  return energies_impl(sm, deltas, scaled, 0, false);
}

EnergyReport threshold_energy_reversed(const SampledMap& sm, double delta, bool scaled) {
  return energies_impl(sm, std::span(&delta, 1), scaled, 0, true).front();
}

EnergyReport component_threshold_energy(const SampledMap& sm, int component, double delta) {
  if (component < 1 || component > sm.dim() + 1) throw InvalidArgument("component index must lie in 1..d+1");
  return energies_impl(sm, std::span(&delta, 1), true, component, false).front();
}

EnergyReport monte_carlo_energy(const SphereMap& map, double delta, std::int64_t n_samples, std::uint64_t seed,
                                bool scaled) {
  validate_delta(delta);
  if (n_samples < 1000) throw InvalidArgument("Monte Carlo needs at least 1000 samples");
  const int dim = map.dim();
  const double measure = sphere_measure(dim);
  const double prefactor = measure * measure * (scaled ? std::pow(delta, dim) : 1.0);
  const double threshold = delta * delta;

  SeededStream stream(seed, "monte-carlo");
  double mean = 0.0;
  double m2 = 0.0;
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    const SpherePoint x = uniform_point(stream, dim);
    const SpherePoint y = uniform_point(stream, dim);
    double value = 0.0;
    if (std::min((map(x) - map(y)).squaredNorm(), 4.0) > threshold) {
      const double s = (x - y).squaredNorm();
      value = prefactor / (dim == 1 ? s : s * s);
      ++hits;
    }
    const double dv = value - mean;
    mean += dv / static_cast<double>(i + 1);
    m2 += dv * (value - mean);
  }

  EnergyReport r;
  r.delta = delta;
  r.scaled = scaled;
  r.value = mean;
  r.estimator = Estimator::MonteCarlo;
  r.samples = n_samples;
  r.std_error = std::sqrt(m2 / static_cast<double>(n_samples - 1)) / std::sqrt(static_cast<double>(n_samples));
  r.pair_fraction = static_cast<double>(hits) / static_cast<double>(n_samples);
  return r;
}

double dirichlet_energy(const SphereMap& map, const QuadratureGrid& grid, double h) {
  if (map.dim() != grid.dim) throw InvalidArgument("map and grid dimensions differ");
  std::vector<double> terms(static_cast<std::size_t>(grid.size()));
  const auto n_blocks = static_cast<std::size_t>((grid.size() + 255) / 256);
  parallel_for(n_blocks, [&](std::size_t block) {
    const auto begin = static_cast<Eigen::Index>(block * 256);
    const auto end = std::min(grid.size(), begin + 256);
    for (Eigen::Index i = begin; i < end; ++i) {
      terms[static_cast<std::size_t>(i)] = grid.weights[i] * std::pow(gradient_norm(map, grid.point(i), h), grid.dim);
    }
  });
  return pairwise_sum(terms);
}

BBMEstimate bbm_limit_estimate(const SphereMap& map, std::shared_ptr<const QuadratureGrid> grid,
                               std::span<const double> deltas, double h) {
  if (deltas.size() < 2) throw InvalidArgument("BBM extrapolation needs at least two deltas");
  for (std::size_t i = 1; i < deltas.size(); ++i) {
    if (!(deltas[i] < deltas[i - 1])) throw InvalidArgument("deltas must be strictly decreasing");
  }
  BBMEstimate est;
  est.dirichlet = dirichlet_energy(map, *grid, h);
  if (!(est.dirichlet > 0.0)) throw UndefinedRatio("Dirichlet energy vanishes (constant map)");

  const SampledMap sm = sample_map(map, grid);
  const auto reports = threshold_energies(sm, deltas, true);
  est.deltas.assign(deltas.begin(), deltas.end());
  for (const auto& r : reports) {
    est.energies.push_back(r.value);
    est.ratios.push_back(r.value / est.dirichlet);
    est.under_resolved = est.under_resolved || r.under_resolved;
  }

  // Least-squares line r = K + a·δ.
  const auto m = static_cast<double>(deltas.size());
  const double mean_d = std::accumulate(est.deltas.begin(), est.deltas.end(), 0.0) / m;
  const double mean_r = std::accumulate(est.ratios.begin(), est.ratios.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    sxx += (est.deltas[i] - mean_d) * (est.deltas[i] - mean_d);
    sxy += (est.deltas[i] - mean_d) * (est.ratios[i] - mean_r);
  }
  est.slope = sxy / sxx;
  est.k_estimate = mean_r - est.slope * mean_d;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    est.residual = std::max(est.residual, std::abs(est.ratios[i] - (est.k_estimate + est.slope * est.deltas[i])));
  }
  return est;
}

}  // namespace degreelab

// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "degreelab/conjecture_lab.hpp"
#include "degreelab/degree.hpp"
#include "degreelab/errors.hpp"
#include "degreelab/map_zoo.hpp"
#include "degreelab/nonlocal_energy.hpp"
#include "degreelab/proof_machinery.hpp"
#include "degreelab/random.hpp"
#include "test_support.hpp"

using namespace degreelab;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string num(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SpherePoint random_point(SeededStream& s, int dim) {
  SpherePoint p(s.normal(), s.normal(), dim == 2 ? s.normal() : 0.0);
  return p.normalized();
}

SphereMap power_on_sphere(int k) {
  std::vector<Complex> num(static_cast<std::size_t>(k) + 1, 0.0);
  num.back() = 1.0;
  return rational_map(num, {1.0});
}

Outcome degree_exactness() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const SphereGrid circle = make_grid("circle:4096");
  double worst = 0.0;
  for (int k = -10; k <= 10; ++k) {
    const DegreeResult r = winding_number(sample_map(power_map(k), circle.quadrature));
    o.require(r.degree == k, "winding(power " + std::to_string(k) + ") = " + std::to_string(r.degree));
    worst = std::max(worst, r.residual);
  }
  o.require(worst < 1e-10, "winding residual " + num(worst));
  o.note("max winding residual " + num(worst, 3));

  const SphereGrid l3 = make_grid("icosphere:3");
  const DegreeResult id = kronecker_degree(*l3.mesh, sample_map(identity_map(2), l3.quadrature));
  const DegreeResult anti = kronecker_degree(*l3.mesh, sample_map(antipodal_map(2), l3.quadrature));
  o.require(id.degree == 1 && id.residual < 1e-9, "identity degree " + num(id.raw, 17));
  o.require(anti.degree == -1 && anti.residual < 1e-9, "antipodal degree " + num(anti.raw, 17));

  const SphereGrid l5 = make_grid("icosphere:5");
  const SpherePoint target = inverse_stereographic(Complex(0.3, 0.2));
  for (int k : {2, 3}) {
    const SphereMap map = power_on_sphere(k);
    const DegreeResult r = compute_degree(l5, sample_map(map, l5.quadrature));
    const int pre = preimage_count(map, target, 4);
    o.require(r.degree == k && r.residual < 0.01, "z^" + std::to_string(k) + " degree " + num(r.raw));
    o.require(pre == k, "z^" + std::to_string(k) + " preimages " + std::to_string(pre));
  }
  const double t = seconds_since(t0);
  o.require(t < 10.0, "runtime " + num(t, 3) + " s");
  o.note("runtime " + num(t, 3) + " s");
  return o;
}

Outcome energy_oracle() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const SphereGrid grid = make_grid("circle:8192");
  const SampledMap sm = sample_map(identity_map(1), grid.quadrature);
  for (double delta : {0.25, 0.5, 1.0}) {
    const double closed = 4.0 * std::numbers::pi * std::sqrt(1.0 - delta * delta / 4.0);
    const double oracle = support::identity_energy_oracle(1, delta);
    o.require(std::abs(oracle / closed - 1.0) < 1e-9, "oracle disagrees with closed form at " + num(delta));
    const double value = threshold_energy(sm, delta).value;
    const double err = std::abs(value / closed - 1.0);
    o.require(err < 0.005, "delta " + num(delta) + " rel err " + num(err));
    o.note("delta " + num(delta) + ": " + num(value, 8) + " vs " + num(closed, 8));
  }
  const double t = seconds_since(t0);
  o.require(t < 60.0, "runtime " + num(t, 3) + " s");
  return o;
}

Outcome trivial_zeros() {
  Outcome o;
  const SphereGrid sphere = make_grid("icosphere:3");
  const SphereGrid circle = make_grid("circle:1024");
  for (double delta : {0.01, 0.3, 1.0, 1.99}) {
    o.require(threshold_energy(sample_map(constant_map(2), sphere.quadrature), delta).value == 0.0, "constant d=2");
    o.require(threshold_energy(sample_map(constant_map(1), circle.quadrature), delta).value == 0.0, "constant d=1");
  }
  int monotone_checks = 0;
  for (int d : {1, 2}) {
    const SphereGrid& grid = d == 1 ? circle : sphere;
    for (const auto& family : default_families(d)) {
      const SampledMap sm = sample_map(parse_map_spec(family, d), grid.quadrature);
      o.require(threshold_energy(sm, 2.0).value == 0.0, family + " at delta 2");
      double previous = INFINITY;
      for (double delta : log_spaced(0.01, 2.0, 25)) {
        const double v = threshold_energy(sm, delta, false).value;
        o.require(v <= previous, family + " not monotone at " + num(delta));
        previous = v;
        ++monotone_checks;
      }
    }
  }
  o.note(std::to_string(monotone_checks) + " monotonicity checks");
  return o;
}

Outcome bbm_limit() {
  Outcome o;
  const auto circle = make_grid("circle:8192").quadrature;
  const std::vector<double> d1{0.4, 0.2, 0.1, 0.05};
  const BBMEstimate id1 = bbm_limit_estimate(identity_map(1), circle, d1);
  const BBMEstimate p2 = bbm_limit_estimate(power_map(2), circle, d1);
  o.require(std::abs(id1.k_estimate / 2.0 - 1.0) < 0.02, "K(identity, d=1) = " + num(id1.k_estimate));
  o.require(std::abs(p2.k_estimate / id1.k_estimate - 1.0) < 0.05, "K(power 2) = " + num(p2.k_estimate));
  o.note("K1 identity " + num(id1.k_estimate) + ", power2 " + num(p2.k_estimate));

  const auto l6 = make_grid("icosphere:6").quadrature;
  const std::vector<double> d2{0.4, 0.2, 0.1};
  const BBMEstimate id2 = bbm_limit_estimate(identity_map(2), l6, d2);
  const BBMEstimate rot = bbm_limit_estimate(rotated_map(identity_map(2), Eigen::Vector3d(1, 2, 3), 0.8), l6, d2);
  const BBMEstimate z2 = bbm_limit_estimate(power_on_sphere(2), l6, d2);
  o.require(id2.k_estimate > 0.0 && id2.residual < 0.1 * id2.k_estimate, "K2 identity fit " + num(id2.k_estimate));
  o.require(std::abs(rot.k_estimate - id2.k_estimate) < 1e-6, "rotated identity K " + num(rot.k_estimate, 12));
  o.require(std::abs(z2.k_estimate / id2.k_estimate - 1.0) < 0.10, "K(z^2) = " + num(z2.k_estimate));
  o.note("K2 identity " + num(id2.k_estimate) + " (residual " + num(id2.residual, 3) + "), rotated " +
         num(rot.k_estimate) + ", z^2 " + num(z2.k_estimate));
  return o;
}

Outcome ratio_boundedness() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const SphereGrid grid = make_grid("icosphere:6");
  const auto families = default_families(2);
  const auto deltas = parse_delta_grid("log:0.05:1:10");
  const SweepResult r = sweep(families, deltas, grid);
  int bubbles = 0;
  for (const auto& f : families) bubbles += f.starts_with("bubble:") ? 1 : 0;
  o.require(families.size() >= 5 && bubbles >= 3, "family population");
  for (const auto& rec : r.records) {
    o.require(!rec.flag.starts_with("error:"), rec.map_spec + " " + rec.flag);
    o.require(std::isfinite(rec.ratio), rec.map_spec + " ratio not finite at " + num(rec.delta));
  }
  o.require(std::isfinite(r.headline_c) && r.headline_c > 0.0, "headline C " + num(r.headline_c));
  o.note("headline C " + num(r.headline_c) + " (argmax " + [&] {
           std::string arg;
           for (const auto& s : r.summary) {
             if (s.max_ratio == r.headline_c) arg = s.argmax + " at delta " + num(s.delta, 3);
           }
           return arg;
         }() + ")");
  o.note("max/min of empirical C(delta) " + num(r.flatness, 4) + (r.flatness < 10.0 ? " (< 10x)" : " (>= 10x)"));
  o.note("runtime " + num(seconds_since(t0), 3) + " s");
  return o;
}

Outcome lemma1_oracle() {
  Outcome o;
  const Ball ball{1, Eigen::Vector2d(0.5, 0.0), 0.5};
  const Lemma1Report lin = lemma1_check([](const Eigen::Vector2d& x) { return x.x(); }, ball, 1.0, 0.1, 2000);
  const double lhs = support::linear_lhs_oracle();
  const double rhs = support::linear_rhs_oracle(0.1);
  o.require(std::abs(lhs - 1.0 / 3.0) < 1e-9 && std::abs(rhs - 1.33948298) < 1e-7, "oracle check");
  o.require(std::abs(lin.lhs / lhs - 1.0) < 0.01, "lhs " + num(lin.lhs));
  o.require(std::abs(lin.rhs_core / rhs - 1.0) < 0.01, "rhs_core " + num(lin.rhs_core));
  o.note("linear: lhs " + num(lin.lhs) + ", rhs_core " + num(lin.rhs_core) + ", ratio_bound " + num(lin.ratio_bound));

  const std::vector<double> deltas{0.05, 0.1, 0.2};
  std::vector<double> coarse(deltas.size(), 0.0), fine(deltas.size(), 0.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const ScalarField f = random_test_function(TestFunctionKind::PiecewiseLinear, ball,
                                               derive_seed(2024, "lemma1-trial-" + std::to_string(trial)));
    const auto a = lemma1_check(f, ball, 1.0, deltas, 1000);
    const auto b = lemma1_check(f, ball, 1.0, deltas, 2000);
    for (std::size_t k = 0; k < deltas.size(); ++k) {
      coarse[k] = std::max(coarse[k], a[k].ratio_bound);
      fine[k] = std::max(fine[k], b[k].ratio_bound);
    }
  }
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    o.require(std::isfinite(fine[k]) && fine[k] > 0.0, "max ratio_bound not finite");
    o.require(std::abs(coarse[k] / fine[k] - 1.0) < 0.05, "unstable at delta " + num(deltas[k]));
    o.note("delta " + num(deltas[k]) + ": max ratio_bound " + num(coarse[k]) + " (n=1000) / " + num(fine[k]) +
           " (n=2000)");
  }
  return o;
}

Outcome proof_consistency() {
  Outcome o;
  SeededStream rng(7);
  int crossings = 0, checks = 0;
  double max_bound_ratio = 0.0;
  for (int d : {1, 2}) {
    const SphereGrid grid = make_grid(d == 1 ? "circle:4096" : "icosphere:5");
    const RhoField c = rho_field(sample_map(constant_map(d), grid.quadrature), 1e-3);
    for (double r : c.values) o.require(r == 1.0, "constant map rho " + num(r));
    for (const auto& family : default_families(d)) {
      const SampledMap sm = sample_map(parse_map_spec(family, d), grid.quadrature);
      for (int i = 0; i < 100; ++i) {
        const SpherePoint x = random_point(rng, d);
        const RhoResult r = rho_detail(sm, x, 1e-3);
        const CrossingCheck check = crossing_check(sm, x, r, 1e-3);
        ++checks;
        crossings += r.crossed && r.rho < 1.0 ? 1 : 0;
        o.require(check.consistent, family + " crossing norm " + num(check.norm) + " tol " + num(check.tolerance));
      }
      const RhoDegreeBound b = rho_degree_bound(grid, sm, 1e-3);
      o.require(!b.violation, family + " violates the rho bound");
      max_bound_ratio = std::max(max_bound_ratio, b.ratio);
    }
  }
  o.note(std::to_string(checks) + " crossing checks, " + std::to_string(crossings) + " with rho < 1");
  o.note("max |deg| / int rho^-d = " + num(max_bound_ratio));
  return o;
}

Outcome cli_determinism() {
  Outcome o;
  const std::vector<std::vector<std::string>> commands{
      {"degree", "--map", "power:k=3", "--grid", "circle:4096"},
      {"degree", "--map", "bubble:k=2,lambda=50,d=2", "--preimage", "0.1,0.2,-0.9"},
      {"energy", "--map", "power:k=1", "--grid", "circle:8192", "--delta", "0.5"},
      {"energy", "--map", "identity", "--grid", "icosphere:5", "--delta", "log:0.1:1:4", "--unscaled"},
      {"energy", "--map", "bubble:k=1,lambda=10,d=2", "--delta", "0.5", "--mc", "100000"},
      {"sweep", "--families", "default", "--deltas", "log:0.05:1:10", "--d", "2"},
      {"--format", "json", "sweep", "--families", "default", "--deltas", "log:0.05:1:6", "--d", "1"},
      {"search", "--d", "1", "--degree", "1", "--delta", "0.5", "--budget", "200"},
      {"search", "--d", "2", "--degree", "2", "--delta", "0.6", "--budget", "20", "--grid", "icosphere:3"},
      {"probe", "--d", "1", "--delta", "1.75"},
      {"probe", "--d", "2", "--delta", "1.9", "--families", "identity:d=2", "bubble:k=1,lambda=10,d=2"},
      {"limit", "--map", "power:k=2", "--grid", "circle:8192"},
      {"extension", "--map", "bubble:k=1,lambda=5,d=2", "--point", "0.2,0.3,-0.9,0.2"},
      {"rho", "--map", "perturb:base=identity:d=2,amp=0.3,seed=1", "--grid", "icosphere:4"},
      {"rho-bound", "--map", "bubble:k=1,lambda=10,d=2", "--grid", "icosphere:4"},
      {"lemma1", "--trials", "50"},
      {"lemma1", "--d", "2", "--kind", "trig", "--trials", "5", "--n", "30", "--p", "1.5"},
      {"grids", "--grid", "icosphere:3", "--export"},
  };
  for (auto args : commands) {
    args.insert(args.begin(), {"--seed", "11"});
    std::vector<std::string> one{"--threads", "1"}, eight{"--threads", "8"};
    one.insert(one.end(), args.begin(), args.end());
    eight.insert(eight.end(), args.begin(), args.end());
    const auto a = support::run_cli(one);
    const auto b = support::run_cli(eight);
    const auto c = support::run_cli(one);
    std::string name;
    for (const auto& w : args) name += (name.empty() ? "" : " ") + w;
    o.require(a.code == 0, name + " exited " + std::to_string(a.code) + ": " + a.err);
    o.require(a.out == b.out, name + " differs between 1 and 8 threads");
    o.require(a.out == c.out, name + " differs between repeated runs");
  }
  o.note(std::to_string(commands.size()) + " commands x {1, 8, 1} threads");
  return o;
}

Outcome monte_carlo_agreement() {
  Outcome o;
  const std::vector<double> deltas{0.2, 0.5, 1.0};
  double worst = 0.0;
  std::string worst_case;
  int cases = 0;
  for (int d : {1, 2}) {
    const SphereGrid grid = make_grid(d == 1 ? "circle:8192" : "icosphere:6");
    for (const auto& family : default_families(d)) {
      const SphereMap map = parse_map_spec(family, d);
      const auto quad = threshold_energies(sample_map(map, grid.quadrature), deltas);
      for (std::size_t k = 0; k < deltas.size(); ++k) {
        const EnergyReport mc = monte_carlo_energy(map, deltas[k], 1000000, 20240);
        const double gap = std::abs(mc.value - quad[k].value);
        const double z = gap == 0.0 ? 0.0 : gap / mc.std_error;
        ++cases;
        if (z > worst) {
          worst = z;
          worst_case = family + " at " + num(deltas[k]);
        }
        o.require(gap <= 3.0 * mc.std_error, family + " delta " + num(deltas[k]) + ": quad " + num(quad[k].value) +
                                                  " mc " + num(mc.value) + " +- " + num(mc.std_error) +
                                                  (quad[k].under_resolved ? " (quadrature under-resolved)" : ""));
      }
    }
  }
  o.note(std::to_string(cases) + " cases, worst |MC - Q| / stderr = " + num(worst, 3) + " (" + worst_case + ")");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"degree exactness", degree_exactness},
      {"energy oracle", energy_oracle},
      {"trivial zeros and monotonicity", trivial_zeros},
      {"small-delta limit constant", bbm_limit},
      {"empirical boundedness of |deg|/E_delta, d=2", ratio_boundedness},
      {"mean-oscillation lemma oracle", lemma1_oracle},
      {"stopping-radius consistency", proof_consistency},
      {"CLI determinism", cli_determinism},
      {"Monte Carlo agreement", monte_carlo_agreement},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << i + 1 << ": " << criteria[i].first << " ["
              << num(seconds_since(t0), 3) << " s]  " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}

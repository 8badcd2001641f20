#include "degreelab/conjecture_lab.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "degreelab/degree.hpp"
#include "degreelab/errors.hpp"
#include "degreelab/nonlocal_energy.hpp"
#include "degreelab/random.hpp"

namespace degreelab {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 2.0)) throw InvalidArgument("delta must lie in (0, 2)");
}

void add_flag(std::string& flags, std::string_view flag) {
  if (flags == "ok") flags.clear();
  if (!flags.empty()) flags += '|';
  flags += flag;
}

// Fills ratio and flags of a record whose degree and energy are set.
void finish_record(SweepRecord& r, bool under_resolved, bool suspect) {
  r.flag = "ok";
  if (r.energy_scaled > 0.0) {
    r.ratio = std::abs(r.degree) / r.energy_scaled;
  } else if (r.degree == 0) {
    r.ratio = 0.0;
    add_flag(r.flag, "degenerate");
  } else {
    r.ratio = std::numeric_limits<double>::infinity();
    add_flag(r.flag, "violation-witness");
  }
  if (under_resolved) add_flag(r.flag, "under-resolved");
  if (suspect) add_flag(r.flag, "suspect-degree");
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw InvalidArgument("invalid number '" + std::string(text) + "' in delta grid");
  }
  return value;
}

}  // namespace

double ell_constant(int d) {
  if (d < 1) throw InvalidArgument("dimension must be positive");
  return std::sqrt(2.0 + 2.0 / (d + 1));
}

SweepRecord ratio(const SphereMap& map, const SphereGrid& grid, double delta) {
  check_delta(delta);
  const auto start = Clock::now();
  const SampledMap sm = sample_map(map, grid.quadrature);
  const DegreeResult degree = compute_degree(grid, sm);
  const EnergyReport energy = threshold_energy(sm, delta, true);

  SweepRecord r;
  r.map_spec = map.spec();
  r.dim = map.dim();
  r.n = sm.size();
  r.delta = delta;
  r.degree = degree.degree;
  r.degree_residual = degree.residual;
  r.energy_scaled = energy.value;
  finish_record(r, energy.under_resolved, degree.suspect());
  r.runtime_ms = elapsed_ms(start);
  return r;
}

std::vector<std::string> default_families(int d) {
  if (d == 1) {
    return {"identity:d=1",
            "constant:d=1",
            "antipodal:d=1",
            "power:k=2",
            "power:k=3",
            "power:k=-2",
            "bubble:k=1,lambda=1,d=1",
            "bubble:k=1,lambda=10,d=1",
            "bubble:k=1,lambda=100,d=1",
            "multibubble:d=1,sign=1,lambdas=5;5,centers=0;3.14159",
            "perturb:base=power:k=1,amp=0.3,seed=1"};
  }
  if (d == 2) {
    return {"identity:d=2",
            "constant:d=2",
            "antipodal:d=2",
            "rational:num=0,0,1;den=1",
            "rational:num=0,0,0,1;den=1",
            "bubble:k=1,lambda=1,d=2",
            "bubble:k=1,lambda=10,d=2",
            "bubble:k=1,lambda=100,d=2",
            "multibubble:d=2,sign=1,lambdas=5;5,centers=1;-1",
            "perturb:base=identity:d=2,amp=0.3,seed=1"};
  }
  throw InvalidArgument("default families exist for d = 1 and d = 2");
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi >= lo) || n < 1) throw InvalidArgument("log grid needs 0 < lo <= hi and n >= 1");
  if (n == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(n));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> parse_delta_grid(std::string_view text) {
  std::vector<std::string_view> parts;
  auto split_on = [&](char sep) {
    parts.clear();
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
      if (i == text.size() || text[i] == sep) {
        parts.push_back(text.substr(start, i - start));
        start = i + 1;
      }
    }
  };
  std::vector<double> out;
  if (text.starts_with("log:") || text.starts_with("lin:")) {
    split_on(':');
    if (parts.size() != 4) throw InvalidArgument("delta grid must be log:lo:hi:n or lin:lo:hi:n");
    const double lo = parse_double(parts[1]);
    const double hi = parse_double(parts[2]);
    const double n = parse_double(parts[3]);
    if (n < 1 || n != std::floor(n) || n > 10000) throw InvalidArgument("delta grid size must be an integer in [1, 10000]");
    if (parts[0] == "log") {
      out = log_spaced(lo, hi, static_cast<int>(n));
    } else {
      if (!(hi >= lo)) throw InvalidArgument("linear grid needs lo <= hi");
      for (int i = 0; i < n; ++i) out.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    }
  } else {
    split_on(',');
    for (auto p : parts) out.push_back(parse_double(p));
  }
  if (out.empty()) throw InvalidArgument("empty delta grid");
  for (double d : out) check_delta(d);
  return out;
}

SweepResult sweep(const std::vector<std::string>& families, std::span<const double> deltas, const SphereGrid& grid) {
  if (families.empty()) throw InvalidArgument("empty family list");
  if (deltas.empty()) throw InvalidArgument("empty delta grid");
  for (double d : deltas) check_delta(d);

  SweepResult result;
  for (const auto& family : families) {
    const auto start = Clock::now();
    std::vector<SweepRecord> rows(deltas.size());
    try {
      const SphereMap map = parse_map_spec(family, grid.dim());
      if (map.dim() != grid.dim()) throw InvalidArgument("map dimension does not match the grid");
      const SampledMap sm = sample_map(map, grid.quadrature);
      const DegreeResult degree = compute_degree(grid, sm);
      const auto energies = threshold_energies(sm, deltas, true);
      const double per_row_ms = elapsed_ms(start) / static_cast<double>(deltas.size());
      for (std::size_t k = 0; k < deltas.size(); ++k) {
        SweepRecord& r = rows[k];
        r.map_spec = map.spec();
        r.dim = map.dim();
        r.n = sm.size();
        r.delta = deltas[k];
        r.degree = degree.degree;
        r.degree_residual = degree.residual;
        r.energy_scaled = energies[k].value;
        finish_record(r, energies[k].under_resolved, degree.suspect());
        r.runtime_ms = per_row_ms;
      }
    } catch (const std::exception& e) {
      for (std::size_t k = 0; k < deltas.size(); ++k) {
        SweepRecord& r = rows[k];
        r = SweepRecord{};
        r.map_spec = family;
        r.dim = grid.dim();
        r.n = grid.quadrature->size();
        r.delta = deltas[k];
        r.ratio = std::numeric_limits<double>::quiet_NaN();
        r.flag = std::string("error:") + e.what();
      }
    }
    result.records.insert(result.records.end(), rows.begin(), rows.end());
  }

  const std::size_t nd = deltas.size();
  result.summary.resize(nd);
  for (std::size_t k = 0; k < nd; ++k) {
    DeltaSummary& s = result.summary[k];
    s.delta = deltas[k];
    for (std::size_t f = 0; f < families.size(); ++f) {
      const SweepRecord& r = result.records[f * nd + k];
      if (r.flag.starts_with("error:")) continue;
      if (s.argmax.empty() || r.ratio > s.max_ratio) {
        s.max_ratio = r.ratio;
        s.argmax = r.map_spec;
      }
    }
  }
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& s : result.summary) {
    result.headline_c = std::max(result.headline_c, s.max_ratio);
    if (s.max_ratio > 0.0) lo = std::min(lo, s.max_ratio);
  }
  result.flatness = std::isfinite(lo) ? result.headline_c / lo : 0.0;
  return result;
}

namespace {

// Search state: one unit-charge bubble per |degree| plus a perturbation.
struct Candidate {
  std::vector<double> log_lambdas;
  std::vector<Complex> centers;
  double amplitude = 0.0;
  std::uint64_t perturb_seed = 1;
};

constexpr double kMaxLogLambda = 6.907755278982137;  // log(1000)
constexpr double kMaxAmplitude = 0.5;

SphereMap build_candidate(int d, int sign, const Candidate& c) {
  std::vector<double> lambdas;
  for (double l : c.log_lambdas) lambdas.push_back(std::exp(l));
  SphereMap map = multibubble_map(d, sign, lambdas, c.centers);
  if (c.amplitude > 0.0) map = perturb_map(map, c.amplitude, c.perturb_seed);
  return map;
}

Candidate propose(int d, const Candidate& c, SeededStream& rng) {
  Candidate next = c;
  const std::size_t k = c.centers.size();
  const double move = rng.uniform();
  if (move < 0.4) {
    auto& l = next.log_lambdas[rng.next_u64() % k];
    l = std::clamp(l + 0.5 * rng.normal(), 0.0, kMaxLogLambda);
  } else if (move < 0.7) {
    auto& center = next.centers[rng.next_u64() % k];
    if (d == 1) {
      center = std::remainder(center.real() + 0.5 * rng.normal(), 2.0 * std::numbers::pi);
    } else {
      center += Complex(0.3 * rng.normal(), 0.3 * rng.normal());
    }
  } else if (move < 0.9) {
    next.amplitude = std::clamp(c.amplitude + 0.05 * rng.normal(), 0.0, kMaxAmplitude);
  } else {
    next.perturb_seed = rng.next_u64() % 1000000;
  }
  return next;
}

}  // namespace

SearchResult extremal_search(int d, int target_degree, double delta, int budget, std::uint64_t seed,
                             std::string_view grid_spec) {
  if (d != 1 && d != 2) throw InvalidArgument("search supports d = 1 and d = 2");
  if (target_degree == 0 || std::abs(target_degree) > 8) throw InvalidArgument("target degree must be in [-8, 8] and nonzero");
  check_delta(delta);
  if (budget < 1 || budget > 100000) throw InvalidArgument("budget must lie in [1, 1e5]");

  const std::string spec = grid_spec.empty() ? (d == 1 ? "circle:1024" : "icosphere:4") : std::string(grid_spec);
  const SphereGrid grid = make_grid(spec);
  if (grid.dim() != d) throw InvalidArgument("grid dimension does not match d");
  std::string refined_spec;
  if (spec.starts_with("circle:")) {
    refined_spec = "circle:" + std::to_string(4 * grid.quadrature->size());
  } else if (spec.starts_with("icosphere:")) {
    refined_spec = "icosphere:" + std::to_string(std::stoi(spec.substr(10)) + 1);
  } else {
    refined_spec = "fibonacci:" + std::to_string(4 * grid.quadrature->size());
  }
  std::optional<SphereGrid> refined;

  const int sign = target_degree > 0 ? 1 : -1;
  const int k = std::abs(target_degree);
  Candidate current;
  for (int i = 0; i < k; ++i) {
    current.log_lambdas.push_back(0.0);
    if (d == 1) {
      current.centers.emplace_back(std::remainder(2.0 * std::numbers::pi * i / k, 2.0 * std::numbers::pi), 0.0);
    } else {
      current.centers.push_back(k == 1 ? Complex(0.0) : std::polar(1.0, 2.0 * std::numbers::pi * i / k));
    }
  }

  SearchResult out;
  SeededStream rng(seed, "extremal-search");
  const SphereMap seed_map = build_candidate(d, sign, current);
  out.seed = ratio(seed_map, grid, delta);
  out.seed.runtime_ms = 0.0;
  out.evaluations = 1;
  out.best = out.seed;
  out.best_spec = seed_map.spec();
  double current_score = std::log(out.seed.ratio);

  constexpr double kT0 = 0.1;
  constexpr double kT1 = 1e-3;
  for (int step = 1; step < budget; ++step) {
    const double temperature = kT0 * std::pow(kT1 / kT0, static_cast<double>(step) / budget);
    const Candidate proposal = propose(d, current, rng);
    const double u = rng.uniform();
    ++out.evaluations;

    std::string reason;
    SweepRecord record;
    std::string map_spec;
    try {
      const SphereMap map = build_candidate(d, sign, proposal);
      map_spec = map.spec();
      record = ratio(map, grid, delta);
      record.runtime_ms = 0.0;
      if (record.degree != target_degree) {
        reason = "degree drift: " + std::to_string(record.degree);
      } else if (record.flag.find("under-resolved") != std::string::npos) {
        reason = "under-resolved energy";
      } else if (!(std::isfinite(record.ratio) && record.ratio > 0.0)) {
        reason = "non-finite ratio";
      }
    } catch (const std::exception& e) {
      reason = e.what();
    }
    if (reason.empty() && record.ratio > out.best.ratio) {
      if (!refined) refined = make_grid(refined_spec);
      try {
        const DegreeResult check = compute_degree(*refined, sample_map(build_candidate(d, sign, proposal), refined->quadrature));
        if (check.degree != target_degree) reason = "degree drift on " + refined_spec + ": " + std::to_string(check.degree);
      } catch (const std::exception& e) {
        reason = std::string("refined check failed: ") + e.what();
      }
    }
    if (!reason.empty()) {
      ++out.rejected;
      out.log.push_back("step " + std::to_string(step) + " rejected " + (map_spec.empty() ? "candidate" : map_spec) +
                        ": " + reason);
      continue;
    }

    const double score = std::log(record.ratio);
    if (score >= current_score || u < std::exp((score - current_score) / temperature)) {
      current = proposal;
      current_score = score;
      ++out.accepted;
      if (record.ratio > out.best.ratio) {
        out.best = record;
        out.best_spec = map_spec;
      }
    }
  }
  return out;
}

ProbeReport failure_probe(int d, double delta, std::vector<std::string> families, const SphereGrid& grid) {
  if (d != grid.dim()) throw InvalidArgument("grid dimension does not match d");
  const double ell = ell_constant(d);
  check_delta(delta);
  if (delta < ell) throw InvalidArgument("failure probe needs delta >= ell_d = " + format_real(ell));
  if (families.empty()) {
    for (const char* lambda : {"1", "10", "100"}) {
      families.push_back(std::string("bubble:k=1,lambda=") + lambda + ",d=" + std::to_string(d));
    }
  }

  ProbeReport report;
  report.dim = d;
  report.delta = delta;
  report.ell = ell;
  for (const auto& family : families) {
    const SphereMap map = parse_map_spec(family, d);
    if (map.dim() != d) throw InvalidArgument("map dimension does not match d");
    SweepRecord r = ratio(map, grid, delta);
    report.energy_unscaled.push_back(r.energy_scaled / std::pow(delta, d));
    report.rows.push_back(std::move(r));
  }
  report.ratio_increasing = report.rows.size() >= 2;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    report.ratio_increasing = report.ratio_increasing && report.rows[i].ratio > report.rows[i - 1].ratio;
  }
  return report;
}

}  // namespace degreelab

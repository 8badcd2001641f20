#include "degreelab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "degreelab/conjecture_lab.hpp"
#include "degreelab/degree.hpp"
#include "degreelab/errors.hpp"
#include "degreelab/map_zoo.hpp"
#include "degreelab/nonlocal_energy.hpp"
#include "degreelab/parallel.hpp"
#include "degreelab/proof_machinery.hpp"
#include "degreelab/random.hpp"
#include "degreelab/sphere_geometry.hpp"

#ifndef DEGREELAB_BUILD_ID
#define DEGREELAB_BUILD_ID "unknown"
#endif

namespace degreelab::cli {

std::string_view build_id() { return DEGREELAB_BUILD_ID; }

namespace {

using nlohmann::json;
using Cell = std::variant<std::monostate, std::string, double, std::int64_t, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Output {
  Table table;
  std::vector<std::string> notes;  // extra provenance lines, `key=value`
  json extra = json::object();     // JSON-only summary fields
  std::optional<std::string> raw;  // verbatim body (grid export)
};

struct Globals {
  int threads = 0;
  std::string output;
  std::string format = "csv";
  bool timing = false;
  std::uint64_t seed = 0;
};

std::string csv_cell(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "";
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string quoted = "\"";
          for (char c : v) {
            if (c == '"') quoted += '"';
            quoted += c;
          }
          return quoted + "\"";
        } else if constexpr (std::is_same_v<T, double>) {
          return format_real(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else {
          return std::to_string(v);
        }
      },
      cell);
}

json json_cell(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, double>) {
          return std::isfinite(v) ? json(v) : json(nullptr);
        } else {
          return v;
        }
      },
      cell);
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Shell-safe rendering of one echoed argument.
std::string shell_word(const std::string& word) {
  const bool plain = !word.empty() && std::all_of(word.begin(), word.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || std::string_view("._:=,+-/").find(c) != std::string_view::npos;
  });
  if (plain) return word;
  std::string quoted = "'";
  for (char c : word) quoted += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return quoted + "'";
}

// Canonical command line: subcommand, then every option in definition order
// with its given or default value. Threads and output path are left out.
std::string echo_command(const CLI::App& sub, const Globals& g) {
  std::string echo(sub.get_name());
  for (const CLI::Option* opt : sub.get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty() || names.front() == "help") continue;
    const std::string flag = "--" + names.front();
    if (opt->get_type_size() == 0) {
      if (opt->count() > 0) echo += " " + flag;
      continue;
    }
    if (opt->count() > 0) {
      echo += " " + flag;
      for (const auto& r : opt->results()) echo += " " + shell_word(r);
    } else if (!opt->get_default_str().empty()) {
      echo += " " + flag + " " + shell_word(opt->get_default_str());
    }
  }
  echo += " --seed " + std::to_string(g.seed) + " --format " + g.format;
  if (g.timing) echo += " --timing";
  return echo;
}

void write_output(std::ostream& out, const Output& o, const std::string& command, const Globals& g) {
  if (o.raw) {
    out << "# degreelab " << kVersion << "\n# build " << build_id() << "\n# command " << command << "\n";
    for (const auto& n : o.notes) out << "# " << n << "\n";
    out << *o.raw;
    return;
  }
  if (g.format == "json") {
    json doc;
    doc["provenance"] = {{"version", kVersion}, {"build", build_id()}, {"command", command}};
    for (const auto& n : o.notes) {
      const auto eq = n.find('=');
      doc["provenance"][n.substr(0, eq)] = eq == std::string::npos ? "" : n.substr(eq + 1);
    }
    json rows = json::array();
    for (const auto& row : o.table.rows) {
      json r = json::object();
      for (std::size_t c = 0; c < row.size(); ++c) r[o.table.columns[c]] = json_cell(row[c]);
      rows.push_back(std::move(r));
    }
    doc["records"] = std::move(rows);
    for (const auto& [key, value] : o.extra.items()) doc[key] = value;
    out << doc.dump(2) << "\n";
    return;
  }
  out << "# degreelab " << kVersion << "\n# build " << build_id() << "\n# command " << command << "\n";
  for (const auto& n : o.notes) out << "# " << n << "\n";
  for (std::size_t c = 0; c < o.table.columns.size(); ++c) out << (c ? "," : "") << o.table.columns[c];
  out << "\n";
  for (const auto& row : o.table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_cell(row[c]);
    out << "\n";
  }
}

std::string default_grid_spec(int d) { return d == 1 ? "circle:4096" : "icosphere:5"; }

// Map and grid from --map / --grid; the grid fixes the map's default dimension.
std::pair<SphereMap, SphereGrid> map_and_grid(const std::string& map_spec, const std::string& grid_spec) {
  if (!grid_spec.empty()) {
    SphereGrid grid = make_grid(grid_spec);
    SphereMap map = parse_map_spec(map_spec, grid.dim());
    if (map.dim() != grid.dim()) throw InvalidArgument("map and grid dimensions differ");
    return {std::move(map), std::move(grid)};
  }
  SphereMap map = parse_map_spec(map_spec, 2);
  return {map, make_grid(default_grid_spec(map.dim()))};
}

std::vector<double> parse_components(const std::string& text, std::size_t min_count, std::size_t max_count,
                                     std::string_view what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument("invalid " + std::string(what) + " component '" + item + "'");
    }
  }
  if (out.size() < min_count || out.size() > max_count) throw InvalidArgument("wrong number of " + std::string(what) + " components");
  return out;
}

SpherePoint parse_sphere_point(const std::string& text, int dim) {
  const auto c = parse_components(text, 2, 3, "point");
  SpherePoint p(c[0], c[1], c.size() == 3 ? c[2] : 0.0);
  if (dim == 1) p.z() = 0.0;
  if (p.norm() == 0.0) throw InvalidArgument("point must be nonzero");
  return p.normalized();
}

double ms_since(std::chrono::steady_clock::time_point t0, const Globals& g) {
  if (!g.timing) return 0.0;
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Cell> sweep_cells(const SweepRecord& r, const Globals& g) {
  return {r.map_spec, std::int64_t{r.dim}, r.n, r.delta, std::int64_t{r.degree}, r.degree_residual, r.energy_scaled,
          r.ratio, g.timing ? r.runtime_ms : 0.0, r.flag};
}

const std::vector<std::string> kSweepColumns{"map",           "d",     "n",          "delta", "degree", "degree_residual",
                                              "energy_scaled", "ratio", "runtime_ms", "flag"};

std::vector<std::string> expand_families(const std::vector<std::string>& given, int d) {
  std::vector<std::string> out;
  for (const auto& f : given) {
    if (f == "default") {
      for (auto& s : default_families(d)) out.push_back(std::move(s));
    } else {
      out.push_back(f);
    }
  }
  return out;
}

struct Subcommand {
  CLI::App* app = nullptr;
  std::function<Output()> handler;
};

int exit_code_for(const std::exception_ptr& e, std::ostream& err) {
  try {
    std::rethrow_exception(e);
  } catch (const InvalidArgument& ex) {
    err << "error: " << ex.what() << "\n";
    return 2;
  } catch (const ResolutionInsufficient& ex) {
    err << "error: resolution insufficient: " << ex.what() << "\n";
    return 3;
  } catch (const ResourceLimit& ex) {
    err << "error: resource limit: " << ex.what() << "\n";
    return 4;
  } catch (const NotRegularValue& ex) {
    err << "error: not a regular value: " << ex.what() << "\n";
    return 2;
  } catch (const UndefinedRatio& ex) {
    err << "error: undefined ratio: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical lab for the degree and threshold nonlocal energy of sphere maps", "degreelab"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--threads", g.threads, "Worker cap (default: DEGREELAB_THREADS or hardware)")->check(CLI::Range(1, 1024));
  app.add_option("-o,--output", g.output, "Write results to this file instead of stdout");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--timing", g.timing, "Report wall-clock runtimes (otherwise runtime_ms is 0)");
  app.add_option("--seed", g.seed, "Root seed for every random stream");

  std::vector<Subcommand> subs;
  auto add = [&](const char* name, const char* description) -> CLI::App* {
    CLI::App* sub = app.add_subcommand(name, description);
    subs.push_back({sub, {}});
    return sub;
  };

  // degree
  std::string degree_map, degree_grid, degree_target;
  int degree_resolution = 0;
  {
    CLI::App* sub = add("degree", "Topological degree of a map");
    sub->add_option("--map", degree_map, "Map spec")->required();
    sub->add_option("--grid", degree_grid, "Grid spec (default circle:4096 or icosphere:5)");
    sub->add_option("--preimage", degree_target, "Count signed preimages of the target x,y[,z] instead");
    sub->add_option("--resolution", degree_resolution, "Preimage scan: samples (d=1) or icosphere level (d=2)");
    subs.back().handler = [&]() {
      Output o;
      o.table.columns = {"map", "d", "n", "method", "degree", "raw", "residual", "flag"};
      if (!degree_target.empty()) {
        const SphereMap map = parse_map_spec(degree_map, degree_grid.empty() ? 2 : make_grid(degree_grid).dim());
        const int resolution = degree_resolution > 0 ? degree_resolution : (map.dim() == 1 ? 4096 : 5);
        const int count = preimage_count(map, parse_sphere_point(degree_target, map.dim()), resolution);
        o.table.rows.push_back({map.spec(), std::int64_t{map.dim()}, std::int64_t{resolution}, std::string("preimage"),
                                std::int64_t{count}, static_cast<double>(count), 0.0, std::string("ok")});
        return o;
      }
      const auto [map, grid] = map_and_grid(degree_map, degree_grid);
      const DegreeResult r = compute_degree(grid, sample_map(map, grid.quadrature));
      o.table.rows.push_back({map.spec(), std::int64_t{map.dim()}, std::int64_t{grid.quadrature->size()},
                              std::string(map.dim() == 1 ? "winding" : "kronecker"), std::int64_t{r.degree}, r.raw,
                              r.residual, std::string(r.suspect() ? "suspect-degree" : "ok")});
      return o;
    };
  }

  // energy
  std::string energy_map, energy_grid, energy_delta, energy_mc;
  bool energy_unscaled = false;
  {
    CLI::App* sub = add("energy", "Threshold nonlocal energy");
    sub->add_option("--map", energy_map, "Map spec")->required();
    sub->add_option("--grid", energy_grid, "Grid spec");
    sub->add_option("--delta", energy_delta, "Threshold, or a delta grid (log:lo:hi:n, lin:lo:hi:n, a,b,c)")->required();
    sub->add_flag("--unscaled", energy_unscaled, "Drop the delta^d factor");
    sub->add_option("--mc", energy_mc, "Monte Carlo estimator with n[,seed] sample pairs");
    subs.back().handler = [&]() {
      Output o;
      o.table.columns = {"map", "d", "n", "delta", "scaled", "estimator", "value", "stderr", "pair_fraction", "runtime_ms"};
      const std::vector<double> deltas = parse_delta_grid(energy_delta);
      const bool scaled = !energy_unscaled;
      auto add_row = [&](const SphereMap& map, const EnergyReport& r, double ms) {
        o.table.rows.push_back({map.spec(), std::int64_t{map.dim()}, r.samples, r.delta, scaled,
                                std::string(to_string(r.estimator)), r.value, r.std_error, r.pair_fraction, ms});
        if (r.under_resolved) {
          err << "warning: delta " << format_real(r.delta) << " is below the resolution floor of this grid\n";
        }
      };
      if (!energy_mc.empty()) {
        const auto parts = parse_components(energy_mc, 1, 2, "--mc");
        if (parts[0] != std::floor(parts[0])) throw InvalidArgument("--mc sample count must be an integer");
        const std::uint64_t seed = parts.size() == 2 ? static_cast<std::uint64_t>(parts[1]) : g.seed;
        const SphereMap map = energy_grid.empty() ? parse_map_spec(energy_map, 2)
                                                  : parse_map_spec(energy_map, make_grid(energy_grid).dim());
        for (double delta : deltas) {
          const auto t0 = std::chrono::steady_clock::now();
          const EnergyReport r = monte_carlo_energy(map, delta, static_cast<std::int64_t>(parts[0]), seed, scaled);
          add_row(map, r, ms_since(t0, g));
        }
        return o;
      }
      const auto [map, grid] = map_and_grid(energy_map, energy_grid);
      const auto t0 = std::chrono::steady_clock::now();
      const SampledMap sm = sample_map(map, grid.quadrature);
      const auto reports = threshold_energies(sm, deltas, scaled);
      const double ms = ms_since(t0, g) / static_cast<double>(deltas.size());
      for (const auto& r : reports) add_row(map, r, ms);
      return o;
    };
  }

  // sweep
  std::vector<std::string> sweep_families{"default"};
  std::string sweep_deltas = "log:0.05:1:10", sweep_grid;
  int sweep_d = 2;
  {
    CLI::App* sub = add("sweep", "Ratio |deg|/E_delta over a family list and a delta grid");
    sub->add_option("--families", sweep_families, "Map specs, or `default` for the zoo population");
    sub->add_option("--deltas", sweep_deltas, "Delta grid")->capture_default_str();
    sub->add_option("--d", sweep_d, "Dimension")->check(CLI::IsMember({1, 2}))->capture_default_str();
    sub->add_option("--grid", sweep_grid, "Grid spec (default circle:4096 or icosphere:6)");
    subs.back().handler = [&]() {
      const SphereGrid grid = make_grid(sweep_grid.empty() ? (sweep_d == 1 ? "circle:4096" : "icosphere:6") : sweep_grid);
      if (grid.dim() != sweep_d) throw InvalidArgument("grid dimension does not match --d");
      const std::vector<double> deltas = parse_delta_grid(sweep_deltas);
      const SweepResult result = sweep(expand_families(sweep_families, sweep_d), deltas, grid);
      Output o;
      o.table.columns = kSweepColumns;
      for (const auto& r : result.records) o.table.rows.push_back(sweep_cells(r, g));
      json per_delta = json::array();
      for (const auto& s : result.summary) {
        o.table.rows.push_back({s.argmax, std::int64_t{sweep_d}, std::int64_t{grid.quadrature->size()}, s.delta, {}, {}, {},
                                s.max_ratio, 0.0, std::string("summary")});
        per_delta.push_back({{"delta", s.delta}, {"C", finite_or_null(s.max_ratio)}, {"argmax", s.argmax}});
      }
      o.notes.push_back("headline_C=" + format_real(result.headline_c));
      o.notes.push_back("flatness=" + format_real(result.flatness));
      o.extra["empirical_C_per_delta"] = std::move(per_delta);
      o.extra["headline_C"] = finite_or_null(result.headline_c);
      o.extra["flatness"] = finite_or_null(result.flatness);
      return o;
    };
  }

  // search
  int search_d = 1, search_degree = 1, search_budget = 1000;
  double search_delta = 0.5;
  std::string search_grid;
  {
    CLI::App* sub = add("search", "Simulated-annealing search for maps with a large ratio");
    sub->add_option("--d", search_d, "Dimension")->check(CLI::IsMember({1, 2}))->capture_default_str();
    sub->add_option("--degree", search_degree, "Target degree")->capture_default_str();
    sub->add_option("--delta", search_delta, "Threshold")->capture_default_str();
    sub->add_option("--budget", search_budget, "Evaluations, including the seed map")->capture_default_str();
    sub->add_option("--grid", search_grid, "Grid spec (default circle:1024 or icosphere:4)");
    subs.back().handler = [&]() {
      const SearchResult r = extremal_search(search_d, search_degree, search_delta, search_budget, g.seed, search_grid);
      Output o;
      o.table.columns = {"role"};
      o.table.columns.insert(o.table.columns.end(), kSweepColumns.begin(), kSweepColumns.end());
      for (const auto& [role, rec] : {std::pair{"seed", &r.seed}, std::pair{"best", &r.best}}) {
        std::vector<Cell> row{std::string(role)};
        for (auto& c : sweep_cells(*rec, g)) row.push_back(std::move(c));
        o.table.rows.push_back(std::move(row));
      }
      o.notes.push_back("evaluations=" + std::to_string(r.evaluations));
      o.notes.push_back("accepted=" + std::to_string(r.accepted));
      o.notes.push_back("rejected=" + std::to_string(r.rejected));
      for (const auto& line : r.log) err << line << "\n";
      o.extra["best_spec"] = r.best_spec;
      o.extra["rejections"] = r.log;
      return o;
    };
  }

  // probe
  int probe_d = 2;
  double probe_delta = 0.0;
  std::vector<std::string> probe_families;
  std::string probe_grid;
  {
    CLI::App* sub = add("probe", "Degree, energy and ratio in the regime delta >= ell_d");
    sub->add_option("--d", probe_d, "Dimension")->check(CLI::IsMember({1, 2}))->capture_default_str();
    sub->add_option("--delta", probe_delta, "Threshold in [ell_d, 2)")->required();
    sub->add_option("--families", probe_families, "Map specs (default bubble k=1 with lambda 1, 10, 100)");
    sub->add_option("--grid", probe_grid, "Grid spec (default circle:4096 or icosphere:5)");
    subs.back().handler = [&]() {
      const SphereGrid grid = make_grid(probe_grid.empty() ? default_grid_spec(probe_d) : probe_grid);
      const ProbeReport report = failure_probe(probe_d, probe_delta, probe_families, grid);
      Output o;
      o.table.columns = {"map", "d", "n", "delta", "lambda", "degree", "energy_unscaled", "energy_scaled", "ratio", "flag"};
      for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const SweepRecord& r = report.rows[i];
        Cell lambda;
        const auto pos = r.map_spec.find("lambda=");
        if (pos != std::string::npos) {
          const auto end = r.map_spec.find(',', pos);
          lambda = std::stod(r.map_spec.substr(pos + 7, end == std::string::npos ? std::string::npos : end - pos - 7));
        }
        o.table.rows.push_back({r.map_spec, std::int64_t{r.dim}, r.n, r.delta, lambda, std::int64_t{r.degree},
                                report.energy_unscaled[i], r.energy_scaled, r.ratio, r.flag});
      }
      o.notes.push_back("ell=" + format_real(report.ell));
      o.notes.push_back(std::string("ratio_increasing=") + (report.ratio_increasing ? "true" : "false"));
      o.extra["ell"] = report.ell;
      o.extra["ratio_increasing"] = report.ratio_increasing;
      return o;
    };
  }

  // limit
  std::string limit_map, limit_grid, limit_deltas = "0.4,0.2,0.1,0.05";
  double limit_h = 1e-4;
  {
    CLI::App* sub = add("limit", "Small-delta limit of E_delta over the Dirichlet energy");
    sub->add_option("--map", limit_map, "Map spec")->required();
    sub->add_option("--grid", limit_grid, "Grid spec");
    sub->add_option("--deltas", limit_deltas, "Strictly decreasing delta list")->capture_default_str();
    sub->add_option("--fd-step", limit_h, "Finite-difference step")->capture_default_str();
    subs.back().handler = [&]() {
      const auto [map, grid] = map_and_grid(limit_map, limit_grid);
      const std::vector<double> deltas = parse_delta_grid(limit_deltas);
      const BBMEstimate est = bbm_limit_estimate(map, grid.quadrature, deltas, limit_h);
      Output o;
      o.table.columns = {"map", "d", "n", "delta", "energy_scaled", "dirichlet", "ratio", "k_estimate", "slope", "residual"};
      for (std::size_t i = 0; i < est.deltas.size(); ++i) {
        o.table.rows.push_back({map.spec(), std::int64_t{map.dim()}, std::int64_t{grid.quadrature->size()}, est.deltas[i],
                                est.energies[i], est.dirichlet, est.ratios[i], est.k_estimate, est.slope, est.residual});
      }
      if (est.under_resolved) err << "warning: some deltas are below the resolution floor of this grid\n";
      o.notes.push_back("k_estimate=" + format_real(est.k_estimate));
      o.extra["k_estimate"] = est.k_estimate;
      return o;
    };
  }

  // extension
  std::string ext_map, ext_grid, ext_point;
  {
    CLI::App* sub = add("extension", "Average extension u(X) into the unit ball");
    sub->add_option("--map", ext_map, "Map spec")->required();
    sub->add_option("--grid", ext_grid, "Grid spec");
    sub->add_option("--point", ext_point, "X as x,y,z, or a direction and depth as x,y,z,t (X = (1-t) x/|x|)")->required();
    subs.back().handler = [&]() {
      const auto [map, grid] = map_and_grid(ext_map, ext_grid);
      const auto c = parse_components(ext_point, 3, 4, "point");
      Eigen::Vector3d X(c[0], c[1], c[2]);
      if (c.size() == 4) {
        if (X.norm() == 0.0) throw InvalidArgument("direction must be nonzero");
        if (!(c[3] > 0.0 && c[3] <= 1.0)) throw InvalidArgument("t must lie in (0, 1]");
        X = (1.0 - c[3]) * X.normalized();
      }
      if (map.dim() == 1) X.z() = 0.0;
      const Eigen::Vector3d u = average_extension(sample_map(map, grid.quadrature), X);
      Output o;
      o.table.columns = {"map", "d", "n", "X_x", "X_y", "X_z", "cap_radius", "u_x", "u_y", "u_z", "u_norm"};
      o.table.rows.push_back({map.spec(), std::int64_t{map.dim()}, std::int64_t{grid.quadrature->size()}, X.x(), X.y(),
                              X.z(), 2.0 * (1.0 - X.norm()), u.x(), u.y(), u.z(), u.norm()});
      return o;
    };
  }

  // rho
  std::string rho_map, rho_grid, rho_point;
  double rho_step = 1e-3;
  {
    CLI::App* sub = add("rho", "Stopping radius rho(x) at one point or on every grid point");
    sub->add_option("--map", rho_map, "Map spec")->required();
    sub->add_option("--grid", rho_grid, "Grid spec");
    sub->add_option("--step", rho_step, "Radial step")->capture_default_str();
    sub->add_option("--point", rho_point, "Single point x,y[,z]");
    subs.back().handler = [&]() {
      const auto [map, grid] = map_and_grid(rho_map, rho_grid);
      const SampledMap sm = sample_map(map, grid.quadrature);
      Output o;
      o.table.columns = {"map", "d", "n", "step", "index", "x", "y", "z", "rho", "crossed"};
      auto add_row = [&](std::int64_t index, const SpherePoint& x, const RhoResult& r) {
        o.table.rows.push_back({map.spec(), std::int64_t{map.dim()}, std::int64_t{grid.quadrature->size()}, rho_step, index,
                                x.x(), x.y(), x.z(), r.rho, r.crossed});
      };
      if (!rho_point.empty()) {
        const SpherePoint x = parse_sphere_point(rho_point, map.dim());
        add_row(-1, x, rho_detail(sm, x, rho_step));
        return o;
      }
      std::vector<RhoResult> results(static_cast<std::size_t>(sm.size()));
      parallel_for(results.size(), [&](std::size_t i) {
        results[i] = rho_detail(sm, grid.quadrature->point(static_cast<Eigen::Index>(i)), rho_step);
      });
      for (std::size_t i = 0; i < results.size(); ++i) {
        add_row(static_cast<std::int64_t>(i), grid.quadrature->point(static_cast<Eigen::Index>(i)), results[i]);
      }
      return o;
    };
  }

  // rho-bound
  std::string rb_map, rb_grid;
  double rb_step = 1e-3;
  {
    CLI::App* sub = add("rho-bound", "|deg g| against the integral of rho^-d over {rho < 1}");
    sub->add_option("--map", rb_map, "Map spec")->required();
    sub->add_option("--grid", rb_grid, "Grid spec");
    sub->add_option("--step", rb_step, "Radial step")->capture_default_str();
    subs.back().handler = [&]() {
      const auto [map, grid] = map_and_grid(rb_map, rb_grid);
      const RhoDegreeBound b = rho_degree_bound(grid, sample_map(map, grid.quadrature), rb_step);
      Output o;
      o.table.columns = {"map", "d", "n", "step", "lhs", "rhs", "ratio", "violation"};
      o.table.rows.push_back({map.spec(), std::int64_t{map.dim()}, std::int64_t{grid.quadrature->size()}, rb_step,
                              std::int64_t{b.lhs}, b.rhs, b.ratio, b.violation});
      return o;
    };
  }

  // lemma1
  int l1_d = 1, l1_trials = 1000, l1_n = 0;
  double l1_p = 1.0;
  std::string l1_delta = "0.05,0.1,0.2", l1_kind = "pl";
  {
    CLI::App* sub = add("lemma1", "Mean-oscillation inequality on a ball for random test functions");
    sub->add_option("--d", l1_d, "Dimension of the ball")->check(CLI::IsMember({1, 2}))->capture_default_str();
    sub->add_option("--p", l1_p, "Exponent p >= 1")->capture_default_str();
    sub->add_option("--delta", l1_delta, "Delta grid")->capture_default_str();
    sub->add_option("--kind", l1_kind, "Test functions: pl, trig, or linear (f(x) = x, one trial)")
        ->check(CLI::IsMember({"pl", "trig", "linear"}))
        ->capture_default_str();
    sub->add_option("--trials", l1_trials, "Number of random functions")->check(CLI::Range(1, 100000))->capture_default_str();
    sub->add_option("--n", l1_n, "Points per dimension (default 1000 for d=1, 40 for d=2)");
    subs.back().handler = [&]() {
      const Ball ball{l1_d, Eigen::Vector2d(0.5, 0.0), 0.5};
      const int n = l1_n > 0 ? l1_n : (l1_d == 1 ? 1000 : 40);
      const std::vector<double> deltas = parse_delta_grid(l1_delta);
      const int trials = l1_kind == "linear" ? 1 : l1_trials;
      std::vector<std::vector<Lemma1Report>> reports(static_cast<std::size_t>(trials));
      for (int t = 0; t < trials; ++t) {
        ScalarField f;
        if (l1_kind == "linear") {
          f = [](const Eigen::Vector2d& x) { return x.x(); };
        } else {
          f = random_test_function(parse_test_function_kind(l1_kind), ball,
                                   derive_seed(g.seed, "lemma1-trial-" + std::to_string(t)));
        }
        reports[static_cast<std::size_t>(t)] = lemma1_check(f, ball, l1_p, deltas, n);
      }
      Output o;
      o.table.columns = {"trial", "kind", "d", "n", "p", "delta", "ball_measure", "lhs", "rhs_core", "ratio_bound"};
      std::vector<double> max_ratio(deltas.size(), 0.0);
      for (int t = 0; t < trials; ++t) {
        for (std::size_t k = 0; k < deltas.size(); ++k) {
          const Lemma1Report& r = reports[static_cast<std::size_t>(t)][k];
          max_ratio[k] = std::max(max_ratio[k], r.ratio_bound);
          o.table.rows.push_back({std::to_string(t), l1_kind, std::int64_t{l1_d}, std::int64_t{n}, r.p, r.delta,
                                  r.ball_measure, r.lhs, r.rhs_core, r.ratio_bound});
        }
      }
      json summary = json::array();
      for (std::size_t k = 0; k < deltas.size(); ++k) {
        o.table.rows.push_back({std::string("max"), l1_kind, std::int64_t{l1_d}, std::int64_t{n}, l1_p, deltas[k], ball.measure(),
                                {}, {}, max_ratio[k]});
        summary.push_back({{"delta", deltas[k]}, {"max_ratio_bound", max_ratio[k]}});
      }
      o.extra["max_ratio_bound"] = std::move(summary);
      return o;
    };
  }

  // grids
  std::string grids_spec;
  bool grids_export = false;
  {
    CLI::App* sub = add("grids", "Describe or export a quadrature grid");
    sub->add_option("--grid", grids_spec, "Grid spec")->required();
    sub->add_flag("--export", grids_export, "Write the grid file (points, weights, triangles)");
    subs.back().handler = [&]() {
      const SphereGrid grid = make_grid(grids_spec);
      Output o;
      if (grids_export) {
        std::ostringstream body;
        body.precision(17);
        write_grid(body, *grid.quadrature, grid.mesh.get());
        o.raw = body.str();
        return o;
      }
      o.table.columns = {"grid", "d", "n", "max_spacing", "total_weight", "triangles", "euler_characteristic"};
      Cell triangles, euler;
      if (grid.mesh) {
        triangles = static_cast<std::int64_t>(grid.mesh->triangles.size());
        euler = static_cast<std::int64_t>(grid.mesh->euler_characteristic());
      }
      o.table.rows.push_back({grid.spec, std::int64_t{grid.dim()}, std::int64_t{grid.quadrature->size()},
                              grid.quadrature->max_spacing, pairwise_sum(std::span(grid.quadrature->weights.data(),
                                                                                   grid.quadrature->weights.size())),
                              triangles, euler});
      return o;
    };
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  for (const auto& s : subs) {
    if (!s.app->parsed()) continue;
    if (g.threads > 0) set_thread_count(g.threads);
    try {
      const Output o = s.handler();
      const std::string command = echo_command(*s.app, g);
      if (g.output.empty()) {
        write_output(out, o, command, g);
      } else {
        std::ofstream file(g.output);
        if (!file) throw InvalidArgument("cannot open output file '" + g.output + "'");
        write_output(file, o, command, g);
        if (!file) throw ResourceLimit("failed writing '" + g.output + "'");
      }
      return 0;
    } catch (...) {
      return exit_code_for(std::current_exception(), err);
    }
  }
  err << app.help();
  return 2;
}

}  // namespace degreelab::cli

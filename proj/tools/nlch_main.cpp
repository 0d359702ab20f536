#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlch/config.hpp"
#include "nlch/errors.hpp"
#include "nlch/interface.hpp"
#include "nlch/selftest.hpp"

namespace fs = std::filesystem;
using namespace nlch;

namespace {

struct Outputs {
  fs::path dir;
  bool gnuplot = false;
  std::vector<std::string> files;

  void write(const std::string& name, const std::string& text) {
    fs::create_directories(dir);
    std::ofstream os(dir / name, std::ios::binary);
    os << text;
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    files.push_back(name);
  }
  // Plain "x y" columns for plotting.
  void dat(const std::string& name, const std::vector<std::pair<double, double>>& xy) {
    if (!gnuplot) return;
    std::ostringstream os;
    os << std::setprecision(17);
    for (auto [x, y] : xy) os << x << ' ' << y << '\n';
    write(name, os.str());
  }
};

std::string iso_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

GridSpec default_grid(int dim) {
  GridSpec s;
  s.dim = dim;
  if (dim == 1) {
    s.nodes = {1024, 1};
    s.extent = {4.0, 1.0};
    s.origin = {-2.0, 0.0};
    s.boundary = {Boundary::fixed, Boundary::fixed};
  } else {
    s.nodes = {129, 64};
    s.extent = {2.0, 1.0};
    s.origin = {-1.0, 0.0};
    s.boundary = {Boundary::fixed, Boundary::periodic};
  }
  return s;
}

Field initial_field(const RunConfig& c, const Grid& g) {
  const auto& f = c.field;
  const double eps = f.epsilon;
  if (f.init == "tanh")
    return Field::from_function(g, [&](const Vec2& x) {
      return std::tanh((x[0] * f.normal[0] + x[1] * f.normal[1] - f.offset) / eps);
    });
  if (f.init == "interface")
    return mollified_interface(g, {f.normal, f.offset, f.sigma > 0 ? f.sigma : 4 * eps});
  if (f.init == "constant") return Field(g, f.value);
  if (f.init == "random") {
    std::mt19937_64 rng(f.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Field out(g);
    for (double& v : out.values) v = f.amplitude * u(rng);
    return out;
  }
  std::ifstream in(f.file);
  if (!in) throw ParameterError("cannot open field file " + f.file);
  return read_field_csv(in, g);
}

ConstraintSpec field_constraint(const RunConfig& c, const Grid& g) {
  const auto& f = c.field;
  if (f.constraint == "profile") return ConstraintSpec::profile(f.normal, f.halfwidth);
  if (f.constraint == "transitions") {
    const double lo = g.position(0)[0];
    const double hi = g.position(g.index(g.shape()[0] - 1, 0))[0];
    return transition_pins(f.transitions, lo, hi, f.pin_width);
  }
  return ConstraintSpec::free_field();
}

// Values along the first row (axis 0) for plotting.
std::vector<std::pair<double, double>> first_row(const Field& f) {
  std::vector<std::pair<double, double>> xy;
  for (int i = 0; i < f.grid.shape()[0]; ++i) {
    const auto idx = f.grid.index(i, 0);
    xy.push_back({f.grid.position(idx)[0], f.values[idx]});
  }
  return xy;
}

std::string field_csv(const Field& f) {
  std::ostringstream os;
  write_field_csv(os, f);
  return os.str();
}

EnergyModel field_model(const RunConfig& c, const Grid& g) {
  StencilOptions so;
  so.mass_tol = c.oracle.resolution.mass_tol;
  return EnergyModel(g, c.potential, Kernel(c.kernel), c.field.epsilon, so);
}

nlohmann::json run_energy(const RunConfig& c, Outputs& out, bool minimize_too) {
  const Grid g = Grid::cartesian(c.grid.value_or(default_grid(c.kernel.dim)));
  const EnergyModel model = field_model(c, g);
  const ConstraintSpec cons = field_constraint(c, g);
  Field f = initial_field(c, g);
  if (!minimize_too) {
    const auto r = energy_total(f, model);
    out.write("energy.csv", energy_csv_header() + "\n" + energy_csv_row(c.field.epsilon, r) + "\n");
    out.dat("field.dat", first_row(f));
    return {{"total", r.total}};
  }
  f = project_constraints(f, cons);
  const auto res = minimize(f, model, cons, c.solver);
  out.write("energy.csv", energy_csv_header() + "\n" + energy_csv_row(c.field.epsilon, res.report) + "\n");
  out.write("trace.csv", trace_csv(res.trace));
  out.write("field.csv", field_csv(res.field));
  std::vector<std::pair<double, double>> tr;
  for (const auto& t : res.trace) tr.push_back({double(t.iter), t.energy});
  out.dat("trace.dat", tr);
  out.dat("field.dat", first_row(res.field));
  if (!res.converged)
    std::cerr << "minimize: not converged (" << res.stop_reason << ") after " << res.iterations
              << " iterations\n";
  return {{"total", res.report.total},
          {"converged", res.converged},
          {"iterations", res.iterations},
          {"stop_reason", res.stop_reason}};
}

std::string dir_tag(const LatticeDirection& d) {
  return std::to_string(d.p) + "_" + std::to_string(d.q);
}

nlohmann::json run_psi(const RunConfig& c, Outputs& out) {
  const Kernel k(c.kernel);
  std::vector<PsiResult> rows;
  if (c.kernel.dim == 2 && c.directions.size() > 1) {
    rows = anisotropy_table(c.directions, c.potential, k, c.oracle.psi, c.oracle.resolution, c.solver);
    out.write("anisotropy.csv", anisotropy_csv(rows));
  } else {
    for (const auto& d : c.directions)
      rows.push_back(psi(d, c.potential, k, c.oracle.psi, c.oracle.resolution, c.solver));
  }
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& r : rows) {
    const std::string tag = dir_tag(r.direction);
    out.write("psi_" + tag + ".csv", psi_csv(r));
    if (r.profile) out.write("profile_" + tag + ".csv", field_csv(*r.profile));
    std::vector<std::pair<double, double>> xy;
    for (std::size_t i = 0; i < r.eps_grid.size(); ++i) xy.push_back({r.eps_grid[i], r.energies[i]});
    out.dat("psi_" + tag + ".dat", xy);
    summary.push_back({{"p", r.direction.p}, {"q", r.direction.q}, {"psi", r.psi}, {"argmin_eps", r.argmin_eps}});
  }
  return summary;
}

nlohmann::json run_gamma(const RunConfig& c, Outputs& out) {
  const auto r = gamma_scan(c.gamma, c.potential, Kernel(c.kernel));
  out.write("gamma.csv", gamma_csv(r));
  std::vector<std::pair<double, double>> xy;
  for (const auto& row : r.rows) xy.push_back({row.epsilon, row.ratio});
  out.dat("gamma.dat", xy);
  return {{"psi", r.psi}, {"gamma_J", r.gamma_J}};
}

nlohmann::json run_slice(const RunConfig& c, Outputs& out) {
  const auto& s = c.slice;
  const auto r = slicing_check(s.domain, s.integrand, s.samples, s.seed);
  out.write("slice.csv", slice_csv(s.domain, s.integrand, s.seed, r));
  return {{"lhs", r.lhs}, {"rhs", r.rhs}, {"stderr", r.std_error}};
}

nlohmann::json run_interp(const RunConfig& c, Outputs& out) {
  const auto r = interpolation_check(c.interp, c.potential, Kernel(c.kernel));
  out.write("interp.csv", interp_csv(r));
  std::vector<std::pair<double, double>> xy;
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    if (!r.rows[i].skipped) xy.push_back({double(i), r.rows[i].ratio});
  out.dat("interp.dat", xy);
  return {{"suite_max", r.suite_max},
          {"calibrated", r.calibrated},
          {"spread", r.spread},
          {"held_out_max", r.held_out_max},
          {"violations", r.violations}};
}

nlohmann::json run_compact(const RunConfig& c, Outputs& out) {
  const auto r = compactness_diagnostic(c.compact, c.potential, Kernel(c.kernel));
  out.write("compact.csv", compact_csv(r));
  std::vector<std::pair<double, double>> xy;
  for (const auto& row : r.rows) xy.push_back({row.epsilon, double(row.count)});
  out.dat("compact.dat", xy);
  return {{"psi", r.psi},
          {"counts_bounded", r.counts_bounded},
          {"counts_monotone", r.counts_monotone},
          {"energy_tracks", r.energy_tracks}};
}

nlohmann::json run_limsup(const RunConfig& c, Outputs& out) {
  const auto r = limsup_check(c.limsup, c.potential, Kernel(c.kernel));
  out.write("limsup.csv", limsup_csv(r));
  std::vector<std::pair<double, double>> xy;
  for (const auto& row : r.rows) xy.push_back({row.epsilon, row.ratio_optimal});
  out.dat("limsup.dat", xy);
  return {{"psi", r.psi}, {"eps_star", r.eps_star}, {"nodes", r.nodes}};
}

nlohmann::json seeds_of(const RunConfig& c) {
  return {{"solver", c.solver.seed},
          {"field", c.field.seed},
          {"slice", c.slice.seed},
          {"interp", c.interp.seeds},
          {"interp_held_out", c.interp.held_out_seed},
          {"compact", c.compact.seed}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal second-order phase-field energies: experiments and checks", "nlch"};
  app.set_version_flag("--version", NLCH_VERSION);
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  bool gnuplot = false;
  bool schema = false;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"energy", "Evaluate the energy of the configured field"},
      {"minimize", "Minimize from the configured field"},
      {"psi", "Cell problem: surface tension per direction"},
      {"gamma-scan", "Minimal energy with pinned transitions over an epsilon sweep"},
      {"slice-check", "Slicing formula: quadrature against Monte Carlo"},
      {"interp-check", "Interpolation constant over random field suites"},
      {"compact-check", "Transition counts of minimizing families"},
      {"limsup-check", "Recovery sequence energies for a flat interface"},
      {"selftest", "Exact identities of the building blocks"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    if (name == "selftest") continue;
    sub->add_option("config", config_path, "TOML config file (defaults when omitted)");
    sub->add_option("--set", sets, "Override, section.key=value")->take_all();
    sub->add_option("--out", out_dir, "Output directory (overrides run.out)");
    sub->add_option("--seed", seed, "Seed for every random stream of the run");
    sub->add_option("--samples", samples, "Monte Carlo samples (slice-check)");
    sub->add_flag("--gnuplot", gnuplot, "Also write two-column .dat files");
  }
  app.add_flag("--schema", schema, "Print the config sections and keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (schema) {
      std::cout << config_schema();
      return 0;
    }
    app.exit(e);
    return 2;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  if (cmd == "selftest") {
    int failed = 0;
    for (const auto& s : run_selftest()) {
      std::cout << (s.pass ? "PASS " : "FAIL ") << s.name;
      if (!s.pass) std::cout << " (" << s.detail << ")";
      std::cout << '\n';
      failed += !s.pass;
    }
    std::cout << (failed ? "selftest failed: " + std::to_string(failed) : std::string("selftest ok")) << '\n';
    return failed ? 3 : 0;
  }

  if (seed) {
    for (const char* key : {"run.seed", "field.seed", "slice.seed", "compact.seed"})
      sets.push_back(std::string(key) + "=" + std::to_string(*seed));
  }
  if (samples) sets.push_back("slice.samples=" + std::to_string(*samples));
  if (!out_dir.empty()) sets.push_back("run.out=\"" + out_dir + "\"");

  RunConfig cfg;
  try {
    cfg = config_path.empty() ? parse_config("", "<defaults>", sets) : load_config(config_path, sets);
  } catch (const ConfigError& e) {
    for (const auto& m : e.messages()) std::cerr << m << '\n';
    return 2;
  }

  const std::string started = iso_now();
  Outputs out{cfg.out_dir, gnuplot, {}};
  nlohmann::json result;
  try {
    if (cmd == "energy") result = run_energy(cfg, out, false);
    else if (cmd == "minimize") result = run_energy(cfg, out, true);
    else if (cmd == "psi") result = run_psi(cfg, out);
    else if (cmd == "gamma-scan") result = run_gamma(cfg, out);
    else if (cmd == "slice-check") result = run_slice(cfg, out);
    else if (cmd == "interp-check") result = run_interp(cfg, out);
    else if (cmd == "compact-check") result = run_compact(cfg, out);
    else result = run_limsup(cfg, out);
  } catch (const ConfigError& e) {
    for (const auto& m : e.messages()) std::cerr << m << '\n';
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << cmd << ": parameter error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << cmd << ": " << e.what() << '\n';
    return 3;
  }

  nlohmann::json manifest{{"tool", "nlch"},
                          {"version", NLCH_VERSION},
                          {"subcommand", cmd},
                          {"config_file", config_path},
                          {"config", nlohmann::json::parse(cfg.echo_json)},
                          {"seeds", seeds_of(cfg)},
                          {"result", result},
                          {"outputs", out.files}};
  try {
    out.write("manifest.json", manifest.dump(2) + "\n");
    nlohmann::json stamps{{"start", started}, {"end", iso_now()}};
    fs::create_directories(out.dir);
    std::ofstream(out.dir / "timestamps.json") << stamps.dump(2) << '\n';
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 3;
  }
  std::cout << result.dump() << '\n';
  // A minimization that stops short of the tolerance is a numerical failure; its
  // outputs are kept for diagnosis.
  if (cmd == "minimize" && !result.value("converged", true)) return 3;
  return 0;
}

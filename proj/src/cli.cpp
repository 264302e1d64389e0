#include "phasecell/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "phasecell/cell.hpp"
#include "phasecell/homogenize.hpp"
#include "phasecell/manifest.hpp"
#include "phasecell/stochastic.hpp"
#include "phasecell/verify.hpp"
#include "phasecell/version.hpp"

namespace phasecell {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct Settings {
  // integrand
  std::string potential = "quartic";  // quartic | quadratic-wells | custom-polynomial
  double well_scale = 1.0;
  double well_gain = 4.0;
  std::vector<double> well_coeffs{1.0};
  double p = 2.0;
  double c1 = 1.0, c2 = 1.0;            // homogeneous-variant coefficient
  std::string variant = "homogeneous";  // homogeneous|laminate|checkerboard|random
  int laminate_axis = 1;
  std::vector<double> values{1.0, 2.0};
  std::uint64_t field_seed = 1;
  // solver
  int max_iters = 10000;
  double tol_pg_rel = 1e-6;
  double tol_rel = 1e-9;
  std::string bb = "alternating";  // bb1|bb2|alternating
  int nonmonotone_window = 10;
  int restarts = 1;
  double perturbation = 0.02;
  // grids
  int cells = 96;
  int resolution = 16;
  int max_cells = 512;
  double delta_bc_cells = 2.0;
  // run
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out_dir;
};

void apply_config(Settings& s, const ordered_json& j) {
  auto get = [&](const char* key, auto& slot) {
    if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
  };
  get("potential", s.potential);
  get("well_scale", s.well_scale);
  get("well_gain", s.well_gain);
  get("well_coeffs", s.well_coeffs);
  get("p", s.p);
  get("c1", s.c1);
  get("c2", s.c2);
  get("variant", s.variant);
  get("laminate_axis", s.laminate_axis);
  get("values", s.values);
  get("field_seed", s.field_seed);
  get("max_iters", s.max_iters);
  get("tol_pg_rel", s.tol_pg_rel);
  get("tol_rel", s.tol_rel);
  get("bb", s.bb);
  get("nonmonotone_window", s.nonmonotone_window);
  get("restarts", s.restarts);
  get("perturbation", s.perturbation);
  get("N", s.cells);
  get("resolution", s.resolution);
  get("max_cells", s.max_cells);
  get("delta_bc_cells", s.delta_bc_cells);
  get("seed", s.seed);
  get("jobs", s.jobs);
  get("out", s.out_dir);
}

ordered_json settings_to_json(const Settings& s) {
  ordered_json j;
  j["potential"] = s.potential;
  j["well_scale"] = s.well_scale;
  j["well_gain"] = s.well_gain;
  j["well_coeffs"] = s.well_coeffs;
  j["p"] = s.p;
  j["c1"] = s.c1;
  j["c2"] = s.c2;
  j["variant"] = s.variant;
  j["laminate_axis"] = s.laminate_axis;
  j["values"] = s.values;
  j["field_seed"] = s.field_seed;
  j["max_iters"] = s.max_iters;
  j["tol_pg_rel"] = s.tol_pg_rel;
  j["tol_rel"] = s.tol_rel;
  j["bb"] = s.bb;
  j["nonmonotone_window"] = s.nonmonotone_window;
  j["restarts"] = s.restarts;
  j["perturbation"] = s.perturbation;
  j["N"] = s.cells;
  j["resolution"] = s.resolution;
  j["max_cells"] = s.max_cells;
  j["delta_bc_cells"] = s.delta_bc_cells;
  j["seed"] = s.seed;
  j["jobs"] = s.jobs;
  j["out"] = s.out_dir;
  return j;
}

DoubleWell make_well(const Settings& s) {
  if (s.potential == "quartic") return DoubleWell::quartic(s.well_scale);
  if (s.potential == "quadratic-wells")
    return DoubleWell::quadratic_wells(s.well_scale, s.well_gain);
  if (s.potential == "custom-polynomial")
    return DoubleWell::custom_polynomial(s.well_coeffs, s.well_scale);
  throw CLI::ValidationError("--potential",
                             "unknown potential '" + s.potential + "'");
}

Integrand make_cli_integrand(const Settings& s) {
  IntegrandSpec spec;
  spec.well = make_well(s);
  spec.p = s.p;
  if (s.variant == "homogeneous") {
    spec.homogeneous = true;
    spec.c1 = s.c1;
    spec.c2 = s.c2;
  } else if (s.variant == "laminate") {
    spec.homogeneous = false;
    spec.coefficient = CoefficientField::laminate(s.laminate_axis, s.values);
  } else if (s.variant == "checkerboard") {
    if (s.values.size() != 2)
      throw CLI::ValidationError("--values", "checkerboard needs exactly 2 values");
    spec.homogeneous = false;
    spec.coefficient = CoefficientField::checkerboard(s.values[0], s.values[1]);
  } else if (s.variant == "random") {
    spec.homogeneous = false;
    spec.coefficient = CoefficientField::random_checkerboard(s.field_seed, s.values);
  } else {
    throw CLI::ValidationError("--variant", "unknown variant '" + s.variant + "'");
  }
  return make_integrand(spec);
}

SolverConfig make_solver(const Settings& s) {
  SolverConfig cfg;
  cfg.max_iters = s.max_iters;
  cfg.tol_pg_rel = s.tol_pg_rel;
  cfg.tol_rel = s.tol_rel;
  if (s.bb == "bb1") cfg.bb_variant = BBVariant::BB1;
  else if (s.bb == "bb2") cfg.bb_variant = BBVariant::BB2;
  else cfg.bb_variant = BBVariant::Alternating;
  cfg.nonmonotone_window = s.nonmonotone_window;
  cfg.restarts = s.restarts;
  cfg.perturbation = s.perturbation;
  return cfg;
}

// "p,q" (components, normalised) or "<angle>deg"
Vec parse_direction(const std::string& text) {
  if (text.size() > 3 && text.substr(text.size() - 3) == "deg") {
    double angle = std::stod(text.substr(0, text.size() - 3)) * M_PI / 180.0;
    return vec2(std::cos(angle), std::sin(angle));
  }
  Vec v{};
  std::stringstream ss(text);
  std::string part;
  int i = 0;
  while (std::getline(ss, part, ',') && i < 3)
    v[static_cast<std::size_t>(i++)] = std::stod(part);
  if (i < 2) throw CLI::ValidationError("--nu", "expected 'p,q' or '<angle>deg'");
  return v;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(std::stod(part));
  if (out.empty()) throw CLI::ValidationError("list", "empty list");
  return out;
}

std::vector<Vec> parse_points(const std::string& text) {
  std::vector<Vec> out;
  std::stringstream ss(text);
  std::string point;
  while (std::getline(ss, point, ';')) {
    Vec v{};
    std::stringstream ps(point);
    std::string c;
    int i = 0;
    while (std::getline(ps, c, ',') && i < 3)
      v[static_cast<std::size_t>(i++)] = std::stod(c);
    out.push_back(v);
  }
  if (out.empty()) out.push_back(Vec{});
  return out;
}

struct OutputSink {
  std::optional<fs::path> dir;
  RunManifest manifest;

  explicit OutputSink(const Settings& s, const ordered_json& task_config) {
    if (!s.out_dir.empty()) {
      dir = fs::path(s.out_dir);
      fs::create_directories(*dir);
    }
    ordered_json cfg = settings_to_json(s);
    cfg["task"] = task_config;
    manifest.set_config(cfg);
    manifest.set_seed(s.seed);
  }

  std::string path(const std::string& name) const { return (*dir / name).string(); }

  void finish() {
    if (dir) manifest.write(dir->string());
  }
};

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// ------------------------------------------------------------- subcommands

int cmd_cp(const Settings& s, int quad_points) {
  DoubleWell w = make_well(s);
  double cp = compute_cp(w, s.p, quad_points);
  std::printf("%.12g\n", cp);
  return 0;
}

int cmd_profile1d(const Settings& s, int grid, double half_width) {
  DoubleWell w = make_well(s);
  auto res = optimal_profile_1d(w, s.p, grid, half_width);
  ordered_json j;
  j["cost"] = res.cost;
  j["cp"] = compute_cp(w, s.p);
  j["converged"] = res.converged;
  j["iterations"] = res.iterations;
  std::cout << j.dump(2) << "\n";
  if (!s.out_dir.empty()) {
    ordered_json task{{"command", "profile1d"}, {"grid", grid}, {"T", half_width}};
    OutputSink sink(s, task);
    std::string csv = sink.path("profile1d.csv");
    std::ofstream out(csv);
    out << "t,v\n";
    char buf[80];
    for (std::size_t i = 0; i < res.t.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", res.t[i], res.v[i]);
      out << buf;
    }
    out.close();
    sink.manifest.add_output(csv);
    sink.finish();
  }
  return res.converged ? 0 : 1;
}

ordered_json cell_result_json(const CellResult& r) {
  ordered_json j;
  j["m_hat"] = r.m_hat;
  j["density"] = r.density;
  j["rho"] = r.rho;
  j["eps"] = r.eps;
  j["N"] = r.cells;
  j["lower_bound"] = r.lower_bound;
  j["upper_bound"] = r.upper_bound;
  j["bracket_ok"] = r.bracket_ok;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["pg_norm"] = r.pg_norm;
  return j;
}

int cmd_cell(const Settings& s, const std::string& nu, double rho, double eps,
             double delta) {
  CellProblem p;
  p.f = make_cli_integrand(s);
  p.nu = parse_direction(nu);
  p.rho = rho;
  p.eps = eps;
  p.cells = s.cells;
  p.solver = make_solver(s);
  double t0 = now_ms();
  CellResult res = delta > 0.0 ? solve_cell_delta(p, delta) : solve_cell(p);
  double elapsed = now_ms() - t0;
  ordered_json j = cell_result_json(res);
  std::cout << j.dump(2) << "\n";
  if (!s.out_dir.empty()) {
    ordered_json task{{"command", "cell"}, {"nu", nu}, {"rho", rho},
                      {"eps", eps},       {"delta", delta}};
    OutputSink sink(s, task);
    std::string path = sink.path("cell.json");
    std::ofstream out(path);
    out << j.dump(2) << "\n";
    out.close();
    sink.manifest.add_timing("cell", elapsed);
    sink.manifest.add_output(path);
    sink.finish();
  }
  return res.converged ? 0 : 1;
}

int cmd_gamma(const Settings& s, const std::string& nu, const std::string& rho_list,
              const std::string& eps_list, bool richardson) {
  CellProblem base;
  base.cells = s.cells;
  base.solver = make_solver(s);
  Integrand f = make_cli_integrand(s);
  DensityEstimate est = estimate_density(f, Vec{}, parse_direction(nu), 2,
                                         parse_list(rho_list), parse_list(eps_list),
                                         base, richardson);
  ordered_json j;
  j["f_prime_est"] = est.f_prime_est;
  j["f_dprime_est"] = est.f_dprime_est;
  j["trend_spread"] = est.trend_spread;
  j["monotonicity_ok"] = est.monotonicity_ok;
  if (est.richardson_enabled) j["richardson_est"] = est.richardson_est;
  j["warnings"] = est.warnings;
  std::cout << j.dump(2) << "\n";
  for (const auto& w : est.warnings) std::cerr << "warning: " << w << "\n";
  if (!s.out_dir.empty()) {
    ordered_json task{{"command", "gamma"},
                      {"nu", nu},
                      {"rho_list", rho_list},
                      {"eps_list", eps_list},
                      {"richardson", richardson}};
    OutputSink sink(s, task);
    std::string csv = sink.path("gamma.csv");
    write_density_csv(est, csv);
    std::string json_path = sink.path("gamma.json");
    std::ofstream out(json_path);
    out << j.dump(2) << "\n";
    out.close();
    sink.manifest.add_output(csv);
    sink.manifest.add_output(json_path);
    sink.finish();
  }
  return 0;
}

int cmd_periodic(const Settings& s, const std::string& nu, const std::string& r_list,
                 const std::string& x_list, int directions, double aniso_r,
                 bool polar, const std::string& tiling) {
  HomogenizeConfig cfg;
  cfg.resolution = s.resolution;
  cfg.max_cells = s.max_cells;
  cfg.delta_bc_cells = s.delta_bc_cells;
  cfg.solver = make_solver(s);
  cfg.jobs = s.jobs;
  Integrand f = make_cli_integrand(s);

  ordered_json j;
  std::optional<HomogenizationRun> run;
  std::vector<AnisotropyEntry> scan;
  std::optional<TilingReport> tiling_rep;

  if (!r_list.empty()) {
    run = homogenize_direction(f, parse_direction(nu), 2, parse_points(x_list),
                               parse_list(r_list), cfg);
    j["f_hom_est"] = run->f_hom_est;
    j["x_spread"] = run->x_spread;
    j["trend"] = run->trend;
  }
  if (directions > 0) {
    std::vector<Vec> dirs;
    for (int k = 0; k < directions; ++k) {
      double a = M_PI * (static_cast<double>(k) / directions);
      dirs.push_back(vec2(std::cos(a), std::sin(a)));
    }
    scan = anisotropy_scan(f, dirs, 2, aniso_r, cfg);
    double lo = 1e300, hi = 0.0;
    for (const auto& e : scan) {
      lo = std::min(lo, e.density);
      hi = std::max(hi, e.density);
    }
    j["anisotropy_ratio"] = hi / lo;
  }
  if (!tiling.empty()) {
    auto rs = parse_list(tiling);
    if (rs.size() != 2) throw CLI::ValidationError("--tiling", "expected 'r,s'");
    tiling_rep = check_tiling_subadditivity(f, parse_direction(nu), 2, rs[0], rs[1], cfg);
    ordered_json t;
    t["density_r"] = tiling_rep->density_r;
    t["density_s"] = tiling_rep->density_s;
    t["competitor_density"] = tiling_rep->competitor_density;
    t["bound"] = tiling_rep->bound;
    t["tiles"] = tiling_rep->tile_count;
    t["inequality_ok"] = tiling_rep->inequality_ok;
    t["competitor_admissible"] = tiling_rep->competitor_admissible;
    j["tiling"] = t;
  }
  std::cout << j.dump(2) << "\n";

  if (!s.out_dir.empty()) {
    ordered_json task{{"command", "periodic"}, {"nu", nu},       {"r_list", r_list},
                      {"x_list", x_list},      {"directions", directions},
                      {"aniso_r", aniso_r},    {"tiling", tiling}};
    OutputSink sink(s, task);
    if (run) {
      std::string csv = sink.path("periodic.csv");
      write_homogenize_csv(*run, csv);
      sink.manifest.add_output(csv);
    }
    if (!scan.empty()) {
      std::string csv = sink.path(polar ? "anisotropy_polar.csv" : "anisotropy.csv");
      write_anisotropy_csv(scan, csv, polar);
      sink.manifest.add_output(csv);
    }
    std::string json_path = sink.path("periodic.json");
    std::ofstream out(json_path);
    out << j.dump(2) << "\n";
    out.close();
    sink.manifest.add_output(json_path);
    sink.finish();
  }
  bool failed = tiling_rep && !tiling_rep->inequality_ok;
  return failed ? 1 : 0;
}

int cmd_stochastic(const Settings& s, const std::string& nu, const std::string& r_list,
                   int seeds, int covariance_pairs, int subadd_pairs) {
  StochasticConfig cfg;
  cfg.well = make_well(s);
  cfg.p = s.p;
  cfg.values = s.values;
  cfg.master_seed = s.seed;
  cfg.resolution = s.resolution;
  cfg.max_cells = s.max_cells;
  cfg.delta_bc_cells = s.delta_bc_cells;
  cfg.solver = make_solver(s);
  cfg.jobs = s.jobs;
  Vec direction = parse_direction(nu);

  ErgodicEstimate est = ergodic_estimate(direction, 2, parse_list(r_list), seeds, cfg);
  ordered_json j;
  j["f_hom_est"] = est.f_hom_est;
  j["ci_halfwidth"] = est.ci_halfwidth;
  j["std_decreasing"] = est.std_decreasing;
  ordered_json levels = ordered_json::array();
  for (const auto& lv : est.levels) {
    ordered_json l;
    l["r"] = lv.r;
    l["mean"] = lv.mean;
    l["std"] = lv.stddev;
    l["seeds"] = lv.seeds;
    levels.push_back(l);
  }
  j["levels"] = levels;

  bool checks_ok = true;
  if (covariance_pairs > 0) {
    ordered_json arr = ordered_json::array();
    for (int k = 0; k < covariance_pairs; ++k) {
      CovarianceReport rep = check_covariance(cfg.master_seed + static_cast<std::uint64_t>(k),
                                              {0, 0}, {2, 0},
                                              {static_cast<std::int64_t>(k % 5) - 2, 0},
                                              direction, 2, cfg);
      checks_ok = checks_ok && rep.ok;
      arr.push_back({{"diff", rep.diff}, {"ok", rep.ok}});
    }
    j["covariance"] = arr;
  }
  if (subadd_pairs > 0) {
    ordered_json arr = ordered_json::array();
    for (int k = 0; k < subadd_pairs; ++k) {
      SubadditivityReport rep =
          check_subadditivity(cfg.master_seed + static_cast<std::uint64_t>(k), 0, 2,
                              {{0, 1}, {1, 2}}, direction, cfg);
      checks_ok = checks_ok && rep.ok;
      arr.push_back({{"mu_whole", rep.mu_whole},
                     {"mu_parts_sum", rep.mu_parts_sum},
                     {"ok", rep.ok}});
    }
    j["subadditivity"] = arr;
  }
  std::cout << j.dump(2) << "\n";

  if (!s.out_dir.empty()) {
    ordered_json task{{"command", "stochastic"}, {"nu", nu},       {"r_list", r_list},
                      {"seeds", seeds},          {"covariance", covariance_pairs},
                      {"subadd", subadd_pairs}};
    OutputSink sink(s, task);
    std::string csv = sink.path("stochastic.csv");
    write_ergodic_csv(est, csv);
    std::string json_path = sink.path("stochastic.json");
    std::ofstream out(json_path);
    out << j.dump(2) << "\n";
    out.close();
    sink.manifest.add_output(csv);
    sink.manifest.add_output(json_path);
    sink.finish();
  }
  return checks_ok ? 0 : 1;
}

int cmd_verify(const Settings& s, const std::string& level, bool timings) {
  VerifyLevel lv = level == "full" ? VerifyLevel::Full : VerifyLevel::Fast;
  VerifyReport report = run_suite(lv, s.seed, s.jobs);
  std::string rendered = report_to_json(report, timings);
  std::cout << rendered;
  if (!s.out_dir.empty()) {
    ordered_json task{{"command", "verify"}, {"level", level}};
    OutputSink sink(s, task);
    std::string path = sink.path("verify.json");
    std::ofstream out(path);
    out << rendered;
    out.close();
    sink.manifest.add_output(path);
    sink.finish();
  }
  return report.overall ? 0 : 1;
}

int cmd_export_field(const Settings& s, const std::string& nu, double rho,
                     double eps, bool solve, const std::string& format,
                     const std::string& file) {
  CellProblem p;
  p.f = make_cli_integrand(s);
  p.nu = parse_direction(nu);
  p.rho = rho;
  p.eps = eps;
  p.cells = s.cells;
  p.solver = make_solver(s);
  ScalarField field;
  if (solve) {
    field = solve_cell_field(p).field;
  } else {
    RotatedCube cube = make_cube(p.x, p.rho, p.nu, p.n);
    Grid grid = make_grid(cube, p.cells);
    field = init_from_datum(grid, p.x, p.nu, p.eps, 2.0 * grid.h);
  }
  fs::path target = file;
  if (!s.out_dir.empty() && target.is_relative())
    target = fs::path(s.out_dir) / target;
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  if (format == "bin") write_field_binary(field, eps, target.string());
  else write_field_csv(field, target.string());
  if (!s.out_dir.empty()) {
    ordered_json task{{"command", "export-field"}, {"nu", nu},   {"rho", rho},
                      {"eps", eps},                {"solve", solve},
                      {"format", format},          {"file", file}};
    OutputSink sink(s, task);
    sink.manifest.add_output(target.string());
    sink.finish();
  }
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  Settings s;
  if (const char* env = std::getenv("PHASECELL_OUT")) s.out_dir = env;

  // --config is honoured before the flag pass so that flags override it
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) {
        std::cerr << "error: cannot open config file " << argv[i + 1] << "\n";
        return 2;
      }
      try {
        ordered_json j = ordered_json::parse(in);
        apply_config(s, j);
      } catch (const std::exception& e) {
        std::cerr << "error: bad config: " << e.what() << "\n";
        return 2;
      }
    }
  }

  CLI::App app{"phasecell: cell-problem surface densities of singularly "
               "perturbed phase-transition energies"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  std::string config_file;
  app.add_option("--config", config_file, "JSON config file (flags override it)");
  app.add_option("--out", s.out_dir, "output directory (env PHASECELL_OUT)")
      ->capture_default_str();
  app.add_option("--seed", s.seed, "master seed")->capture_default_str();
  app.add_option("--jobs", s.jobs, "concurrent tasks for sweeps")
      ->capture_default_str();

  auto add_integrand_options = [&](CLI::App* cmd) {
    cmd->add_option("--potential", s.potential,
                    "quartic | quadratic-wells | custom-polynomial")
        ->capture_default_str();
    cmd->add_option("--well-scale", s.well_scale, "multiplies W")->capture_default_str();
    cmd->add_option("--well-gain", s.well_gain, "quadratic-wells shape gain")
        ->capture_default_str();
    cmd->add_option("--well-coeffs", s.well_coeffs,
                    "custom-polynomial R(t) coefficients, ascending")
        ->delimiter(',');
    cmd->add_option("--p", s.p, "gradient exponent, p > 1")->capture_default_str();
    cmd->add_option("--c1", s.c1, "homogeneous coefficient (c1 = c2)")
        ->capture_default_str();
    cmd->add_option("--c2", s.c2, "homogeneous coefficient (c1 = c2)")
        ->capture_default_str();
    cmd->add_option("--variant", s.variant,
                    "homogeneous | laminate | checkerboard | random")
        ->capture_default_str();
    cmd->add_option("--laminate-axis", s.laminate_axis, "axis the laminate varies along")
        ->capture_default_str();
    cmd->add_option("--values", s.values, "coefficient values")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--field-seed", s.field_seed, "random-checkerboard seed")
        ->capture_default_str();
  };
  auto add_solver_options = [&](CLI::App* cmd) {
    cmd->add_option("--max-iters", s.max_iters)->capture_default_str();
    cmd->add_option("--tol-pg", s.tol_pg_rel, "projected-gradient tol (relative)")
        ->capture_default_str();
    cmd->add_option("--tol-rel", s.tol_rel, "energy-decrease tol over 20 iters")
        ->capture_default_str();
    cmd->add_option("--bb", s.bb, "bb1 | bb2 | alternating")->capture_default_str();
    cmd->add_option("--restarts", s.restarts)->capture_default_str();
    cmd->add_option("--perturbation", s.perturbation)->capture_default_str();
  };

  // cp
  auto* cp_cmd = app.add_subcommand("cp", "print the 1D transition constant c_p");
  int quad_points = 512;
  cp_cmd->add_option("--quad-points", quad_points)->capture_default_str();
  add_integrand_options(cp_cmd);

  // profile1d
  auto* prof_cmd = app.add_subcommand("profile1d", "solve the 1D transition profile");
  int grid1d = 512;
  double half_width = 5.0;
  prof_cmd->add_option("--grid", grid1d)->capture_default_str();
  prof_cmd->add_option("--half-width", half_width)->capture_default_str();
  add_integrand_options(prof_cmd);

  // cell
  auto* cell_cmd = app.add_subcommand("cell", "solve one cell problem");
  std::string nu = "0,1";
  double rho = 1.0, eps = 0.0625, delta = 0.0;
  cell_cmd->add_option("--nu", nu, "direction 'p,q' or '<angle>deg'")
      ->capture_default_str();
  cell_cmd->add_option("--rho", rho)->capture_default_str();
  cell_cmd->add_option("--eps", eps)->capture_default_str();
  cell_cmd->add_option("--delta", delta, "band variant m^delta (0 = default band)")
      ->capture_default_str();
  cell_cmd->add_option("--N", s.cells, "grid cells per axis")->capture_default_str();
  add_integrand_options(cell_cmd);
  add_solver_options(cell_cmd);

  // gamma
  auto* gamma_cmd = app.add_subcommand("gamma", "(rho, eps) sweep estimating f'/f''");
  std::string rho_list = "1,0.75,0.5", eps_list = "0.125,0.0625,0.03125";
  bool richardson = false;
  gamma_cmd->add_option("--nu", nu)->capture_default_str();
  gamma_cmd->add_option("--rho-list", rho_list, "decreasing")->capture_default_str();
  gamma_cmd->add_option("--eps-list", eps_list, "decreasing")->capture_default_str();
  gamma_cmd->add_flag("--richardson", richardson, "report eps-extrapolation too");
  gamma_cmd->add_option("--N", s.cells)->capture_default_str();
  add_integrand_options(gamma_cmd);
  add_solver_options(gamma_cmd);

  // periodic
  auto* per_cmd = app.add_subcommand("periodic", "periodic homogenisation sweeps");
  std::string r_list = "4,8", x_list = "0,0";
  int directions = 0;
  double aniso_r = 8.0;
  bool polar = false;
  std::string tiling;
  per_cmd->add_option("--nu", nu)->capture_default_str();
  per_cmd->add_option("--r-list", r_list, "increasing cube sides")->capture_default_str();
  per_cmd->add_option("--x-list", x_list, "centers 'x,y;x,y;...' (scaled by r)")
      ->capture_default_str();
  per_cmd->add_option("--directions", directions,
                      "anisotropy scan over this many directions");
  per_cmd->add_option("--aniso-r", aniso_r)->capture_default_str();
  per_cmd->add_flag("--polar", polar, "emit (angle, density) pairs");
  per_cmd->add_option("--tiling", tiling, "check tiling subadditivity at 'r,s'");
  per_cmd->add_option("--resolution", s.resolution, "grid cells per unit")
      ->capture_default_str();
  per_cmd->add_option("--max-cells", s.max_cells)->capture_default_str();
  add_integrand_options(per_cmd);
  add_solver_options(per_cmd);

  // stochastic
  auto* sto_cmd = app.add_subcommand("stochastic", "random media Monte-Carlo");
  int seeds = 16, cov_pairs = 0, subadd_pairs = 0;
  std::string r_list_sto = "4,8,16";
  sto_cmd->add_option("--nu", nu)->capture_default_str();
  sto_cmd->add_option("--r-list", r_list_sto)->capture_default_str();
  sto_cmd->add_option("--seeds", seeds, ">= 8")->capture_default_str();
  sto_cmd->add_option("--check-covariance", cov_pairs, "also run N covariance pairs");
  sto_cmd->add_option("--check-subadd", subadd_pairs, "also run N subadditivity checks");
  sto_cmd->add_option("--resolution", s.resolution)->capture_default_str();
  sto_cmd->add_option("--max-cells", s.max_cells)->capture_default_str();
  add_integrand_options(sto_cmd);
  add_solver_options(sto_cmd);

  // verify
  auto* ver_cmd = app.add_subcommand("verify", "run the invariant suite");
  std::string level = "fast";
  bool timings = false;
  ver_cmd->add_option("--level", level, "fast | full")->capture_default_str();
  ver_cmd->add_flag("--timings", timings, "include runtimes in the JSON report");

  // export-field
  auto* exp_cmd = app.add_subcommand("export-field", "write a field snapshot");
  bool solve_first = false;
  std::string format = "csv", file = "field.csv";
  exp_cmd->add_option("--nu", nu)->capture_default_str();
  exp_cmd->add_option("--rho", rho)->capture_default_str();
  exp_cmd->add_option("--eps", eps)->capture_default_str();
  exp_cmd->add_option("--N", s.cells)->capture_default_str();
  exp_cmd->add_flag("--solve", solve_first, "export the minimiser, not the datum");
  exp_cmd->add_option("--format", format, "csv | bin")->capture_default_str();
  exp_cmd->add_option("--file", file)->capture_default_str();
  add_integrand_options(exp_cmd);
  add_solver_options(exp_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cp_cmd->parsed()) return cmd_cp(s, quad_points);
    if (prof_cmd->parsed()) return cmd_profile1d(s, grid1d, half_width);
    if (cell_cmd->parsed()) return cmd_cell(s, nu, rho, eps, delta);
    if (gamma_cmd->parsed()) return cmd_gamma(s, nu, rho_list, eps_list, richardson);
    if (per_cmd->parsed())
      return cmd_periodic(s, nu, r_list, x_list, directions, aniso_r, polar, tiling);
    if (sto_cmd->parsed())
      return cmd_stochastic(s, nu, r_list_sto, seeds, cov_pairs, subadd_pairs);
    if (ver_cmd->parsed()) return cmd_verify(s, level, timings);
    if (exp_cmd->parsed())
      return cmd_export_field(s, nu, rho, eps, solve_first, format, file);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace phasecell

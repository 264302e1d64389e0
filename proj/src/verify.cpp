#include "phasecell/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "phasecell/cell.hpp"
#include "phasecell/homogenize.hpp"
#include "phasecell/parallel.hpp"
#include "phasecell/rng.hpp"
#include "phasecell/stochastic.hpp"

namespace phasecell {

namespace {

// Single source of truth for the suite's tolerances.
struct Tolerances {
  double cp_scaling_rel = 1e-8;
  double profile_slack = 0.02;       // 1D cost <= c_p (1 + slack)
  double growth_rel = 1e-12;
  double derivative_fd_rel = 1e-5;
  double frame_orth = 1e-12;
  double lattice_int = 1e-9;
  double gradient_fd_rel = 1e-5;
  double rotation_invariance_rel = 1e-10;
  double rescaling_rel = 1e-12;
  double bracket_slack = kBracketSlack;  // 0.05, slicing/datum bounds
  double mm_comparison_rel = 1e-6;
  double nu_symmetry_rel = 1e-10;
  double isotropy_ratio = 1.05;
  double x_spread_periodic = 0.05;
  double x_spread_random = 0.10;
  double stability_trend_factor = 3.0;
};

const Tolerances kTol{};

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     start)
        .count();
  }
};

Integrand homogeneous_integrand(double p = 2.0) {
  IntegrandSpec spec;
  spec.p = p;
  return make_integrand(spec);
}

Integrand laminate_integrand(int axis = 1, std::vector<double> values = {1.0, 2.0}) {
  IntegrandSpec spec;
  spec.homogeneous = false;
  spec.coefficient = CoefficientField::laminate(axis, std::move(values));
  return make_integrand(spec);
}

Integrand checkerboard_integrand(std::uint64_t seed,
                                 std::vector<double> values = {0.5, 2.0}) {
  IntegrandSpec spec;
  spec.homogeneous = false;
  spec.coefficient = CoefficientField::random_checkerboard(seed, std::move(values));
  return make_integrand(spec);
}

ScalarField noisy_admissible(const Grid& grid, const Vec& x, const Vec& nu,
                             double eps, double amplitude, std::uint64_t seed) {
  ScalarField f = init_from_datum(grid, x, nu, eps, 2.0 * grid.h);
  Rng rng(seed);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (f.clamped[i]) continue;
    f.values[i] = std::clamp(f.values[i] + amplitude * rng.symmetric(1.0), 0.0, 1.0);
  }
  return f;
}

using CheckFn = std::function<CheckResult()>;

// ---------------------------------------------------------------- potentials

CheckResult check_cp_scaling() {
  CheckResult r;
  r.name = "potentials.cp_scaling";
  r.tolerance = "relative error <= 1e-8 for lambda in {0.25, 1, 4}";
  auto w = DoubleWell::quartic();
  double worst = 0.0;
  for (double p : {1.5, 2.0, 3.0}) {
    double base = compute_cp(w, p);
    for (double lam : {0.25, 1.0, 4.0}) {
      double expected = std::pow(lam, (p - 1.0) / p) * base;
      double got = compute_cp(w.scaled(lam), p);
      worst = std::max(worst, std::abs(got - expected) / expected);
    }
  }
  r.measured.emplace_back("worst_rel_error", worst);
  r.pass = worst <= kTol.cp_scaling_rel;
  return r;
}

CheckResult check_profile_cost() {
  CheckResult r;
  r.name = "potentials.profile_cost_bracket";
  r.tolerance = "c_p - 1e-6 <= cost <= c_p (1 + 0.02)";
  auto w = DoubleWell::quartic();
  double cp = compute_cp(w, 2.0);
  auto res = optimal_profile_1d(w, 2.0, 512);
  r.measured.emplace_back("cost", res.cost);
  r.measured.emplace_back("cp", cp);
  r.pass = res.cost >= cp - 1e-6 && res.cost <= cp * (1.0 + kTol.profile_slack);
  return r;
}

CheckResult check_cu_dominates() {
  CheckResult r;
  r.name = "potentials.cu_dominates_cp";
  r.tolerance = "C_u >= c_p for all tested (W, p)";
  bool ok = true;
  double worst_margin = 1e300;
  for (const DoubleWell& w : {DoubleWell::quartic(), DoubleWell::quadratic_wells()}) {
    for (double p : {1.5, 2.0, 3.0}) {
      double cu = compute_Cu(w, TransitionProfile{}, p);
      double cp = compute_cp(w, p);
      worst_margin = std::min(worst_margin, cu - cp);
      ok = ok && cu >= cp;
    }
  }
  r.measured.emplace_back("min_margin", worst_margin);
  r.pass = ok;
  return r;
}

// ---------------------------------------------------------------- integrands

CheckResult check_growth_bounds(std::uint64_t seed) {
  CheckResult r;
  r.name = "integrands.growth_bounds";
  r.tolerance = "c1 (W + |xi|^p) <= f <= c2 (W + |xi|^p), 1000 probes each";
  Rng rng(seed);
  bool ok = true;
  double worst = 0.0;
  for (const Integrand& f :
       {homogeneous_integrand(), laminate_integrand(), checkerboard_integrand(11)}) {
    for (int k = 0; k < 1000; ++k) {
      Vec y = vec2(rng.uniform(-3, 3), rng.uniform(-3, 3));
      double u = rng.uniform01();
      Vec xi = vec2(rng.symmetric(2), rng.symmetric(2));
      double base = f.well()(u) + dot(xi, xi, 2);
      double val = f(y, u, xi, 2);
      double lo = f.c1() * base, hi = f.c2() * base;
      double slack = kTol.growth_rel * std::max(1.0, hi);
      if (val < lo - slack || val > hi + slack) ok = false;
      worst = std::max(worst, std::max(lo - val, val - hi));
    }
  }
  r.measured.emplace_back("worst_violation", worst);
  r.pass = ok;
  return r;
}

CheckResult check_zero_set(std::uint64_t seed) {
  CheckResult r;
  r.name = "integrands.zero_set";
  r.tolerance = "f(y, u, 0) = 0 iff u in {0, 1}";
  Rng rng(seed);
  bool ok = true;
  for (const Integrand& f :
       {homogeneous_integrand(), laminate_integrand(), checkerboard_integrand(42)}) {
    for (int k = 0; k < 200; ++k) {
      Vec y = vec2(rng.uniform(-3, 3), rng.uniform(-3, 3));
      if (f(y, 0.0, Vec{}, 2) != 0.0 || f(y, 1.0, Vec{}, 2) != 0.0) ok = false;
      double u = rng.uniform(0.05, 0.95);
      if (!(f(y, u, Vec{}, 2) > 0.0)) ok = false;
    }
  }
  r.pass = ok;
  return r;
}

CheckResult check_periodicity(std::uint64_t seed) {
  CheckResult r;
  r.name = "integrands.periodicity";
  r.tolerance = "f(y + z, u, xi) = f(y, u, xi) exactly for z in Z^n, 1000 probes";
  Rng rng(seed);
  bool ok = true;
  for (const Integrand& f : {laminate_integrand(), [] {
         IntegrandSpec s;
         s.homogeneous = false;
         s.coefficient = CoefficientField::checkerboard(1.0, 2.0);
         return make_integrand(s);
       }()}) {
    for (int k = 0; k < 1000; ++k) {
      Vec y = vec2(rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99));
      Vec z = vec2(std::floor(rng.uniform(-3, 4)), std::floor(rng.uniform(-3, 4)));
      double u = rng.uniform01();
      Vec xi = vec2(rng.symmetric(1), rng.symmetric(1));
      if (f(add(y, z, 2), u, xi, 2) != f(y, u, xi, 2)) ok = false;
    }
  }
  r.pass = ok;
  return r;
}

CheckResult check_random_covariance_pointwise(std::uint64_t seed) {
  CheckResult r;
  r.name = "integrands.random_shift_covariance";
  r.tolerance = "a_{tau_z omega}(y) = a_omega(y + z) exactly, 100 probes";
  Rng rng(seed);
  bool ok = true;
  Integrand f = checkerboard_integrand(7);
  for (int k = 0; k < 100; ++k) {
    std::array<std::int64_t, 3> z{static_cast<std::int64_t>(std::floor(rng.uniform(-5, 6))),
                                  static_cast<std::int64_t>(std::floor(rng.uniform(-5, 6))),
                                  0};
    Integrand fz = f.with_shifted_field(z);
    Vec y = vec2(rng.uniform(-4, 4), rng.uniform(-4, 4));
    Vec yz = vec2(y[0] + static_cast<double>(z[0]), y[1] + static_cast<double>(z[1]));
    if (fz.coefficient_at(y, 2) != f.coefficient_at(yz, 2)) ok = false;
  }
  // group property: composed shifts equal the single shift
  Integrand once = f.with_shifted_field({2, -1, 0}).with_shifted_field({-3, 4, 0});
  Integrand direct = f.with_shifted_field({-1, 3, 0});
  for (int k = 0; k < 100; ++k) {
    Vec y = vec2(rng.uniform(-4, 4), rng.uniform(-4, 4));
    if (once.coefficient_at(y, 2) != direct.coefficient_at(y, 2)) ok = false;
  }
  r.pass = ok;
  return r;
}

CheckResult check_integrand_derivatives(std::uint64_t seed) {
  CheckResult r;
  r.name = "integrands.derivatives_fd";
  r.tolerance = "df/du and df/dxi match central differences to 1e-5 relative";
  Rng rng(seed);
  double worst = 0.0;
  for (const Integrand& f : {homogeneous_integrand(2.0), homogeneous_integrand(3.0),
                             laminate_integrand()}) {
    for (int k = 0; k < 300; ++k) {
      Vec y = vec2(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95));
      double u = rng.uniform(0.05, 0.95);
      Vec xi = vec2(rng.symmetric(1.5), rng.symmetric(1.5));
      double d = 1e-6;
      double fd_u = (f(y, u + d, xi, 2) - f(y, u - d, xi, 2)) / (2 * d);
      double an_u = f.df_du(y, u, xi, 2);
      worst = std::max(worst, std::abs(fd_u - an_u) / std::max(1.0, std::abs(an_u)));
      Vec g = f.df_dxi(y, u, xi, 2);
      for (int c = 0; c < 2; ++c) {
        Vec xp = xi, xm = xi;
        xp[static_cast<std::size_t>(c)] += d;
        xm[static_cast<std::size_t>(c)] -= d;
        double fd = (f(y, u, xp, 2) - f(y, u, xm, 2)) / (2 * d);
        worst = std::max(worst, std::abs(fd - g[static_cast<std::size_t>(c)]) /
                                    std::max(1.0, std::abs(g[static_cast<std::size_t>(c)])));
      }
    }
  }
  r.measured.emplace_back("worst_rel_error", worst);
  r.pass = worst <= kTol.derivative_fd_rel;
  return r;
}

// ------------------------------------------------------------------ geometry

CheckResult check_frames(std::uint64_t seed) {
  CheckResult r;
  r.name = "geometry.frame_orthogonality";
  r.tolerance = "R^T R = I to 1e-12 and R e_n = nu, catalog and random directions";
  Rng rng(seed);
  double worst = 0.0;
  bool ok = true;
  auto probe = [&](const Vec& nu, int n) {
    RotationFrame fr = frame_for(nu, n);
    worst = std::max(worst, orthogonality_defect(fr.R, n));
    Vec image = mat_vec(fr.R, n == 2 ? vec2(0, 1) : vec3(0, 0, 1), n);
    for (int i = 0; i < n; ++i)
      if (std::abs(image[static_cast<std::size_t>(i)] - fr.nu[static_cast<std::size_t>(i)]) > 1e-12)
        ok = false;
  };
  for (const Vec& nu : catalog_directions(2)) probe(nu, 2);
  for (int k = 0; k < 100; ++k) {
    double a = rng.uniform(0, 6.283185307179586);
    probe(vec2(std::cos(a), std::sin(a)), 2);
    Vec v = vec3(rng.symmetric(1), rng.symmetric(1), rng.symmetric(1));
    if (norm(v, 3) > 0.1) probe(v, 3);
  }
  r.measured.emplace_back("worst_orthogonality_defect", worst);
  r.pass = ok && worst <= kTol.frame_orth;
  return r;
}

CheckResult check_opposite_normal(std::uint64_t seed) {
  CheckResult r;
  r.name = "geometry.opposite_normal_cube";
  r.tolerance = "vertex sets of R_{-nu} Q and R_nu Q coincide to 1e-12";
  Rng rng(seed);
  bool ok = true;
  for (int k = 0; k < 50; ++k) {
    for (int n : {2, 3}) {
      Vec nu{};
      for (int i = 0; i < n; ++i) nu[static_cast<std::size_t>(i)] = rng.symmetric(1.0);
      if (norm(nu, n) < 0.1) continue;
      Box a = box_of(make_cube(Vec{}, 1.0, nu, n));
      Box b = box_of(make_cube(Vec{}, 1.0, scale(nu, -1.0, n), n));
      auto va = box_vertices(a);
      auto vb = box_vertices(b);
      for (const Vec& p : va) {
        double best = 1e300;
        for (const Vec& q : vb) best = std::min(best, norm(sub(p, q, n), n));
        if (best > 1e-12) ok = false;
      }
    }
  }
  r.pass = ok;
  return r;
}

CheckResult check_lattice() {
  CheckResult r;
  r.name = "geometry.lattice_integrality";
  r.tolerance = "M_nu R_nu integer to 1e-9; shifts lie in Z^n and Pi^nu";
  bool ok = true;
  double worst = 0.0;
  for (const Vec& nu : catalog_directions(2)) {
    auto m = catalog_m_nu(nu, 2);
    if (!m) {
      ok = false;
      continue;
    }
    RotationFrame fr = frame_for(nu, 2);
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) {
        double v = static_cast<double>(*m) * fr.R[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
        worst = std::max(worst, std::abs(v - std::round(v)));
      }
    LatticeInterval iv = lattice_interval({0, 0}, {2, 0}, nu, 2);
    for (std::int64_t z : {-3, 1, 5}) {
      auto zv = lattice_shift_vector(iv, {z, 0});
      double along = static_cast<double>(zv[0]) * fr.nu[0] +
                     static_cast<double>(zv[1]) * fr.nu[1];
      if (std::abs(along) > 1e-12) ok = false;
    }
    // translation property (I + z')_nu = I_nu + z'_nu
    LatticeInterval shifted = lattice_interval({1, 0}, {3, 0}, nu, 2);
    auto zv = lattice_shift_vector(iv, {1, 0});
    for (int i = 0; i < 2; ++i) {
      double expected = iv.box.center[static_cast<std::size_t>(i)] + static_cast<double>(zv[static_cast<std::size_t>(i)]);
      if (std::abs(shifted.box.center[static_cast<std::size_t>(i)] - expected) > kTol.lattice_int)
        ok = false;
    }
  }
  r.measured.emplace_back("worst_integrality_defect", worst);
  r.pass = ok && worst <= kTol.lattice_int;
  return r;
}

CheckResult check_datum_structure(std::uint64_t seed) {
  CheckResult r;
  r.name = "geometry.datum_structure";
  r.tolerance = "regularised datum monotone along nu, constant tangentially";
  Rng rng(seed);
  TransitionProfile prof;
  bool ok = true;
  for (int k = 0; k < 20; ++k) {
    double a = rng.uniform(0, 6.283185307179586);
    Vec nu = vec2(std::cos(a), std::sin(a));
    Vec x = vec2(rng.symmetric(1), rng.symmetric(1));
    double eps = rng.uniform(0.05, 0.5);
    Vec tang = vec2(-nu[1], nu[0]);
    double prev = -1.0;
    for (int j = -20; j <= 20; ++j) {
      Vec y = add(x, scale(nu, 0.1 * j * eps, 2), 2);
      double v = regularised_datum(x, nu, eps, prof, y, 2);
      if (v < prev - 1e-15) ok = false;
      prev = v;
      double vt = regularised_datum(x, nu, eps, prof, add(y, scale(tang, 3.7, 2), 2), 2);
      if (std::abs(vt - v) > 1e-12) ok = false;
    }
    // coincides with the jump away from the slab
    Vec far = add(x, scale(nu, 2.0 * eps, 2), 2);
    if (regularised_datum(x, nu, eps, prof, far, 2) != 1.0) ok = false;
    Vec near = add(x, scale(nu, -2.0 * eps, 2), 2);
    if (regularised_datum(x, nu, eps, prof, near, 2) != 0.0) ok = false;
  }
  r.pass = ok;
  return r;
}

// -------------------------------------------------------------------- fields

CheckResult check_gradient_fd(std::uint64_t seed, bool full) {
  CheckResult r;
  r.name = "fields.gradient_fd";
  r.tolerance = "analytic gradient matches central differences to 1e-5 relative";
  std::vector<Integrand> fs{homogeneous_integrand()};
  if (full) {
    fs.push_back(laminate_integrand());
    fs.push_back(checkerboard_integrand(5));
  }
  double worst = 0.0;
  Rng pick(seed);
  for (const Integrand& f : fs) {
    RotatedCube cube = make_cube(Vec{}, 1.0, vec2(0.6, 0.8), 2);
    Grid grid = make_grid(cube, 24);
    for (int trial = 0; trial < 10; ++trial) {
      ScalarField u = noisy_admissible(grid, Vec{}, vec2(0.6, 0.8), 0.25, 0.3,
                                       seed + static_cast<std::uint64_t>(trial));
      // keep probe values interior so the FD step cannot leave [0,1]
      for (auto& v : u.values) v = 0.2 + 0.6 * v;
      u.enforce_clamp();
      EnergyWorkspace ws = make_workspace(f, grid);
      std::vector<double> grad;
      energy_gradient_into(f, u, 0.25, ws, grad);
      for (int probe = 0; probe < 5; ++probe) {
        std::size_t idx = static_cast<std::size_t>(pick.next_u64() % u.values.size());
        if (u.clamped[idx]) continue;
        double d = 1e-6;
        double saved = u.values[idx];
        u.values[idx] = saved + d;
        double ep = energy_total(f, u, 0.25, ws);
        u.values[idx] = saved - d;
        double em = energy_total(f, u, 0.25, ws);
        u.values[idx] = saved;
        double fd = (ep - em) / (2 * d);
        worst = std::max(worst, std::abs(fd - grad[idx]) / std::max(1.0, std::abs(grad[idx])));
      }
    }
  }
  r.measured.emplace_back("worst_rel_error", worst);
  r.pass = worst <= kTol.gradient_fd_rel;
  return r;
}

CheckResult check_rotation_invariance(std::uint64_t seed) {
  CheckResult r;
  r.name = "fields.rotation_invariance";
  r.tolerance = "homogeneous energies agree across catalogued frames to 1e-10";
  Integrand f = homogeneous_integrand();
  double worst = 0.0;
  for (const Vec& nu : {vec2(0, 1), vec2(0.6, 0.8), vec2(-0.8, 0.6),
                        vec2(5.0 / 13, 12.0 / 13)}) {
    RotatedCube cube = make_cube(Vec{}, 1.0, nu, 2);
    Grid grid = make_grid(cube, 32);
    ScalarField u = noisy_admissible(grid, Vec{}, nu, 0.2, 0.3, seed);
    // same nodal values on the axis-aligned cube
    RotatedCube ref = make_cube(Vec{}, 1.0, vec2(0, 1), 2);
    Grid gref = make_grid(ref, 32);
    ScalarField v = init_from_datum(gref, Vec{}, vec2(0, 1), 0.2, 2.0 * gref.h);
    v.values = u.values;
    double e1 = energy(f, u, 0.2).total;
    double e2 = energy(f, v, 0.2).total;
    worst = std::max(worst, std::abs(e1 - e2) / std::max(1e-300, std::abs(e1)));
  }
  r.measured.emplace_back("worst_rel_error", worst);
  r.pass = worst <= kTol.rotation_invariance_rel;
  return r;
}

CheckResult check_rescaling_identity() {
  CheckResult r;
  r.name = "fields.rescaling_identity";
  r.tolerance = "F_eps(u, Q_rho) = eps^{n-1} F_1(u(eps .), Q_{rho/eps}) to 1e-12";
  double worst = 0.0;
  for (double eps : {0.25, 0.125}) {
    CellProblem p;
    p.f = laminate_integrand();
    p.nu = vec2(0, 1);
    p.rho = 1.0;
    p.eps = eps;
    p.cells = 64;
    RescalingReport rep = check_rescaling(p, 10, 77);
    worst = std::max(worst, rep.worst_rel);
  }
  r.measured.emplace_back("worst_rel_error", worst);
  r.pass = worst <= kTol.rescaling_rel;
  return r;
}

CheckResult check_datum_upper_bound() {
  CheckResult r;
  r.name = "fields.datum_upper_bound";
  r.tolerance = "E(datum) <= c2 C_u rho^{n-1} (1 + 0.05)";
  bool ok = true;
  double worst_ratio = 0.0;
  for (const Integrand& f : {homogeneous_integrand(), laminate_integrand()}) {
    double cu = compute_Cu(f.well(), TransitionProfile{}, f.p());
    for (double eps : {0.125, 0.0625}) {
      RotatedCube cube = make_cube(Vec{}, 1.0, vec2(0, 1), 2);
      Grid grid = make_grid(cube, 96);
      ScalarField u = init_from_datum(grid, Vec{}, vec2(0, 1), eps, 2.0 * grid.h);
      double e = energy(f, u, eps).total;
      double bound = f.c2() * cu * (1.0 + kTol.bracket_slack);
      worst_ratio = std::max(worst_ratio, e / bound);
      ok = ok && e <= bound;
    }
  }
  r.measured.emplace_back("worst_ratio_vs_bound", worst_ratio);
  r.pass = ok;
  return r;
}

// -------------------------------------------------------------------- solver

CheckResult check_solver_determinism(std::uint64_t seed) {
  CheckResult r;
  r.name = "solver.determinism";
  r.tolerance = "identical inputs give bit-identical outcomes";
  Integrand f = checkerboard_integrand(seed);
  RotatedCube cube = make_cube(Vec{}, 4.0, vec2(0, 1), 2);
  Grid grid = make_grid(cube, 32);
  ScalarField F0 = init_from_datum(grid, Vec{}, vec2(0, 1), 1.0, 2.0 * grid.h);
  SolverConfig cfg;
  SolveOutcome a = minimise(f, F0, 1.0, cfg);
  SolveOutcome b = minimise(f, F0, 1.0, cfg);
  bool ok = a.energy == b.energy && a.iterations == b.iterations &&
            a.field.values == b.field.values;
  r.measured.emplace_back("energy", a.energy);
  r.pass = ok;
  return r;
}

CheckResult check_solver_envelope(std::uint64_t seed) {
  CheckResult r;
  r.name = "solver.monotone_envelope";
  r.tolerance = "final energy <= initial energy; iterates feasible";
  Integrand f = homogeneous_integrand();
  RotatedCube cube = make_cube(Vec{}, 1.0, vec2(0.6, 0.8), 2);
  Grid grid = make_grid(cube, 48);
  bool ok = true;
  for (int k = 0; k < 3; ++k) {
    ScalarField F0 = noisy_admissible(grid, Vec{}, vec2(0.6, 0.8), 0.125, 0.4,
                                      seed + static_cast<std::uint64_t>(k));
    double e0 = energy(f, F0, 0.125).total;
    SolverConfig cfg;
    cfg.max_iters = 400;
    SolveOutcome out = minimise(f, F0, 0.125, cfg);
    if (out.energy > e0) ok = false;
    for (std::size_t i = 0; i < out.field.values.size(); ++i) {
      double v = out.field.values[i];
      if (v < 0.0 || v > 1.0) ok = false;
      if (out.field.clamped[i] && v != out.field.datum[i]) ok = false;
    }
  }
  r.pass = ok;
  return r;
}

// ---------------------------------------------------------------------- cell

CheckResult check_cell_bracketing() {
  CheckResult r;
  r.name = "cell.bracketing_and_slicing";
  r.tolerance = "c1 c_p (1-0.05) <= density <= c2 C_u (1+0.05)";
  CellProblem p;
  p.f = homogeneous_integrand();
  p.nu = vec2(0, 1);
  p.rho = 1.0;
  p.eps = 1.0 / 16.0;
  p.cells = 64;
  CellResult res = solve_cell(p);
  r.measured.emplace_back("density", res.density);
  r.measured.emplace_back("lower", res.lower_bound);
  r.measured.emplace_back("upper", res.upper_bound);
  r.pass = res.bracket_ok;
  return r;
}

CheckResult check_mm_comparison(std::uint64_t seed) {
  CheckResult r;
  r.name = "cell.mm_comparison";
  r.tolerance = "c1 M(u) <= F(u) <= c2 M(u) at evaluated fields, 1e-6 relative";
  Integrand f = laminate_integrand();
  Integrand mm = homogeneous_integrand();
  RotatedCube cube = make_cube(Vec{}, 1.0, vec2(0, 1), 2);
  Grid grid = make_grid(cube, 48);
  bool ok = true;
  for (int k = 0; k < 5; ++k) {
    ScalarField u = noisy_admissible(grid, Vec{}, vec2(0, 1), 0.125, 0.3,
                                     seed + static_cast<std::uint64_t>(k));
    double ef = energy(f, u, 0.125).total;
    double em = energy(mm, u, 0.125).total;
    double slack = kTol.mm_comparison_rel * em;
    if (ef < f.c1() * em - slack || ef > f.c2() * em + slack) ok = false;
  }
  r.pass = ok;
  return r;
}

CheckResult check_nu_symmetry() {
  CheckResult r;
  r.name = "cell.nu_symmetry";
  r.tolerance = "densities at nu and -nu agree to 1e-10 (symmetric well)";
  CellProblem p;
  p.f = homogeneous_integrand();
  p.nu = vec2(0.6, 0.8);
  p.rho = 1.0;
  p.eps = 1.0 / 8.0;
  p.cells = 48;
  CellResult plus = solve_cell(p);
  p.nu = vec2(-0.6, -0.8);
  CellResult minus = solve_cell(p);
  double rel = std::abs(plus.density - minus.density) / plus.density;
  r.measured.emplace_back("rel_difference", rel);
  r.pass = rel <= kTol.nu_symmetry_rel;
  return r;
}

CheckResult check_monotonicity(bool laminate) {
  CheckResult r;
  r.name = laminate ? "cell.monotonicity_surrogate_laminate"
                    : "cell.monotonicity_surrogate";
  r.tolerance = "m(Q_rho') <= m(Q_rho) + c2 C_u (rho'^{n-1} - rho^{n-1}) + 10 tol_pg";
  Integrand f = laminate ? laminate_integrand() : homogeneous_integrand();
  CellProblem base;
  base.f = f;
  base.nu = vec2(0, 1);
  base.eps = 1.0 / 16.0;
  base.cells = 64;
  DensityEstimate est = estimate_density(f, Vec{}, vec2(0, 1), 2, {1.0, 0.75, 0.5},
                                         {1.0 / 16.0}, base);
  r.pass = est.monotonicity_ok && !est.monotonicity.empty();
  for (const auto& mc : est.monotonicity) {
    r.measured.emplace_back("lhs_rho_" + std::to_string(mc.rho_large), mc.lhs);
    r.measured.emplace_back("rhs_rho_" + std::to_string(mc.rho_large), mc.rhs);
  }
  return r;
}

CheckResult check_glue(std::uint64_t seed) {
  CheckResult r;
  r.name = "fields.fundamental_estimate";
  r.tolerance = "E(w) <= E(u,A') + E(v,B) + omega_hat; pure phases cost 0";
  Integrand f = homogeneous_integrand();
  double eps = 0.1;
  RotatedCube cube = make_cube(Vec{}, 1.0, vec2(0, 1), 2);
  Grid grid = make_grid(cube, 64);
  // datum-compatible pair: same (x, nu, eps), cubes offset by one cell
  ScalarField u = init_from_datum(grid, Vec{}, vec2(0, 1), eps, 2.0 * grid.h);
  RotatedCube cube2 = cube;
  cube2.x = add(cube.x, scale(vec2(1, 0), grid.h, 2), 2);
  Grid grid2 = make_grid(cube2, 64);
  ScalarField v = init_from_datum(grid2, Vec{}, vec2(0, 1), eps, 2.0 * grid2.h);
  GlueResult g = glue(f, u, v, eps, 4, 0.25);
  bool ok = g.inequality_ok && g.field.satisfies_clamp(1e-12);

  // pure phases: zero gluing cost exactly
  ScalarField u0 = u, v0 = v;
  std::fill(u0.values.begin(), u0.values.end(), 0.0);
  std::fill(v0.values.begin(), v0.values.end(), 0.0);
  std::fill(u0.datum.begin(), u0.datum.end(), 0.0);
  std::fill(v0.datum.begin(), v0.datum.end(), 0.0);
  GlueResult g0 = glue(f, u0, v0, eps, 4, 0.25);
  ok = ok && g0.omega_hat == 0.0 && g0.energy_glued == 0.0;
  (void)seed;
  r.measured.emplace_back("omega_hat", g.omega_hat);
  r.measured.emplace_back("energy_glued", g.energy_glued);
  r.pass = ok;
  return r;
}

// ------------------------------------------------- stability trend checks

CheckResult check_shift_stability() {
  CheckResult r;
  r.name = "stability.cube_shift_trend";
  r.tolerance =
      "excess m(Q_r~(x~)) - m(Q_r(x)) grows at most linearly: slope ratios <= 3";
  Integrand f = homogeneous_integrand();
  HomogenizeConfig cfg;
  cfg.resolution = 8;
  auto m_of = [&](const Vec& x, double rr) {
    CellProblem p;
    p.f = f;
    p.nu = vec2(0, 1);
    p.rho = rr;
    p.eps = 1.0;
    p.cells = static_cast<int>(std::round(rr * cfg.resolution));
    p.x = x;
    p.delta_bc = 2.0 * rr / p.cells;
    return solve_cell(p).m_hat;
  };
  double base = m_of(Vec{}, 5.0);
  struct Design {
    Vec x;
    double r;
  };
  std::vector<Design> designs{{vec2(0, 0), 8.0},
                              {vec2(0.4, 0), 8.0},
                              {vec2(0.8, 0.2), 10.0},
                              {vec2(1.5, 0), 12.0}};
  std::vector<double> slopes;
  for (const auto& d : designs) {
    double excess = m_of(d.x, d.r) - base;
    double denom = (norm(d.x, 2) + std::abs(d.r - 5.0) + 1.0);
    slopes.push_back(std::max(0.0, excess) / denom);
    r.measured.emplace_back("slope_r_" + std::to_string(d.r), slopes.back());
  }
  double lo = 1e300, hi = 0.0;
  for (double s : slopes) {
    if (s > 0.0) lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  r.pass = (hi == 0.0) || (hi <= kTol.stability_trend_factor * lo);
  return r;
}

CheckResult check_rotation_stability() {
  CheckResult r;
  r.name = "stability.normal_continuity_trend";
  r.tolerance = "|m(Q^nu~_{(1+a)r}) - m(Q^nu_r)| / r^{n-1} decreases with (a, |nu-nu~|)";
  Integrand f = homogeneous_integrand();
  double rr = 6.0;
  int res = 10;
  auto m_of = [&](const Vec& nu, double side) {
    CellProblem p;
    p.f = f;
    p.nu = nu;
    p.rho = side;
    p.eps = 1.0;
    p.cells = static_cast<int>(std::round(side * res));
    p.delta_bc = 2.0 * side / p.cells;
    return solve_cell(p).m_hat;
  };
  double base = m_of(vec2(0, 1), rr);
  struct Design {
    double alpha, theta;
  };
  std::vector<Design> designs{{0.3, 0.15}, {0.2, 0.10}, {0.1, 0.05}};
  std::vector<double> devs;
  for (const auto& d : designs) {
    Vec nut = vec2(std::sin(d.theta), std::cos(d.theta));
    double m = m_of(nut, (1.0 + d.alpha) * rr);
    devs.push_back(std::abs(m - base) / rr);
    r.measured.emplace_back("deviation_alpha_" + std::to_string(d.alpha), devs.back());
  }
  bool ok = true;
  for (std::size_t i = 1; i < devs.size(); ++i)
    if (devs[i] > devs[i - 1] + 1e-3) ok = false;
  r.pass = ok;
  return r;
}

// ----------------------------------------------------------------- full level

CheckResult check_isotropy_mini() {
  CheckResult r;
  r.name = "homogenize.isotropy";
  r.tolerance = "homogeneous f: max/min density ratio <= 1.05 over directions";
  Integrand f = homogeneous_integrand();
  HomogenizeConfig cfg;
  cfg.resolution = 8;
  std::vector<Vec> dirs{vec2(0, 1), vec2(1, 0), vec2(0.6, 0.8),
                        vec2(std::sqrt(0.5), std::sqrt(0.5))};
  auto scan = anisotropy_scan(f, dirs, 2, 6.0, cfg);
  double lo = 1e300, hi = 0.0;
  for (const auto& e : scan) {
    lo = std::min(lo, e.density);
    hi = std::max(hi, e.density);
  }
  r.measured.emplace_back("ratio", hi / lo);
  r.pass = hi / lo <= kTol.isotropy_ratio;
  return r;
}

CheckResult check_x_independence_periodic() {
  CheckResult r;
  r.name = "homogenize.x_independence";
  r.tolerance = "periodic integrand: relative x-spread <= 0.05 at the largest r";
  Integrand f = laminate_integrand();
  HomogenizeConfig cfg;
  cfg.resolution = 8;
  auto run = homogenize_direction(f, vec2(0, 1), 2, {vec2(0, 0), vec2(0.3, 0.7)},
                                  {4.0, 8.0}, cfg);
  r.measured.emplace_back("x_spread", run.x_spread);
  r.measured.emplace_back("f_hom_est", run.f_hom_est);
  r.pass = run.x_spread <= kTol.x_spread_periodic;
  return r;
}

CheckResult check_tiling() {
  CheckResult r;
  r.name = "homogenize.tiling_subadditivity";
  r.tolerance = "density(s) <= density(r) + c2 C_u (1 - r^{n-1}(1/(r+1)-1/s)^{n-1})";
  Integrand f = laminate_integrand();
  HomogenizeConfig cfg;
  cfg.resolution = 8;
  TilingReport rep = check_tiling_subadditivity(f, vec2(0, 1), 2, 5.0, 18.0, cfg);
  r.measured.emplace_back("density_r", rep.density_r);
  r.measured.emplace_back("density_s", rep.density_s);
  r.measured.emplace_back("competitor_density", rep.competitor_density);
  r.measured.emplace_back("bound", rep.bound);
  r.measured.emplace_back("tiles", static_cast<double>(rep.tile_count));
  r.pass = rep.inequality_ok && rep.competitor_admissible && rep.competitor_dominates;
  return r;
}

CheckResult check_mu_bounds(std::uint64_t seed) {
  CheckResult r;
  r.name = "stochastic.mu_bounds";
  r.tolerance = "0 <= mu <= c2 C_u L^{n-1}(I) (1 + 0.05)";
  StochasticConfig cfg;
  bool ok = true;
  for (int k = 0; k < 4; ++k) {
    SubadditiveSample s =
        mu_nu(seed + static_cast<std::uint64_t>(k), {0, 0}, {k % 2 ? 2 : 1, 0},
              vec2(0, 1), 2, cfg);
    ok = ok && s.bound_ok;
    if (k == 0) r.measured.emplace_back("mu_sample", s.mu);
  }
  r.pass = ok;
  return r;
}

CheckResult check_stochastic_covariance(std::uint64_t seed) {
  CheckResult r;
  r.name = "stochastic.shift_covariance";
  r.tolerance = "mu(omega, I+z') = mu(tau z' omega, I) to 1e-9";
  StochasticConfig cfg;
  bool ok = true;
  double worst = 0.0;
  for (std::int64_t z : {0, 1, -2}) {
    CovarianceReport rep =
        check_covariance(seed, {0, 0}, {1, 0}, {z, 0}, vec2(0, 1), 2, cfg);
    ok = ok && rep.ok;
    worst = std::max(worst, std::abs(rep.diff));
  }
  r.measured.emplace_back("worst_diff", worst);
  r.pass = ok;
  return r;
}

CheckResult check_stochastic_subadditivity(std::uint64_t seed) {
  CheckResult r;
  r.name = "stochastic.subadditivity";
  r.tolerance = "mu(I) <= sum mu(I_i) + parts * 10 tol_pg; filler cost 0";
  StochasticConfig cfg;
  bool ok = true;
  for (int k = 0; k < 3; ++k) {
    SubadditivityReport rep = check_subadditivity(
        seed + static_cast<std::uint64_t>(k), 0, 2, {{0, 1}, {1, 2}}, vec2(0, 1), cfg);
    ok = ok && rep.ok && rep.filler_energy == 0.0 && rep.competitor_dominates;
    if (k == 0) {
      r.measured.emplace_back("mu_whole", rep.mu_whole);
      r.measured.emplace_back("mu_parts_sum", rep.mu_parts_sum);
    }
  }
  r.pass = ok;
  return r;
}

CheckResult check_ergodic_mini(std::uint64_t seed) {
  CheckResult r;
  r.name = "stochastic.ergodic_concentration";
  r.tolerance = "sample std decreases from the smallest to the largest r";
  StochasticConfig cfg;
  cfg.master_seed = seed;
  ErgodicEstimate est = ergodic_estimate(vec2(0, 1), 2, {4.0, 8.0}, 8, cfg);
  r.measured.emplace_back("std_r4", est.levels.front().stddev);
  r.measured.emplace_back("std_r8", est.levels.back().stddev);
  r.measured.emplace_back("mean_r8", est.f_hom_est);
  double cp = compute_cp(cfg.well, cfg.p);
  bool bracket = est.f_hom_est >= 0.5 * cp * 0.95 && est.f_hom_est <= 2.0 * cp * 1.08;
  r.pass = est.std_decreasing && bracket;
  return r;
}

CheckResult check_stochastic_x_independence(std::uint64_t seed) {
  CheckResult r;
  r.name = "stochastic.x_independence";
  r.tolerance =
      "degenerate field: spread < 0.02 (hard); random field: spread reported "
      "with its 0.10 flag (qualitative, rate-free limit)";
  StochasticConfig degenerate;
  degenerate.values = {1.3};
  XIndependenceReport det = check_x_independence(
      seed, vec2(0, 1), 2, {vec2(0, 0), vec2(0.3, 0.7)}, 8.0, degenerate);
  StochasticConfig cfg;
  XIndependenceReport rnd = check_x_independence(
      seed, vec2(0, 1), 2, {vec2(0, 0), vec2(0.3, 0.7)}, 16.0, cfg);
  r.measured.emplace_back("degenerate_spread", det.spread);
  r.measured.emplace_back("random_spread_r16", rnd.spread);
  r.measured.emplace_back("random_flagged", rnd.flagged ? 1.0 : 0.0);
  r.pass = det.spread < 0.02;
  return r;
}

}  // namespace

VerifyReport run_suite(VerifyLevel level, std::uint64_t master_seed, int jobs) {
  std::vector<CheckFn> checks;
  std::uint64_t s = splitmix64(master_seed);

  checks.push_back([] { return check_cp_scaling(); });
  checks.push_back([] { return check_profile_cost(); });
  checks.push_back([] { return check_cu_dominates(); });
  checks.push_back([s] { return check_growth_bounds(s + 1); });
  checks.push_back([s] { return check_zero_set(s + 2); });
  checks.push_back([s] { return check_periodicity(s + 3); });
  checks.push_back([s] { return check_random_covariance_pointwise(s + 4); });
  checks.push_back([s] { return check_integrand_derivatives(s + 5); });
  checks.push_back([s] { return check_frames(s + 6); });
  checks.push_back([s] { return check_opposite_normal(s + 7); });
  checks.push_back([] { return check_lattice(); });
  checks.push_back([s] { return check_datum_structure(s + 8); });
  bool full = level == VerifyLevel::Full;
  checks.push_back([s, full] { return check_gradient_fd(s + 9, full); });
  checks.push_back([s] { return check_rotation_invariance(s + 10); });
  checks.push_back([] { return check_rescaling_identity(); });
  checks.push_back([] { return check_datum_upper_bound(); });
  checks.push_back([s] { return check_solver_determinism(s + 11); });
  checks.push_back([s] { return check_solver_envelope(s + 12); });
  checks.push_back([] { return check_cell_bracketing(); });
  checks.push_back([s] { return check_mm_comparison(s + 13); });
  checks.push_back([] { return check_nu_symmetry(); });
  checks.push_back([] { return check_monotonicity(false); });
  checks.push_back([s] { return check_glue(s + 14); });
  checks.push_back([] { return check_shift_stability(); });
  checks.push_back([] { return check_rotation_stability(); });

  if (full) {
    checks.push_back([] { return check_monotonicity(true); });
    checks.push_back([] { return check_isotropy_mini(); });
    checks.push_back([] { return check_x_independence_periodic(); });
    checks.push_back([] { return check_tiling(); });
    checks.push_back([s] { return check_mu_bounds(s + 15); });
    checks.push_back([s] { return check_stochastic_covariance(s + 16); });
    checks.push_back([s] { return check_stochastic_subadditivity(s + 17); });
    checks.push_back([s] { return check_ergodic_mini(s + 18); });
    checks.push_back([s] { return check_stochastic_x_independence(s + 19); });
  }

  VerifyReport report;
  report.level = level;
  report.master_seed = master_seed;
  report.checks.resize(checks.size());
  parallel_for(checks.size(), jobs, [&](std::size_t i) {
    Timer t;
    CheckResult res;
    try {
      res = checks[i]();
    } catch (const std::exception& e) {
      res.name = "check_" + std::to_string(i) + "_exception";
      res.pass = false;
      res.tolerance = e.what();
    }
    res.runtime_ms = t.ms();
    report.checks[i] = std::move(res);
  });
  report.overall = true;
  for (const auto& c : report.checks) report.overall = report.overall && c.pass;
  return report;
}

std::string report_to_json(const VerifyReport& report, bool with_timings) {
  nlohmann::ordered_json j;
  j["level"] = report.level == VerifyLevel::Fast ? "fast" : "full";
  j["seed"] = report.master_seed;
  j["overall"] = report.overall ? "pass" : "fail";
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& c : report.checks) {
    nlohmann::ordered_json jc;
    jc["name"] = c.name;
    jc["status"] = c.pass ? "pass" : "fail";
    nlohmann::ordered_json meas = nlohmann::ordered_json::object();
    for (const auto& [k, v] : c.measured) meas[k] = v;
    jc["measured"] = meas;
    jc["tolerance"] = c.tolerance;
    if (with_timings) jc["runtime_ms"] = c.runtime_ms;
    arr.push_back(jc);
  }
  j["checks"] = arr;
  return j.dump(2) + "\n";
}

}  // namespace phasecell

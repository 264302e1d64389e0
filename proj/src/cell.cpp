#include "phasecell/cell.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "phasecell/rng.hpp"

namespace phasecell {

namespace {

double effective_delta_bc(const CellProblem& p, double h) {
  double d = p.delta_bc > 0.0 ? p.delta_bc : 2.0 * h;
  if (d < 2.0 * h * (1.0 - 1e-12))
    throw std::invalid_argument("solve_cell: delta_bc must be >= 2h");
  return d;
}

CellResult package(const CellProblem& p, const SolveOutcome& out, double h) {
  (void)h;
  CellResult r;
  r.m_hat = out.energy;
  r.density = out.energy / std::pow(p.rho, p.n - 1);
  double cp = compute_cp(p.f.well(), p.f.p());
  double cu = compute_Cu(p.f.well(), TransitionProfile{}, p.f.p());
  r.lower_bound = p.f.c1() * cp * (1.0 - kBracketSlack);
  r.upper_bound = p.f.c2() * cu * (1.0 + kBracketSlack);
  r.bracket_ok = (r.density >= r.lower_bound && r.density <= r.upper_bound);
  r.converged = out.converged;
  r.iterations = out.iterations;
  r.pg_norm = out.pg_norm;
  r.tol_pg_abs = out.tol_pg_abs;
  r.rho = p.rho;
  r.eps = p.eps;
  r.cells = p.cells;
  return r;
}

}  // namespace

CellSolve solve_cell_field(const CellProblem& p) {
  if (!(p.rho > 2.0 * p.eps))
    throw std::invalid_argument("solve_cell: need rho > 2 eps");
  RotatedCube cube = make_cube(p.x, p.rho, p.nu, p.n);
  Grid grid = make_grid(cube, p.cells);
  double delta = effective_delta_bc(p, grid.h);
  ScalarField F0 = init_from_datum(grid, p.x, p.nu, p.eps, delta);
  SolveOutcome out = multi_start(p.f, F0, p.eps, p.solver);
  CellSolve cs;
  cs.result = package(p, out, grid.h);
  cs.field = std::move(out.field);
  return cs;
}

CellResult solve_cell(const CellProblem& p) { return solve_cell_field(p).result; }

CellResult solve_cell_delta(const CellProblem& p, double delta) {
  if (!(p.rho > delta && delta > 2.0 * p.eps))
    throw std::invalid_argument("solve_cell_delta: need rho > delta > 2 eps");
  CellProblem q = p;
  q.delta_bc = 0.5 * delta;
  return solve_cell(q);
}

ScalarField extend_by_datum(const ScalarField& inner, double outer_rho,
                            double outer_delta_bc) {
  const Grid& gi = inner.grid;
  int n = gi.n;
  double rho_in = gi.box.sides[0];
  for (int i = 1; i < n; ++i)
    if (std::abs(gi.box.sides[static_cast<std::size_t>(i)] - rho_in) > 1e-12)
      throw std::invalid_argument("extend_by_datum: inner field must live on a cube");
  if (!(outer_rho > rho_in))
    throw std::invalid_argument("extend_by_datum: outer cube must be larger");
  double h = gi.h;
  double margin = 0.5 * (outer_rho - rho_in);
  double layers = margin / h;
  if (std::abs(layers - std::round(layers)) > 1e-9)
    throw std::invalid_argument("extend_by_datum: (rho'-rho)/2 must be divisible by h");
  int off = static_cast<int>(std::round(layers));

  RotatedCube outer;
  outer.x = gi.box.center;
  outer.rho = outer_rho;
  outer.frame = gi.box.frame;
  Grid go = make_grid(outer, gi.cells[0] + 2 * off);

  const DatumSpec& ds = inner.datum_spec;
  TransitionProfile prof(ds.profile_width);
  std::optional<double> forced;
  // preserve an exactly-zero phase offset (lattice boxes)
  bool aligned = true;
  for (int i = 0; i < n; ++i)
    if (std::abs(ds.nu[static_cast<std::size_t>(i)] -
                 gi.box.frame.nu[static_cast<std::size_t>(i)]) > 1e-14)
      aligned = false;
  if (aligned) forced = ds.phase_offset;
  ScalarField out = init_from_datum(go, ds.x, ds.nu, ds.eps, outer_delta_bc, prof, forced);

  auto nodes_in = gi.nodes_per_axis();
  for (int i2 = 0; i2 < nodes_in[2]; ++i2)
    for (int i1 = 0; i1 < nodes_in[1]; ++i1)
      for (int i0 = 0; i0 < nodes_in[0]; ++i0) {
        std::size_t src = gi.node_index(i0, i1, i2);
        std::size_t dst = go.node_index(i0 + off, i1 + off, n == 3 ? i2 + off : 0);
        out.values[dst] = inner.values[src];
      }
  out.enforce_clamp();
  return out;
}

DensityEstimate estimate_density(const Integrand& f, const Vec& x, const Vec& nu,
                                 int n, const std::vector<double>& rho_list,
                                 const std::vector<double>& eps_list,
                                 const CellProblem& base, bool richardson) {
  if (rho_list.empty() || eps_list.empty())
    throw std::invalid_argument("estimate_density: empty sweep lists");
  for (std::size_t i = 1; i < rho_list.size(); ++i)
    if (rho_list[i] >= rho_list[i - 1])
      throw std::invalid_argument("estimate_density: rho_list must decrease");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (eps_list[i] >= eps_list[i - 1])
      throw std::invalid_argument("estimate_density: eps_list must decrease");

  DensityEstimate est;
  est.x = x;
  est.nu = frame_for(nu, n).nu;

  struct Solved {
    double rho, eps;
    CellResult res;
    ScalarField field;
  };
  std::vector<Solved> solved;

  // one spacing h across the sweep: base.cells counts cells at the largest
  // rho, smaller cubes get proportionally fewer, so consecutive solutions can
  // be extended by their datum onto the next cube exactly
  double rho_max = rho_list.front();
  for (double rho : rho_list) {
    for (double eps : eps_list) {
      if (!(rho > 2.0 * eps)) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "skipped infeasible pair rho=%g eps=%g (needs rho > 2 eps)",
                      rho, eps);
        est.warnings.emplace_back(buf);
        continue;
      }
      CellProblem p = base;
      p.f = f;
      p.x = x;
      p.nu = nu;
      p.n = n;
      p.rho = rho;
      p.eps = eps;
      double cells = base.cells * rho / rho_max;
      p.cells = static_cast<int>(std::round(cells));
      if (std::abs(cells - p.cells) > 1e-9)
        est.warnings.emplace_back("cells * rho / rho_max is not an integer; grids "
                                  "will not nest exactly");
      CellSolve cs = solve_cell_field(p);
      est.table.push_back({rho, eps, p.cells, cs.result.density, cs.result.m_hat,
                           cs.result.converged, cs.result.iterations});
      solved.push_back({rho, eps, cs.result, std::move(cs.field)});
    }
  }
  if (solved.empty()) throw std::invalid_argument("estimate_density: no feasible pairs");

  // finest corner: smallest rho, then smallest eps within it
  double rho_min = rho_list.back();
  const Solved* corner = nullptr;
  for (const auto& s : solved)
    if (s.rho == rho_min && (!corner || s.eps < corner->eps)) corner = &s;
  if (!corner) corner = &solved.back();
  est.f_prime_est = corner->res.density;
  est.f_dprime_est = corner->res.density;  // same deterministic sweep

  // trend: spread of the last three eps entries at the finest rho
  std::vector<double> finest;
  for (const auto& s : solved)
    if (s.rho == rho_min) finest.push_back(s.res.density);
  if (finest.size() >= 2) {
    std::size_t k = std::min<std::size_t>(3, finest.size());
    double lo = finest[finest.size() - k], hi = lo;
    for (std::size_t i = finest.size() - k; i < finest.size(); ++i) {
      lo = std::min(lo, finest[i]);
      hi = std::max(hi, finest[i]);
    }
    est.trend_spread = (hi - lo) / std::max(1e-300, std::abs(finest.back()));
  }

  if (richardson && finest.size() >= 2) {
    est.richardson_enabled = true;
    est.richardson_est = 2.0 * finest[finest.size() - 1] - finest[finest.size() - 2];
  }

  // monotonicity surrogate between consecutive rho at the finest common eps
  double cu = compute_Cu(f.well(), TransitionProfile{}, f.p());
  est.monotonicity_ok = true;
  for (std::size_t i = 0; i + 1 < rho_list.size(); ++i) {
    double rho_large = rho_list[i], rho_small = rho_list[i + 1];
    const Solved *large = nullptr, *small = nullptr;
    for (const auto& s : solved) {
      if (s.rho == rho_large && (!large || s.eps < large->eps)) large = &s;
      if (s.rho == rho_small && (!small || s.eps < small->eps)) small = &s;
    }
    if (!large || !small || large->eps != small->eps) continue;
    MonotonicityCheck mc;
    mc.rho_small = rho_small;
    mc.rho_large = rho_large;
    mc.lhs = large->res.m_hat;
    double tol = 10.0 * std::max(large->res.tol_pg_abs, small->res.tol_pg_abs);
    mc.rhs = small->res.m_hat +
             f.c2() * cu * (std::pow(rho_large, n - 1) - std::pow(rho_small, n - 1)) + tol;
    // explicit competitor: the small solution extended by its datum
    double h = small->field.grid.h;
    double off = 0.5 * (rho_large - rho_small) / h;
    if (std::abs(off - std::round(off)) < 1e-9) {
      ScalarField ext = extend_by_datum(small->field, rho_large,
                                        small->field.datum_spec.delta_bc);
      mc.extension = energy(f, ext, small->eps).total;
    } else {
      mc.extension = std::numeric_limits<double>::quiet_NaN();
    }
    mc.ok = mc.lhs <= mc.rhs;
    est.monotonicity_ok = est.monotonicity_ok && mc.ok;
    est.monotonicity.push_back(mc);
  }
  return est;
}

void write_density_csv(const DensityEstimate& est, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_density_csv: cannot open " + path);
  out << "rho,eps,N,density,converged,iterations\n";
  char buf[160];
  for (const auto& e : est.table) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d,%.17g,%d,%d\n", e.rho, e.eps,
                  e.cells, e.density, e.converged ? 1 : 0, e.iterations);
    out << buf;
  }
}

RescalingReport check_rescaling(const CellProblem& p, int num_fields,
                                std::uint64_t seed) {
  if (!(p.rho > 2.0 * p.eps))
    throw std::invalid_argument("check_rescaling: need rho > 2 eps");
  RotatedCube cube = make_cube(p.x, p.rho, p.nu, p.n);
  Grid grid = make_grid(cube, p.cells);
  double delta = effective_delta_bc(p, grid.h);

  // eps side carries the oscillation f(y/eps, u, eps grad u)
  Integrand f_eps = p.f.rescale_space(1.0 / p.eps);

  RescalingReport rep;
  rep.fields_checked = num_fields;
  double scale = 0.0;
  for (int k = 0; k < num_fields; ++k) {
    ScalarField u = init_from_datum(grid, p.x, p.nu, p.eps, delta);
    Rng rng(seed + static_cast<std::uint64_t>(k));
    for (std::size_t i = 0; i < u.values.size(); ++i) {
      if (u.clamped[i]) continue;
      u.values[i] = std::clamp(u.values[i] + 0.3 * rng.symmetric(1.0), 0.0, 1.0);
    }
    double lhs = energy(f_eps, u, p.eps).total;
    ScalarField v = rescale_field(u, 1.0 / p.eps);
    double rhs = std::pow(p.eps, p.n - 1) * energy(p.f, v, 1.0).total;
    rep.worst_abs = std::max(rep.worst_abs, std::abs(lhs - rhs));
    scale = std::max({scale, std::abs(lhs), 1e-300});
  }
  rep.worst_rel = rep.worst_abs / scale;
  rep.ok = rep.worst_rel <= 1e-12;
  return rep;
}

}  // namespace phasecell

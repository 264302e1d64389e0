#include "phasecell/homogenize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "phasecell/parallel.hpp"

namespace phasecell {

namespace {

int guarded_cells(double r, const HomogenizeConfig& cfg, const char* who) {
  double cells = r * cfg.resolution;
  int N = static_cast<int>(std::round(cells));
  if (std::abs(cells - N) > 1e-9)
    throw std::invalid_argument(std::string(who) + ": r * resolution must be an integer");
  if (N > cfg.max_cells) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%s: grid %d exceeds the per-axis cap %d; lower r or resolution, "
                  "or raise max_cells",
                  who, N, cfg.max_cells);
    throw std::invalid_argument(buf);
  }
  return N;
}

HomogenizeEntry solve_at(const Integrand& f, const Vec& nu, int n, const Vec& x,
                         double r, const HomogenizeConfig& cfg, const char* who) {
  if (!(r > 2.0)) throw std::invalid_argument(std::string(who) + ": need r > 2 (eps = 1)");
  int N = guarded_cells(r, cfg, who);
  CellProblem p;
  p.f = f;
  p.n = n;
  p.nu = nu;
  p.rho = r;
  p.eps = 1.0;
  p.cells = N;
  p.solver = cfg.solver;
  Vec center{};
  for (int i = 0; i < n; ++i) center[static_cast<std::size_t>(i)] = r * x[static_cast<std::size_t>(i)];
  p.x = center;
  p.delta_bc = cfg.delta_bc_cells * (r / N);
  CellResult res = solve_cell(p);
  HomogenizeEntry e;
  e.x = x;
  e.r = r;
  e.cells = N;
  e.density = res.density;
  e.m_hat = res.m_hat;
  e.converged = res.converged;
  e.iterations = res.iterations;
  return e;
}

}  // namespace

HomogenizationRun homogenize_direction(const Integrand& f, const Vec& nu, int n,
                                       const std::vector<Vec>& x_list,
                                       const std::vector<double>& r_list,
                                       const HomogenizeConfig& cfg) {
  if (x_list.empty() || r_list.empty())
    throw std::invalid_argument("homogenize_direction: empty sweep lists");
  for (std::size_t i = 1; i < r_list.size(); ++i)
    if (r_list[i] <= r_list[i - 1])
      throw std::invalid_argument("homogenize_direction: r_list must increase");

  HomogenizationRun run;
  run.nu = frame_for(nu, n).nu;
  std::size_t total = x_list.size() * r_list.size();
  run.table.resize(total);
  parallel_for(total, cfg.jobs, [&](std::size_t k) {
    std::size_t xi = k / r_list.size();
    std::size_t ri = k % r_list.size();
    run.table[k] = solve_at(f, nu, n, x_list[xi], r_list[ri], cfg,
                            "homogenize_direction");
  });

  double r_max = r_list.back();
  double sum = 0.0;
  std::vector<double> at_rmax;
  for (const auto& e : run.table)
    if (e.r == r_max) {
      at_rmax.push_back(e.density);
      sum += e.density;
    }
  run.f_hom_est = sum / static_cast<double>(at_rmax.size());
  double spread = 0.0;
  for (std::size_t i = 0; i < at_rmax.size(); ++i)
    for (std::size_t j = i + 1; j < at_rmax.size(); ++j)
      spread = std::max(spread, std::abs(at_rmax[i] - at_rmax[j]));
  run.x_spread = spread / std::max(1e-300, run.f_hom_est);

  std::size_t nr = r_list.size();
  for (std::size_t ri = nr >= 3 ? nr - 3 : 0; ri < nr; ++ri)
    run.trend.push_back(run.table[ri].density);  // x_list[0] block comes first
  return run;
}

std::vector<AnisotropyEntry> anisotropy_scan(const Integrand& f,
                                             const std::vector<Vec>& nu_list,
                                             int n, double r,
                                             const HomogenizeConfig& cfg) {
  if (nu_list.empty()) throw std::invalid_argument("anisotropy_scan: empty direction list");
  std::vector<AnisotropyEntry> out(nu_list.size());
  parallel_for(nu_list.size(), cfg.jobs, [&](std::size_t k) {
    HomogenizeEntry e = solve_at(f, nu_list[k], n, Vec{}, r, cfg, "anisotropy_scan");
    AnisotropyEntry a;
    a.nu = frame_for(nu_list[k], n).nu;
    a.angle = (n == 2) ? std::atan2(a.nu[1], a.nu[0]) : 0.0;
    a.density = e.density;
    a.converged = e.converged;
    out[k] = a;
  });
  return out;
}

TilingReport check_tiling_subadditivity(const Integrand& f, const Vec& nu, int n,
                                        double r, double s,
                                        const HomogenizeConfig& cfg) {
  auto m = catalog_m_nu(nu, n);
  if (!m)
    throw std::invalid_argument(
        "check_tiling_subadditivity: direction not in the rational catalog");
  if (!(s >= r) || !(r > 2.0))
    throw std::invalid_argument("check_tiling_subadditivity: need s >= r > 2");

  TilingReport rep;
  rep.r = r;
  rep.s = s;
  rep.m_nu = *m;
  rep.step = (static_cast<std::int64_t>(std::floor(r / static_cast<double>(*m))) + 1) * *m;

  int Nr = guarded_cells(r, cfg, "check_tiling_subadditivity");
  int Ns = guarded_cells(s, cfg, "check_tiling_subadditivity");
  double h = r / Nr;
  if (std::abs(s / Ns - h) > 1e-12)
    throw std::invalid_argument("check_tiling_subadditivity: r and s grids must share h");
  double off = 0.5 * (s - r) / h;
  if (std::abs(off - std::round(off)) > 1e-9)
    throw std::invalid_argument("check_tiling_subadditivity: (s-r)/2 must be h-divisible");

  // r-solution
  CellProblem pr;
  pr.f = f;
  pr.n = n;
  pr.nu = nu;
  pr.rho = r;
  pr.eps = 1.0;
  pr.cells = Nr;
  pr.solver = cfg.solver;
  pr.delta_bc = cfg.delta_bc_cells * h;
  CellSolve sr = solve_cell_field(pr);
  rep.density_r = sr.result.density;

  // competitor on the s-grid
  RotatedCube cs = make_cube(Vec{}, s, nu, n);
  Grid gs = make_grid(cs, Ns);
  ScalarField comp = init_from_datum(gs, Vec{}, nu, 1.0, cfg.delta_bc_cells * h);

  double T = static_cast<double>(rep.step);
  int d = n - 1;
  std::int64_t zmax[2] = {0, 0};
  for (int i = 0; i < d; ++i)
    zmax[i] = static_cast<std::int64_t>(std::floor((s - r) / (2.0 * T) + 1e-9));
  int tiles = 1;
  for (int i = 0; i < d; ++i) tiles *= static_cast<int>(2 * zmax[i] + 1);
  rep.tile_count = tiles;

  const Grid& gr = sr.field.grid;
  auto nodes_s = gs.nodes_per_axis();
  double tol = 1e-9 * h;
  for (int i2 = 0; i2 < nodes_s[2]; ++i2) {
    for (int i1 = 0; i1 < nodes_s[1]; ++i1) {
      for (int i0 = 0; i0 < nodes_s[0]; ++i0) {
        Vec w = gs.node_local(i0, i1, i2);
        // tile index per tangential axis
        std::int64_t z[2] = {0, 0};
        bool inside = std::abs(w[static_cast<std::size_t>(n - 1)]) <= 0.5 * r + tol;
        for (int k = 0; k < d && inside; ++k) {
          double zk = std::round(w[static_cast<std::size_t>(k)] / T);
          z[k] = static_cast<std::int64_t>(zk);
          if (std::llabs(z[k]) > zmax[k] ||
              std::abs(w[static_cast<std::size_t>(k)] - zk * T) > 0.5 * r + tol)
            inside = false;
        }
        if (!inside) continue;
        int jr[3] = {0, 0, 0};
        bool valid = true;
        for (int k = 0; k < n; ++k) {
          double local = w[static_cast<std::size_t>(k)];
          if (k < d) local -= static_cast<double>(z[k]) * T;
          double idx = (local + 0.5 * r) / h;
          double rid = std::round(idx);
          if (std::abs(idx - rid) > 1e-6) valid = false;
          jr[k] = static_cast<int>(rid);
          jr[k] = std::clamp(jr[k], 0, gr.cells[static_cast<std::size_t>(k)]);
        }
        if (!valid)
          throw std::logic_error("check_tiling_subadditivity: tile grid misalignment");
        comp.values[gs.node_index(i0, i1, i2)] =
            sr.field.values[gr.node_index(jr[0], jr[1], n == 3 ? jr[2] : 0)];
      }
    }
  }
  rep.competitor_admissible = comp.satisfies_clamp(1e-12);
  double comp_energy = energy(f, comp, 1.0).total;
  double cross = std::pow(s, n - 1);
  rep.competitor_density = comp_energy / cross;

  // direct solve at s, polished from both the datum and the competitor
  CellProblem ps = pr;
  ps.rho = s;
  ps.cells = Ns;
  CellSolve ss = solve_cell_field(ps);
  SolveOutcome polished = minimise(f, comp, 1.0, cfg.solver);
  double m_s = std::min(ss.result.m_hat, polished.energy);
  rep.density_s = m_s / cross;

  double cu = compute_Cu(f.well(), TransitionProfile{}, f.p());
  rep.bound = rep.density_r +
              f.c2() * cu *
                  (1.0 - std::pow(r, n - 1) * std::pow(1.0 / (r + 1.0) - 1.0 / s, n - 1));
  double tol_m = 10.0 * std::max(ss.result.tol_pg_abs, polished.tol_pg_abs) / cross;
  rep.inequality_ok = rep.density_s <= rep.bound + tol_m;
  rep.competitor_dominates = m_s <= comp_energy + tol_m * cross;
  return rep;
}

void write_homogenize_csv(const HomogenizationRun& run, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_homogenize_csv: cannot open " + path);
  out << "nu_x,nu_y,x,r,density,converged\n";
  char buf[240];
  for (const auto& e : run.table) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g|%.17g,%.17g,%.17g,%d\n",
                  run.nu[0], run.nu[1], e.x[0], e.x[1], e.r, e.density,
                  e.converged ? 1 : 0);
    out << buf;
  }
}

void write_anisotropy_csv(const std::vector<AnisotropyEntry>& scan,
                          const std::string& path, bool polar) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_anisotropy_csv: cannot open " + path);
  char buf[160];
  if (polar) {
    out << "angle,density\n";
    for (const auto& a : scan) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", a.angle, a.density);
      out << buf;
    }
  } else {
    out << "nu_x,nu_y,density,converged\n";
    for (const auto& a : scan) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%d\n", a.nu[0], a.nu[1],
                    a.density, a.converged ? 1 : 0);
      out << buf;
    }
  }
}

}  // namespace phasecell

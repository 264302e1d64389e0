#include "phasecell/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "phasecell/parallel.hpp"
#include "phasecell/rng.hpp"

namespace phasecell {

namespace {

std::uint64_t sample_seed(const StochasticConfig& cfg, int index) {
  return splitmix64(cfg.master_seed + static_cast<std::uint64_t>(index));
}

struct LatticeSolve {
  SolveOutcome outcome;
  LatticeInterval iv;
  Grid grid;
};

Grid lattice_grid(const LatticeInterval& iv, const StochasticConfig& cfg) {
  double h = 1.0 / cfg.resolution;
  for (int i = 0; i < iv.box.n; ++i) {
    double cells = iv.box.sides[static_cast<std::size_t>(i)] * cfg.resolution;
    if (cells > cfg.max_cells)
      throw std::invalid_argument(
          "lattice grid exceeds the per-axis cap; reduce the interval, resolution "
          "or raise max_cells");
  }
  return make_grid_box(iv.box, h);
}

LatticeSolve solve_lattice(const Integrand& f, const LatticeInterval& iv,
                           const StochasticConfig& cfg) {
  LatticeSolve ls;
  ls.iv = iv;
  ls.grid = lattice_grid(iv, cfg);
  // boxes are centered in the hyperplane: the datum phase offset is exactly 0
  ScalarField F0 = init_from_datum(ls.grid, Vec{}, iv.nu, 1.0,
                                   cfg.delta_bc_cells * ls.grid.h,
                                   TransitionProfile{}, 0.0);
  ls.outcome = multi_start(f, F0, 1.0, cfg.solver);
  return ls;
}

}  // namespace

Integrand random_integrand(const StochasticConfig& cfg, std::uint64_t seed) {
  IntegrandSpec spec;
  spec.well = cfg.well;
  spec.p = cfg.p;
  spec.homogeneous = false;
  spec.coefficient = CoefficientField::random_checkerboard(seed, cfg.values);
  return make_integrand(spec);
}

SubadditiveSample mu_nu(std::uint64_t seed, const std::array<std::int64_t, 2>& lo,
                        const std::array<std::int64_t, 2>& hi, const Vec& nu,
                        int n, const StochasticConfig& cfg) {
  LatticeInterval iv = lattice_interval(lo, hi, nu, n);
  Integrand f = random_integrand(cfg, seed);
  LatticeSolve ls = solve_lattice(f, iv, cfg);

  SubadditiveSample s;
  s.seed = seed;
  s.lo = lo;
  s.hi = hi;
  s.nu = iv.nu;
  s.m_nu = iv.m_nu;
  double scale = std::pow(static_cast<double>(iv.m_nu), n - 1);
  s.mu = ls.outcome.energy / scale;
  s.interval_measure = 1.0;
  for (int i = 0; i + 1 < n; ++i)
    s.interval_measure *= static_cast<double>(hi[static_cast<std::size_t>(i)] -
                                              lo[static_cast<std::size_t>(i)]);
  double cu = compute_Cu(cfg.well, TransitionProfile{}, cfg.p);
  s.bound = f.c2() * cu * s.interval_measure * (1.0 + kBracketSlack);
  s.bound_ok = (s.mu >= 0.0 && s.mu <= s.bound);
  s.converged = ls.outcome.converged;
  s.iterations = ls.outcome.iterations;
  s.tol_pg_abs = ls.outcome.tol_pg_abs;
  return s;
}

CovarianceReport check_covariance(std::uint64_t seed,
                                  const std::array<std::int64_t, 2>& lo,
                                  const std::array<std::int64_t, 2>& hi,
                                  const std::array<std::int64_t, 2>& shift,
                                  const Vec& nu, int n,
                                  const StochasticConfig& cfg) {
  LatticeInterval iv = lattice_interval(lo, hi, nu, n);
  std::array<std::int64_t, 3> z_nu = lattice_shift_vector(iv, shift);

  std::array<std::int64_t, 2> lo_t = lo, hi_t = hi;
  for (int i = 0; i + 1 < n; ++i) {
    lo_t[static_cast<std::size_t>(i)] += shift[static_cast<std::size_t>(i)];
    hi_t[static_cast<std::size_t>(i)] += shift[static_cast<std::size_t>(i)];
  }
  LatticeInterval iv_t = lattice_interval(lo_t, hi_t, nu, n);

  Integrand f = random_integrand(cfg, seed);
  Integrand f_shifted = f.with_shifted_field(z_nu);

  double scale = std::pow(static_cast<double>(iv.m_nu), n - 1);
  CovarianceReport rep;
  rep.mu_translated = solve_lattice(f, iv_t, cfg).outcome.energy / scale;
  rep.mu_shifted = solve_lattice(f_shifted, iv, cfg).outcome.energy / scale;
  rep.diff = rep.mu_translated - rep.mu_shifted;
  rep.ok = std::abs(rep.diff) <= 1e-9 * std::max(1.0, std::abs(rep.mu_translated));
  return rep;
}

SubadditivityReport check_subadditivity(
    std::uint64_t seed, std::int64_t lo, std::int64_t hi,
    const std::vector<std::array<std::int64_t, 2>>& parts, const Vec& nu,
    const StochasticConfig& cfg) {
  const int n = 2;
  if (parts.empty())
    throw std::invalid_argument("check_subadditivity: empty partition");
  std::vector<std::array<std::int64_t, 2>> sorted = parts;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });
  std::int64_t cursor = lo;
  for (const auto& pr : sorted) {
    if (pr[0] != cursor || pr[1] <= pr[0])
      throw std::invalid_argument(
          "check_subadditivity: parts must be disjoint and cover the interval");
    cursor = pr[1];
  }
  if (cursor != hi)
    throw std::invalid_argument("check_subadditivity: parts do not cover the interval");

  Integrand f = random_integrand(cfg, seed);
  LatticeInterval whole = lattice_interval({lo, 0}, {hi, 0}, nu, n);
  Grid grid = lattice_grid(whole, cfg);
  double mnu = static_cast<double>(whole.m_nu);
  double scale = mnu;  // M_nu^{n-1}, n = 2

  SubadditivityReport rep;
  rep.tol_sub = 0.0;

  // part solves; remember fields and their lattice data for the concatenation
  struct PartSolve {
    LatticeInterval iv;
    LatticeSolve ls;
  };
  std::vector<PartSolve> solves;
  double parts_sum = 0.0;
  for (const auto& pr : sorted) {
    LatticeInterval iv = lattice_interval({pr[0], 0}, {pr[1], 0}, nu, n);
    PartSolve ps{iv, solve_lattice(f, iv, cfg)};
    parts_sum += ps.ls.outcome.energy / scale;
    rep.tol_sub += 10.0 * ps.ls.outcome.tol_pg_abs / scale;
    solves.push_back(std::move(ps));
  }
  rep.mu_parts_sum = parts_sum;

  // concatenated competitor on the whole box
  ScalarField comp = init_from_datum(grid, Vec{}, whole.nu, 1.0,
                                     cfg.delta_bc_cells * grid.h,
                                     TransitionProfile{}, 0.0);
  auto nodes = grid.nodes_per_axis();
  double h = grid.h;
  // frame coordinates: tangential v0 in [M lo, M hi], normal vn (center in Pi^nu)
  double mid0 = mnu * 0.5 * static_cast<double>(lo + hi);
  std::vector<int> owner(grid.node_count(), -1);
  for (int i1 = 0; i1 < nodes[1]; ++i1) {
    for (int i0 = 0; i0 < nodes[0]; ++i0) {
      std::size_t idx = grid.node_index(i0, i1);
      Vec w = grid.node_local(i0, i1);
      double v0 = mid0 + w[0];
      double vn = w[1];
      for (std::size_t pi = 0; pi < solves.size(); ++pi) {
        const LatticeInterval& iv = solves[pi].iv;
        double a = mnu * static_cast<double>(iv.lo[0]);
        double b = mnu * static_cast<double>(iv.hi[0]);
        double half_n = mnu * iv.c;
        double tol = 1e-9 * h;
        if (v0 < a - tol || v0 > b + tol || std::abs(vn) > half_n + tol) continue;
        const Grid& gp = solves[pi].ls.grid;
        double j0 = (v0 - a) / h;
        double j1 = (vn + half_n) / h;
        if (std::abs(j0 - std::round(j0)) > 1e-6 || std::abs(j1 - std::round(j1)) > 1e-6)
          throw std::logic_error("check_subadditivity: part grid misalignment");
        int i0p = std::clamp(static_cast<int>(std::round(j0)), 0, gp.cells[0]);
        int i1p = std::clamp(static_cast<int>(std::round(j1)), 0, gp.cells[1]);
        comp.values[idx] = solves[pi].ls.outcome.field.values[gp.node_index(i0p, i1p)];
        owner[idx] = static_cast<int>(pi);
        break;
      }
    }
  }

  // filler cells are those outside every (I_i)_nu as rectangles
  std::vector<std::uint8_t> filler(grid.cell_count(), 0);
  std::size_t c = 0;
  for (int i1 = 0; i1 < grid.cells[1]; ++i1) {
    for (int i0 = 0; i0 < grid.cells[0]; ++i0, ++c) {
      Vec w = grid.node_local(i0, i1);
      double v0_lo = mid0 + w[0], v0_hi = v0_lo + h;
      double vn_lo = w[1], vn_hi = vn_lo + h;
      double tol = 1e-9 * h;
      bool in_part = false;
      for (const auto& ps : solves) {
        const LatticeInterval& iv = ps.iv;
        double a = mnu * static_cast<double>(iv.lo[0]);
        double b = mnu * static_cast<double>(iv.hi[0]);
        double half_n = mnu * iv.c;
        if (v0_lo >= a - tol && v0_hi <= b + tol && vn_lo >= -half_n - tol &&
            vn_hi <= half_n + tol) {
          in_part = true;
          break;
        }
      }
      filler[c] = in_part ? 0 : 1;
    }
  }
  rep.filler_energy = energy_over_cells(f, comp, 1.0, filler);
  double comp_energy = energy(f, comp, 1.0).total;
  rep.competitor_mu = comp_energy / scale;

  // whole-box value, polished from the datum and from the competitor
  LatticeSolve whole_datum = solve_lattice(f, whole, cfg);
  SolveOutcome whole_comp = minimise(f, comp, 1.0, cfg.solver);
  double m_whole = std::min(whole_datum.outcome.energy, whole_comp.energy);
  rep.mu_whole = m_whole / scale;
  rep.tol_sub += 10.0 * whole_datum.outcome.tol_pg_abs / scale;

  rep.ok = rep.mu_whole <= rep.mu_parts_sum + rep.tol_sub;
  rep.competitor_dominates =
      rep.mu_whole <= rep.competitor_mu + 10.0 * whole_datum.outcome.tol_pg_abs / scale;
  return rep;
}

ErgodicEstimate ergodic_estimate(const Vec& nu, int n,
                                 const std::vector<double>& r_list, int seeds,
                                 const StochasticConfig& cfg) {
  if (seeds < 8) throw std::invalid_argument("ergodic_estimate: need >= 8 seeds");
  if (r_list.empty()) throw std::invalid_argument("ergodic_estimate: empty r list");
  for (std::size_t i = 1; i < r_list.size(); ++i)
    if (r_list[i] <= r_list[i - 1])
      throw std::invalid_argument("ergodic_estimate: r_list must increase");

  ErgodicEstimate est;
  est.nu = frame_for(nu, n).nu;
  est.levels.resize(r_list.size());
  for (std::size_t ri = 0; ri < r_list.size(); ++ri) {
    ErgodicLevel& lv = est.levels[ri];
    lv.r = r_list[ri];
    lv.seeds = seeds;
    lv.sample_seeds.resize(static_cast<std::size_t>(seeds));
    lv.densities.resize(static_cast<std::size_t>(seeds));
    lv.iterations.resize(static_cast<std::size_t>(seeds));
    lv.converged.resize(static_cast<std::size_t>(seeds));
  }

  std::size_t total = r_list.size() * static_cast<std::size_t>(seeds);
  parallel_for(total, cfg.jobs, [&](std::size_t k) {
    std::size_t ri = k / static_cast<std::size_t>(seeds);
    int si = static_cast<int>(k % static_cast<std::size_t>(seeds));
    double r = r_list[ri];
    double cells = r * cfg.resolution;
    int N = static_cast<int>(std::round(cells));
    if (N > cfg.max_cells)
      throw std::invalid_argument(
          "ergodic_estimate: grid exceeds the per-axis cap; reduce r or resolution");
    std::uint64_t s = sample_seed(cfg, si);
    Integrand f = random_integrand(cfg, s);
    CellProblem p;
    p.f = f;
    p.n = n;
    p.nu = nu;
    p.rho = r;
    p.eps = 1.0;
    p.cells = N;
    p.solver = cfg.solver;
    p.delta_bc = cfg.delta_bc_cells * (r / N);
    CellResult res = solve_cell(p);
    ErgodicLevel& lv = est.levels[ri];
    lv.sample_seeds[static_cast<std::size_t>(si)] = s;
    lv.densities[static_cast<std::size_t>(si)] = res.density;
    lv.iterations[static_cast<std::size_t>(si)] = res.iterations;
    lv.converged[static_cast<std::size_t>(si)] = res.converged ? 1 : 0;
  });

  for (auto& lv : est.levels) {
    double sum = 0.0, lo = lv.densities[0], hi = lv.densities[0];
    for (double d : lv.densities) {
      sum += d;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    lv.mean = sum / lv.densities.size();
    if (lo == hi) {  // degenerate media: identical samples, zero variance
      lv.mean = lo;
      lv.stddev = 0.0;
      continue;
    }
    double var = 0.0;
    for (double d : lv.densities) var += (d - lv.mean) * (d - lv.mean);
    lv.stddev = lv.densities.size() > 1
                    ? std::sqrt(var / (static_cast<double>(lv.densities.size()) - 1.0))
                    : 0.0;
  }
  const ErgodicLevel& last = est.levels.back();
  est.f_hom_est = last.mean;
  est.ci_halfwidth = 1.96 * last.stddev / std::sqrt(static_cast<double>(seeds));
  est.std_decreasing = last.stddev < est.levels.front().stddev;
  return est;
}

XIndependenceReport check_x_independence(std::uint64_t seed, const Vec& nu, int n,
                                         const std::vector<Vec>& x_list, double r,
                                         const StochasticConfig& cfg) {
  if (x_list.empty())
    throw std::invalid_argument("check_x_independence: empty x list");
  XIndependenceReport rep;
  Integrand f = random_integrand(cfg, seed);
  for (const Vec& x : x_list) {
    int N = static_cast<int>(std::round(r * cfg.resolution));
    if (N > cfg.max_cells)
      throw std::invalid_argument("check_x_independence: grid exceeds the cap");
    CellProblem p;
    p.f = f;
    p.n = n;
    p.nu = nu;
    p.rho = r;
    p.eps = 1.0;
    p.cells = N;
    p.solver = cfg.solver;
    p.delta_bc = cfg.delta_bc_cells * (r / N);
    for (int i = 0; i < n; ++i)
      p.x[static_cast<std::size_t>(i)] = r * x[static_cast<std::size_t>(i)];
    rep.densities.push_back(solve_cell(p).density);
  }
  double lo = rep.densities[0], hi = lo, sum = 0.0;
  for (double d : rep.densities) {
    lo = std::min(lo, d);
    hi = std::max(hi, d);
    sum += d;
  }
  double mean = sum / rep.densities.size();
  rep.spread = (hi - lo) / std::max(1e-300, mean);
  rep.flagged = rep.spread > 0.10;
  return rep;
}

void write_ergodic_csv(const ErgodicEstimate& est, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_ergodic_csv: cannot open " + path);
  out << "seed,r,nu_x,nu_y,density,iterations,converged\n";
  char buf[200];
  for (const auto& lv : est.levels) {
    for (std::size_t i = 0; i < lv.densities.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%llu,%.17g,%.17g,%.17g,%.17g,%d,%d\n",
                    static_cast<unsigned long long>(lv.sample_seeds[i]), lv.r,
                    est.nu[0], est.nu[1], lv.densities[i], lv.iterations[i],
                    lv.converged[i] ? 1 : 0);
      out << buf;
    }
  }
}

}  // namespace phasecell

#pragma once

// Cell-problem drivers: m(datum, Q^nu_rho(x)) at scale eps, the boundary-band
// variant m^delta, (rho, eps) sweeps estimating the limit surface densities,
// the datum-extension monotonicity surrogate, and the rescaling identity.

#include <string>
#include <vector>

#include "phasecell/field.hpp"
#include "phasecell/integrand.hpp"
#include "phasecell/solver.hpp"

namespace phasecell {

struct CellProblem {
  Integrand f;
  Vec x{};
  Vec nu{0.0, 1.0, 0.0};
  int n = 2;
  double rho = 1.0;
  double eps = 0.0625;
  double delta_bc = 0.0;  // 0 -> default 2h
  int cells = 96;
  SolverConfig solver;
};

struct CellResult {
  double m_hat = 0.0;
  double density = 0.0;
  double lower_bound = 0.0;  // c1 c_p (1 - slack)
  double upper_bound = 0.0;  // c2 C_u (1 + slack)
  bool bracket_ok = false;
  bool converged = false;
  int iterations = 0;
  double pg_norm = 0.0;
  double tol_pg_abs = 0.0;
  double rho = 0.0;
  double eps = 0.0;
  int cells = 0;
};

// Pinned bracketing slack for the density diagnostics (pilot grid studies at
// N in {64, 96, 128}).
inline constexpr double kBracketSlack = 0.05;

CellResult solve_cell(const CellProblem& problem);

// Same problem with the clamp band exactly Q_rho \ Q_{rho-delta}
// (delta_bc = delta / 2); requires rho > delta > 2 eps.
CellResult solve_cell_delta(const CellProblem& problem, double delta);

// Full solve, returning the minimising field as well.
struct CellSolve {
  CellResult result;
  ScalarField field;
};
CellSolve solve_cell_field(const CellProblem& problem);

// The inner solution extended by its own datum onto the larger cube; grids
// must align (same spacing, (rho' - rho)/2 divisible by h).
ScalarField extend_by_datum(const ScalarField& inner, double outer_rho,
                            double outer_delta_bc);

struct DensityEntry {
  double rho = 0.0;
  double eps = 0.0;
  int cells = 0;
  double density = 0.0;
  double m_hat = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct MonotonicityCheck {
  double rho_small = 0.0;
  double rho_large = 0.0;
  double lhs = 0.0;        // m_hat at rho_large
  double rhs = 0.0;        // m_hat at rho_small + c2 C_u (rho'^{n-1}-rho^{n-1}) + tol
  double extension = 0.0;  // energy of the rho-solution extended by datum
  bool ok = false;
};

struct DensityEstimate {
  Vec x{};
  Vec nu{};
  std::vector<DensityEntry> table;
  double f_prime_est = 0.0;
  double f_dprime_est = 0.0;
  double trend_spread = 0.0;  // relative spread of the last three eps entries
  std::vector<MonotonicityCheck> monotonicity;
  bool monotonicity_ok = false;
  std::vector<std::string> warnings;
  // optional first-order Richardson extrapolation in eps at the finest rho;
  // reported only, never used by acceptance
  double richardson_est = 0.0;
  bool richardson_enabled = false;
};

// Sweeps (rho, eps) pairs (lists sorted decreasing), fills the density table,
// reports the finest-corner estimates and the extension-by-datum
// monotonicity surrogate between consecutive rho at the finest eps.
DensityEstimate estimate_density(const Integrand& f, const Vec& x, const Vec& nu,
                                 int n, const std::vector<double>& rho_list,
                                 const std::vector<double>& eps_list,
                                 const CellProblem& base,
                                 bool richardson = false);

void write_density_csv(const DensityEstimate& est, const std::string& path);

struct RescalingReport {
  double worst_abs = 0.0;
  double worst_rel = 0.0;
  int fields_checked = 0;
  bool ok = false;  // worst_rel <= 1e-12
};

// F_eps(u, Q^nu_rho(x)) = eps^{n-1} F_1(u(eps .), Q^nu_{rho/eps}(x/eps)) for
// random admissible fields, both sides evaluated independently on matched
// grids. The eps-side integrand carries the oscillation f(y/eps, ...).
RescalingReport check_rescaling(const CellProblem& problem, int num_fields = 10,
                                std::uint64_t seed = 2024);

}  // namespace phasecell

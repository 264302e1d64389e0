#pragma once

// Deterministic homogenisation in the eps = 1 formulation: densities
// m(datum at rx, Q^nu_r(rx)) / r^{n-1} along growing r, anisotropy scans over
// nu, and the periodic tiling construction behind the existence of the limit.

#include <string>
#include <vector>

#include "phasecell/cell.hpp"

namespace phasecell {

struct HomogenizeConfig {
  int resolution = 16;      // grid cells per unit length
  int max_cells = 512;      // memory guard, per axis
  double delta_bc_cells = 2.0;
  SolverConfig solver;
  int jobs = 1;
};

struct HomogenizeEntry {
  Vec x{};
  double r = 0.0;
  int cells = 0;
  double density = 0.0;
  double m_hat = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct HomogenizationRun {
  Vec nu{};
  std::vector<HomogenizeEntry> table;
  double f_hom_est = 0.0;  // density at the largest r, averaged over x_list
  double x_spread = 0.0;   // max pairwise relative difference at the largest r
  std::vector<double> trend;  // densities at x_list[0] for the last three r
};

HomogenizationRun homogenize_direction(const Integrand& f, const Vec& nu, int n,
                                       const std::vector<Vec>& x_list,
                                       const std::vector<double>& r_list,
                                       const HomogenizeConfig& cfg);

struct AnisotropyEntry {
  Vec nu{};
  double angle = 0.0;  // n = 2 only, radians
  double density = 0.0;
  bool converged = false;
};

std::vector<AnisotropyEntry> anisotropy_scan(const Integrand& f,
                                             const std::vector<Vec>& nu_list,
                                             int n, double r,
                                             const HomogenizeConfig& cfg);

struct TilingReport {
  double r = 0.0, s = 0.0;
  std::int64_t m_nu = 0;
  std::int64_t step = 0;  // tiling step (floor(r/M)+1) M
  int tile_count = 0;
  double density_r = 0.0;
  double density_s = 0.0;
  double competitor_density = 0.0;
  double bound = 0.0;  // density_r + c2 C_u (1 - r^{n-1}(1/(r+1)-1/s)^{n-1})
  bool competitor_admissible = false;
  bool inequality_ok = false;        // density_s <= bound + tol
  bool competitor_dominates = false; // m_hat(s) <= competitor energy + tol
};

// Builds the tiled competitor on Q^nu_s(0) from copies of the r-solution
// shifted by the lattice vectors z^nu_r, fills the rest with the datum, and
// compares against the direct solve at s and the tile-count bound.
TilingReport check_tiling_subadditivity(const Integrand& f, const Vec& nu, int n,
                                        double r, double s,
                                        const HomogenizeConfig& cfg);

void write_homogenize_csv(const HomogenizationRun& run, const std::string& path);
void write_anisotropy_csv(const std::vector<AnisotropyEntry>& scan,
                          const std::string& path, bool polar);

}  // namespace phasecell

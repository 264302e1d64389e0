#pragma once

// Nodal scalar fields on rotated boxes, the scaled energy
// (1/eps) \int f(y, u, eps grad u), its analytic gradient, boundary bands
// realising "u = datum near the boundary", cutoff gluing, and rescaling.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phasecell/geometry.hpp"
#include "phasecell/integrand.hpp"
#include "phasecell/la.hpp"

namespace phasecell {

struct Grid {
  int n = 2;
  std::array<int, 3> cells{};  // per axis
  double h = 0.0;              // uniform spacing; cells_i * h = box side_i
  Box box;

  std::size_t node_count() const;
  std::size_t cell_count() const;
  std::array<int, 3> nodes_per_axis() const;
  std::size_t node_index(int i0, int i1, int i2 = 0) const;
  // local (frame) coordinate of a node, relative to the box center
  Vec node_local(int i0, int i1, int i2 = 0) const;
  Vec node_physical(int i0, int i1, int i2 = 0) const;
};

Grid make_grid(const RotatedCube& cube, int cells_per_axis);
Grid make_grid_box(const Box& box, double h);

struct DatumSpec {
  Vec x{};
  Vec nu{0.0, 1.0, 0.0};
  double eps = 1.0;
  double delta_bc = 0.0;
  // (center - x) . nu, set exactly to 0 for lattice boxes whose centers lie
  // in the hyperplane; otherwise computed from the geometry
  double phase_offset = 0.0;
  double profile_width = 1.0;
};

struct ScalarField {
  Grid grid;
  std::vector<double> values;
  std::vector<std::uint8_t> clamped;
  std::vector<double> datum;  // datum values at every node
  DatumSpec datum_spec;

  std::size_t free_node_count() const;
  // reapplies the clamp: clamped nodes take their datum values exactly
  void enforce_clamp();
  bool satisfies_clamp(double tol = 0.0) const;
};

// All nodes take the regularised datum; nodes within delta_bc of the box
// boundary (sup-norm in local coordinates) are clamped. delta_bc must cover
// at least one node layer (>= h).
ScalarField init_from_datum(const Grid& grid, const Vec& x, const Vec& nu,
                            double eps, double delta_bc,
                            const TransitionProfile& profile = TransitionProfile{},
                            std::optional<double> forced_phase_offset = std::nullopt);

struct EnergyReport {
  double total = 0.0;
  double eps = 1.0;
  double density = 0.0;  // total / (tangential cross-section measure)
};

// Per-solve cache of coefficient values at cell centers.
struct EnergyWorkspace {
  std::vector<double> cell_coeff;
};

EnergyWorkspace make_workspace(const Integrand& f, const Grid& grid);

double energy_total(const Integrand& f, const ScalarField& field, double eps,
                    const EnergyWorkspace& ws);

void energy_gradient_into(const Integrand& f, const ScalarField& field,
                          double eps, const EnergyWorkspace& ws,
                          std::vector<double>& grad);

// One-point-per-cell quadrature: sum over cells of
//   h^n (1/eps) f(y_c, mean of corner values, eps R grad_local)
// with the forward-difference gradient taken from the cell's lower corner.
EnergyReport energy(const Integrand& f, const ScalarField& field, double eps);

// Exact gradient of the discrete energy w.r.t. nodal values; entries at
// clamped nodes are zero.
std::vector<double> energy_gradient(const Integrand& f, const ScalarField& field,
                                    double eps);

double tangential_measure(const Grid& grid);

// Energy restricted to the cells with nonzero mask entries (lexicographic
// cell order, same quadrature as energy()).
double energy_over_cells(const Integrand& f, const ScalarField& field, double eps,
                         const std::vector<std::uint8_t>& cell_mask);

struct GlueResult {
  ScalarField field;       // glued field on the union box
  double omega_hat = 0.0;  // energy of the transition shell of the best layer
  double energy_glued = 0.0;
  double energy_u = 0.0;
  double energy_v = 0.0;
  int best_layer = 0;
  bool inequality_ok = false;  // E(w) <= E(u,A') + E(v,B) + omega_hat + tol
};

// Cutoff interpolations w^i = phi_i u + (1 - phi_i) v over `layers` nested
// shells in the band between A := A' shrunk by `band` and A'; returns the
// lowest-energy interpolation. u and v must live on aligned grids (same
// frame, same spacing, integer node offset) whose union is again a box.
GlueResult glue(const Integrand& f, const ScalarField& u, const ScalarField& v,
                double eps, int layers, double band);

// Field on the box scaled by lambda with identical nodal values.
ScalarField rescale_field(const ScalarField& field, double lambda);

void write_field_csv(const ScalarField& field, const std::string& path);
// Binary dump, documented header: magic "PCF1", n, N, rho, nu, eps (cubic
// grids only).
void write_field_binary(const ScalarField& field, double eps,
                        const std::string& path);

}  // namespace phasecell

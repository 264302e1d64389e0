#include "phasecell/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace phasecell {

namespace {

// Inlined well evaluation for the hot cell loops.
struct WellEval {
  double scale;
  WellKind kind;
  const double* r;
  int nr;

  explicit WellEval(const DoubleWell& w)
      : scale(w.scale()), kind(w.kind()), r(w.r_coeffs().data()),
        nr(static_cast<int>(w.r_coeffs().size())) {}

  double poly(double t) const {
    double v = 0.0;
    for (int i = nr - 1; i >= 0; --i) v = v * t + r[i];
    return v;
  }
  double dpoly(double t) const {
    double v = 0.0;
    for (int i = nr - 1; i >= 1; --i) v = v * t + r[i] * i;
    return v;
  }
  double value(double t) const {
    double q = t * (1.0 - t);
    if (kind == WellKind::Quartic) return scale * q * q;
    return scale * q * q * poly(t);
  }
  double derivative(double t) const {
    double q = t * (1.0 - t);
    double dq = 1.0 - 2.0 * t;
    if (kind == WellKind::Quartic) return scale * 2.0 * q * dq;
    return scale * (2.0 * q * dq * poly(t) + q * q * dpoly(t));
  }
};

void check_dim(int n, const char* who) {
  if (n != 2 && n != 3) throw std::invalid_argument(std::string(who) + ": n must be 2 or 3");
}

}  // namespace

std::size_t Grid::node_count() const {
  std::size_t c = 1;
  for (int i = 0; i < n; ++i) c *= static_cast<std::size_t>(cells[static_cast<std::size_t>(i)] + 1);
  return c;
}

std::size_t Grid::cell_count() const {
  std::size_t c = 1;
  for (int i = 0; i < n; ++i) c *= static_cast<std::size_t>(cells[static_cast<std::size_t>(i)]);
  return c;
}

std::array<int, 3> Grid::nodes_per_axis() const {
  std::array<int, 3> out{1, 1, 1};
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = cells[static_cast<std::size_t>(i)] + 1;
  return out;
}

std::size_t Grid::node_index(int i0, int i1, int i2) const {
  auto nodes = nodes_per_axis();
  return static_cast<std::size_t>(i0) +
         static_cast<std::size_t>(nodes[0]) *
             (static_cast<std::size_t>(i1) +
              static_cast<std::size_t>(nodes[1]) * static_cast<std::size_t>(i2));
}

Vec Grid::node_local(int i0, int i1, int i2) const {
  Vec w{};
  int idx[3] = {i0, i1, i2};
  for (int k = 0; k < n; ++k)
    w[static_cast<std::size_t>(k)] =
        -0.5 * box.sides[static_cast<std::size_t>(k)] + idx[k] * h;
  return w;
}

Vec Grid::node_physical(int i0, int i1, int i2) const {
  return add(box.center, mat_vec(box.frame.R, node_local(i0, i1, i2), n), n);
}

Grid make_grid(const RotatedCube& cube, int cells_per_axis) {
  if (cells_per_axis < 8) throw std::invalid_argument("make_grid: need N >= 8");
  Grid g;
  g.n = cube.frame.n;
  g.box = box_of(cube);
  g.h = cube.rho / cells_per_axis;
  for (int i = 0; i < g.n; ++i) g.cells[static_cast<std::size_t>(i)] = cells_per_axis;
  return g;
}

Grid make_grid_box(const Box& box, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("make_grid_box: h must be > 0");
  Grid g;
  g.n = box.n;
  g.box = box;
  g.h = h;
  for (int i = 0; i < g.n; ++i) {
    double cells = box.sides[static_cast<std::size_t>(i)] / h;
    double r = std::round(cells);
    if (std::abs(cells - r) > 1e-6 || r < 8)
      throw std::invalid_argument("make_grid_box: sides must be >= 8 h and h-divisible");
    g.cells[static_cast<std::size_t>(i)] = static_cast<int>(r);
  }
  return g;
}

std::size_t ScalarField::free_node_count() const {
  std::size_t c = 0;
  for (auto m : clamped)
    if (!m) ++c;
  return c;
}

void ScalarField::enforce_clamp() {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (clamped[i]) values[i] = datum[i];
}

bool ScalarField::satisfies_clamp(double tol) const {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (clamped[i] && std::abs(values[i] - datum[i]) > tol) return false;
  return true;
}

ScalarField init_from_datum(const Grid& grid, const Vec& x, const Vec& nu,
                            double eps, double delta_bc,
                            const TransitionProfile& profile,
                            std::optional<double> forced_phase_offset) {
  check_dim(grid.n, "init_from_datum");
  if (!(eps > 0.0)) throw std::invalid_argument("init_from_datum: eps must be > 0");
  double min_side = grid.box.sides[0];
  for (int i = 1; i < grid.n; ++i)
    min_side = std::min(min_side, grid.box.sides[static_cast<std::size_t>(i)]);
  if (!(delta_bc < 0.5 * min_side))
    throw std::invalid_argument("init_from_datum: delta_bc must be < side/2");
  if (delta_bc < grid.h * (1.0 - 1e-12))
    throw std::invalid_argument(
        "init_from_datum: clamp band thinner than one cell (needs >= 1 node layer)");

  int n = grid.n;
  double len = norm(nu, n);
  if (!(len > 0.0)) throw std::invalid_argument("init_from_datum: zero normal");
  Vec unit{};
  for (int i = 0; i < n; ++i) unit[static_cast<std::size_t>(i)] = nu[static_cast<std::size_t>(i)] / len;

  bool aligned = true;
  for (int i = 0; i < n; ++i)
    if (std::abs(unit[static_cast<std::size_t>(i)] -
                 grid.box.frame.nu[static_cast<std::size_t>(i)]) > 1e-14)
      aligned = false;
  if (forced_phase_offset && !aligned)
    throw std::invalid_argument("init_from_datum: forced offset requires an aligned normal");

  double offset = forced_phase_offset
                      ? *forced_phase_offset
                      : dot(sub(grid.box.center, x, n), unit, n);

  ScalarField f;
  f.grid = grid;
  f.values.assign(grid.node_count(), 0.0);
  f.clamped.assign(grid.node_count(), 0);
  f.datum.assign(grid.node_count(), 0.0);
  f.datum_spec = DatumSpec{x, unit, eps, delta_bc, offset, profile.width()};

  auto nodes = grid.nodes_per_axis();
  double clamp_tol = 1e-9 * grid.h;
  for (int i2 = 0; i2 < nodes[2]; ++i2) {
    for (int i1 = 0; i1 < nodes[1]; ++i1) {
      for (int i0 = 0; i0 < nodes[0]; ++i0) {
        std::size_t idx = grid.node_index(i0, i1, i2);
        Vec w = grid.node_local(i0, i1, i2);
        double value;
        if (aligned) {
          value = profile((offset + w[static_cast<std::size_t>(n - 1)]) / eps);
        } else {
          Vec y = grid.node_physical(i0, i1, i2);
          value = profile(dot(sub(y, x, n), unit, n) / eps);
        }
        f.values[idx] = value;
        f.datum[idx] = value;
        double dist = 0.5 * grid.box.sides[0] - std::abs(w[0]);
        for (int k = 1; k < n; ++k)
          dist = std::min(dist, 0.5 * grid.box.sides[static_cast<std::size_t>(k)] -
                                    std::abs(w[static_cast<std::size_t>(k)]));
        if (dist < delta_bc - clamp_tol) f.clamped[idx] = 1;
      }
    }
  }
  return f;
}

EnergyWorkspace make_workspace(const Integrand& f, const Grid& grid) {
  EnergyWorkspace ws;
  ws.cell_coeff.assign(grid.cell_count(), f.c1());
  if (f.homogeneous()) return ws;
  int n = grid.n;
  std::size_t c = 0;
  int nc2 = (n == 3) ? grid.cells[2] : 1;
  for (int i2 = 0; i2 < nc2; ++i2) {
    for (int i1 = 0; i1 < grid.cells[1]; ++i1) {
      for (int i0 = 0; i0 < grid.cells[0]; ++i0) {
        Vec zc{};
        int idx[3] = {i0, i1, i2};
        for (int k = 0; k < n; ++k)
          zc[static_cast<std::size_t>(k)] =
              -0.5 * grid.box.sides[static_cast<std::size_t>(k)] + (idx[k] + 0.5) * grid.h;
        Vec yc = add(grid.box.center, mat_vec(grid.box.frame.R, zc, n), n);
        ws.cell_coeff[c++] = f.coefficient_at(yc, n);
      }
    }
  }
  return ws;
}

double tangential_measure(const Grid& grid) {
  double m = 1.0;
  for (int i = 0; i + 1 < grid.n; ++i) m *= grid.box.sides[static_cast<std::size_t>(i)];
  return m;
}

double energy_total(const Integrand& f, const ScalarField& field, double eps,
                    const EnergyWorkspace& ws) {
  if (!(eps > 0.0)) throw std::invalid_argument("energy: eps must be > 0");
  const Grid& g = field.grid;
  int n = g.n;
  const double h = g.h;
  const double inv_h = 1.0 / h;
  const double inv_eps = 1.0 / eps;
  const double p = f.p();
  const bool p_two = (p == 2.0);
  WellEval well(f.well());
  const Mat& R = g.box.frame.R;
  const double* v = field.values.data();
  const double* ac = ws.cell_coeff.data();

  double total = 0.0;
  if (n == 2) {
    const int n0 = g.cells[0], n1 = g.cells[1];
    const int s1 = n0 + 1;
    const double cellvol = h * h;
    std::size_t c = 0;
    for (int i1 = 0; i1 < n1; ++i1) {
      const double* row = v + static_cast<std::size_t>(i1) * s1;
      for (int i0 = 0; i0 < n0; ++i0, ++c) {
        double v00 = row[i0], v10 = row[i0 + 1];
        double v01 = row[i0 + s1], v11 = row[i0 + s1 + 1];
        double g0 = (v10 - v00) * inv_h;
        double g1 = (v01 - v00) * inv_h;
        double uc = 0.25 * (v00 + v10 + v01 + v11);
        double x0 = eps * (R[0][0] * g0 + R[1][0] * g1);
        double x1 = eps * (R[0][1] * g0 + R[1][1] * g1);
        double q = x0 * x0 + x1 * x1;
        double gradterm = p_two ? q : std::pow(q, 0.5 * p);
        total += cellvol * inv_eps * ac[c] * (well.value(uc) + gradterm);
      }
    }
  } else {
    const int n0 = g.cells[0], n1 = g.cells[1], n2 = g.cells[2];
    const int s1 = n0 + 1;
    const int s2 = (n0 + 1) * (n1 + 1);
    const double cellvol = h * h * h;
    std::size_t c = 0;
    for (int i2 = 0; i2 < n2; ++i2) {
      for (int i1 = 0; i1 < n1; ++i1) {
        const double* base = v + static_cast<std::size_t>(i2) * s2 +
                             static_cast<std::size_t>(i1) * s1;
        for (int i0 = 0; i0 < n0; ++i0, ++c) {
          double v000 = base[i0], v100 = base[i0 + 1];
          double v010 = base[i0 + s1], v110 = base[i0 + s1 + 1];
          double v001 = base[i0 + s2], v101 = base[i0 + s2 + 1];
          double v011 = base[i0 + s1 + s2], v111 = base[i0 + s1 + s2 + 1];
          double g0 = (v100 - v000) * inv_h;
          double g1 = (v010 - v000) * inv_h;
          double g2 = (v001 - v000) * inv_h;
          double uc = 0.125 * (v000 + v100 + v010 + v110 + v001 + v101 + v011 + v111);
          double x0 = eps * (R[0][0] * g0 + R[1][0] * g1 + R[2][0] * g2);
          double x1 = eps * (R[0][1] * g0 + R[1][1] * g1 + R[2][1] * g2);
          double x2 = eps * (R[0][2] * g0 + R[1][2] * g1 + R[2][2] * g2);
          double q = x0 * x0 + x1 * x1 + x2 * x2;
          double gradterm = p_two ? q : std::pow(q, 0.5 * p);
          total += cellvol * inv_eps * ac[c] * (well.value(uc) + gradterm);
        }
      }
    }
  }
  return total;
}

void energy_gradient_into(const Integrand& f, const ScalarField& field,
                          double eps, const EnergyWorkspace& ws,
                          std::vector<double>& grad) {
  const Grid& g = field.grid;
  int n = g.n;
  const double h = g.h;
  const double inv_h = 1.0 / h;
  const double inv_eps = 1.0 / eps;
  const double p = f.p();
  const bool p_two = (p == 2.0);
  WellEval well(f.well());
  const Mat& R = g.box.frame.R;
  const double* v = field.values.data();
  const double* ac = ws.cell_coeff.data();

  grad.assign(field.values.size(), 0.0);
  double* gr = grad.data();

  if (n == 2) {
    const int n0 = g.cells[0], n1 = g.cells[1];
    const int s1 = n0 + 1;
    const double cellvol = h * h;
    std::size_t c = 0;
    for (int i1 = 0; i1 < n1; ++i1) {
      for (int i0 = 0; i0 < n0; ++i0, ++c) {
        std::size_t L = static_cast<std::size_t>(i1) * s1 + static_cast<std::size_t>(i0);
        double v00 = v[L], v10 = v[L + 1];
        double v01 = v[L + s1], v11 = v[L + s1 + 1];
        double g0 = (v10 - v00) * inv_h;
        double g1 = (v01 - v00) * inv_h;
        double uc = 0.25 * (v00 + v10 + v01 + v11);
        double x0 = eps * (R[0][0] * g0 + R[1][0] * g1);
        double x1 = eps * (R[0][1] * g0 + R[1][1] * g1);
        double common = cellvol * inv_eps * ac[c];
        // W part: each corner carries 1/4 of d(uc)
        double wq = 0.25 * common * well.derivative(uc);
        gr[L] += wq;
        gr[L + 1] += wq;
        gr[L + s1] += wq;
        gr[L + s1 + 1] += wq;
        // gradient part
        double d0, d1;  // df/dxi (physical)
        if (p_two) {
          d0 = 2.0 * x0;
          d1 = 2.0 * x1;
        } else {
          double q = x0 * x0 + x1 * x1;
          if (q == 0.0) {
            d0 = d1 = 0.0;
          } else {
            double scalef = p * std::pow(q, 0.5 * p - 1.0);
            d0 = scalef * x0;
            d1 = scalef * x1;
          }
        }
        // back to local axes: dE/dg_k = common * eps * (R^T d)_k
        double l0 = common * eps * (R[0][0] * d0 + R[0][1] * d1) * inv_h;
        double l1 = common * eps * (R[1][0] * d0 + R[1][1] * d1) * inv_h;
        gr[L] -= l0 + l1;
        gr[L + 1] += l0;
        gr[L + s1] += l1;
      }
    }
  } else {
    const int n0 = g.cells[0], n1 = g.cells[1], n2 = g.cells[2];
    const int s1 = n0 + 1;
    const int s2 = (n0 + 1) * (n1 + 1);
    const double cellvol = h * h * h;
    std::size_t c = 0;
    for (int i2 = 0; i2 < n2; ++i2) {
      for (int i1 = 0; i1 < n1; ++i1) {
        for (int i0 = 0; i0 < n0; ++i0, ++c) {
          std::size_t L = static_cast<std::size_t>(i2) * s2 +
                          static_cast<std::size_t>(i1) * s1 + static_cast<std::size_t>(i0);
          double v000 = v[L], v100 = v[L + 1];
          double v010 = v[L + s1], v110 = v[L + s1 + 1];
          double v001 = v[L + s2], v101 = v[L + s2 + 1];
          double v011 = v[L + s1 + s2], v111 = v[L + s1 + s2 + 1];
          double g0 = (v100 - v000) * inv_h;
          double g1 = (v010 - v000) * inv_h;
          double g2 = (v001 - v000) * inv_h;
          double uc = 0.125 * (v000 + v100 + v010 + v110 + v001 + v101 + v011 + v111);
          double x0 = eps * (R[0][0] * g0 + R[1][0] * g1 + R[2][0] * g2);
          double x1 = eps * (R[0][1] * g0 + R[1][1] * g1 + R[2][1] * g2);
          double x2 = eps * (R[0][2] * g0 + R[1][2] * g1 + R[2][2] * g2);
          double common = cellvol * inv_eps * ac[c];
          double wq = 0.125 * common * well.derivative(uc);
          gr[L] += wq;
          gr[L + 1] += wq;
          gr[L + s1] += wq;
          gr[L + s1 + 1] += wq;
          gr[L + s2] += wq;
          gr[L + s2 + 1] += wq;
          gr[L + s1 + s2] += wq;
          gr[L + s1 + s2 + 1] += wq;
          double d0, d1, d2;
          if (p_two) {
            d0 = 2.0 * x0;
            d1 = 2.0 * x1;
            d2 = 2.0 * x2;
          } else {
            double q = x0 * x0 + x1 * x1 + x2 * x2;
            if (q == 0.0) {
              d0 = d1 = d2 = 0.0;
            } else {
              double scalef = p * std::pow(q, 0.5 * p - 1.0);
              d0 = scalef * x0;
              d1 = scalef * x1;
              d2 = scalef * x2;
            }
          }
          double l0 = common * eps * (R[0][0] * d0 + R[0][1] * d1 + R[0][2] * d2) * inv_h;
          double l1 = common * eps * (R[1][0] * d0 + R[1][1] * d1 + R[1][2] * d2) * inv_h;
          double l2 = common * eps * (R[2][0] * d0 + R[2][1] * d1 + R[2][2] * d2) * inv_h;
          gr[L] -= l0 + l1 + l2;
          gr[L + 1] += l0;
          gr[L + s1] += l1;
          gr[L + s2] += l2;
        }
      }
    }
  }

  for (std::size_t i = 0; i < grad.size(); ++i)
    if (field.clamped[i]) grad[i] = 0.0;
}

double energy_over_cells(const Integrand& f, const ScalarField& field, double eps,
                         const std::vector<std::uint8_t>& cell_mask) {
  const Grid& g = field.grid;
  if (cell_mask.size() != g.cell_count())
    throw std::invalid_argument("energy_over_cells: mask size mismatch");
  int n = g.n;
  EnergyWorkspace ws = make_workspace(f, g);
  WellEval well(f.well());
  const Mat& R = g.box.frame.R;
  const double inv_h = 1.0 / g.h;
  const double inv_eps = 1.0 / eps;
  const bool p_two = (f.p() == 2.0);
  const double cellvol = std::pow(g.h, n);
  const double* v = field.values.data();
  const int n0 = g.cells[0], n1 = g.cells[1];
  const int n2 = (n == 3) ? g.cells[2] : 1;
  const int s1 = n0 + 1;
  const int s2 = (n0 + 1) * (n1 + 1);
  double total = 0.0;
  std::size_t c = 0;
  for (int i2 = 0; i2 < n2; ++i2) {
    for (int i1 = 0; i1 < n1; ++i1) {
      for (int i0 = 0; i0 < n0; ++i0, ++c) {
        if (!cell_mask[c]) continue;
        std::size_t L = g.node_index(i0, i1, n == 3 ? i2 : 0);
        Vec gl{};
        double uc;
        if (n == 2) {
          double v00 = v[L], v10 = v[L + 1], v01 = v[L + s1], v11 = v[L + s1 + 1];
          gl[0] = (v10 - v00) * inv_h;
          gl[1] = (v01 - v00) * inv_h;
          uc = 0.25 * (v00 + v10 + v01 + v11);
        } else {
          double v000 = v[L], v100 = v[L + 1], v010 = v[L + s1], v110 = v[L + s1 + 1];
          double v001 = v[L + s2], v101 = v[L + s2 + 1], v011 = v[L + s1 + s2],
                 v111 = v[L + s1 + s2 + 1];
          gl[0] = (v100 - v000) * inv_h;
          gl[1] = (v010 - v000) * inv_h;
          gl[2] = (v001 - v000) * inv_h;
          uc = 0.125 * (v000 + v100 + v010 + v110 + v001 + v101 + v011 + v111);
        }
        Vec xi = scale(mat_vec(R, gl, n), eps, n);
        double q = dot(xi, xi, n);
        double gradterm = p_two ? q : std::pow(q, 0.5 * f.p());
        total += cellvol * inv_eps * ws.cell_coeff[c] * (well.value(uc) + gradterm);
      }
    }
  }
  return total;
}

EnergyReport energy(const Integrand& f, const ScalarField& field, double eps) {
  EnergyWorkspace ws = make_workspace(f, field.grid);
  EnergyReport rep;
  rep.total = energy_total(f, field, eps, ws);
  rep.eps = eps;
  rep.density = rep.total / tangential_measure(field.grid);
  return rep;
}

std::vector<double> energy_gradient(const Integrand& f, const ScalarField& field,
                                    double eps) {
  EnergyWorkspace ws = make_workspace(f, field.grid);
  std::vector<double> grad;
  energy_gradient_into(f, field, eps, ws, grad);
  return grad;
}

namespace {

struct AxisSpan {
  double lo, hi;
};

}  // namespace

GlueResult glue(const Integrand& f, const ScalarField& u, const ScalarField& v,
                double eps, int layers, double band) {
  const Grid& gu = u.grid;
  const Grid& gv = v.grid;
  int n = gu.n;
  if (gv.n != n) throw std::invalid_argument("glue: dimension mismatch");
  if (layers < 2) throw std::invalid_argument("glue: need layers >= 2");
  if (std::abs(gu.h - gv.h) > 1e-12 * gu.h)
    throw std::invalid_argument("glue: grid spacing mismatch");
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (std::abs(gu.box.frame.R[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] -
                   gv.box.frame.R[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]) > 1e-12)
        throw std::invalid_argument("glue: frames must coincide");
  double min_side = gu.box.sides[0];
  for (int i = 1; i < n; ++i) min_side = std::min(min_side, gu.box.sides[static_cast<std::size_t>(i)]);
  if (!(band > 0.0) || band > 0.5 * min_side)
    throw std::invalid_argument("glue: band must be in (0, side/2]");

  const double h = gu.h;
  const Mat& R = gu.box.frame.R;
  Vec tu = mat_tvec(R, gu.box.center, n);
  Vec tv = mat_tvec(R, gv.box.center, n);

  AxisSpan su[3], sv[3], un[3];
  for (int k = 0; k < n; ++k) {
    su[k] = {tu[static_cast<std::size_t>(k)] - 0.5 * gu.box.sides[static_cast<std::size_t>(k)],
             tu[static_cast<std::size_t>(k)] + 0.5 * gu.box.sides[static_cast<std::size_t>(k)]};
    sv[k] = {tv[static_cast<std::size_t>(k)] - 0.5 * gv.box.sides[static_cast<std::size_t>(k)],
             tv[static_cast<std::size_t>(k)] + 0.5 * gv.box.sides[static_cast<std::size_t>(k)]};
    un[k] = {std::min(su[k].lo, sv[k].lo), std::max(su[k].hi, sv[k].hi)};
  }
  // union of the two boxes must itself be a box
  double vol_u = 1.0, vol_v = 1.0, vol_int = 1.0, vol_un = 1.0;
  for (int k = 0; k < n; ++k) {
    vol_u *= su[k].hi - su[k].lo;
    vol_v *= sv[k].hi - sv[k].lo;
    vol_int *= std::max(0.0, std::min(su[k].hi, sv[k].hi) - std::max(su[k].lo, sv[k].lo));
    vol_un *= un[k].hi - un[k].lo;
  }
  if (std::abs(vol_u + vol_v - vol_int - vol_un) > 1e-9 * vol_un)
    throw std::invalid_argument("glue: union of domains is not a box");

  Box ub;
  ub.n = n;
  ub.frame = gu.box.frame;
  Vec mid{};
  for (int k = 0; k < n; ++k) {
    mid[static_cast<std::size_t>(k)] = 0.5 * (un[k].lo + un[k].hi);
    ub.sides[static_cast<std::size_t>(k)] = un[k].hi - un[k].lo;
  }
  ub.center = mat_vec(R, mid, n);
  Grid gunion_ = make_grid_box(ub, h);

  // integer node offsets of u's and v's grids inside the union grid
  int offu[3] = {0, 0, 0}, offv[3] = {0, 0, 0};
  for (int k = 0; k < n; ++k) {
    double du = (su[k].lo - un[k].lo) / h;
    double dv = (sv[k].lo - un[k].lo) / h;
    if (std::abs(du - std::round(du)) > 1e-6 || std::abs(dv - std::round(dv)) > 1e-6)
      throw std::invalid_argument("glue: grids are not node-aligned");
    offu[k] = static_cast<int>(std::round(du));
    offv[k] = static_cast<int>(std::round(dv));
  }

  auto un_nodes = gunion_.nodes_per_axis();
  auto u_nodes = gu.nodes_per_axis();
  auto v_nodes = gv.nodes_per_axis();

  std::size_t total_nodes = gunion_.node_count();
  std::vector<double> uval(total_nodes, 0.0), vval(total_nodes, 0.0);
  std::vector<std::uint8_t> inu(total_nodes, 0), inv_(total_nodes, 0);
  std::vector<double> delta(total_nodes, 0.0);

  for (int i2 = 0; i2 < un_nodes[2]; ++i2) {
    for (int i1 = 0; i1 < un_nodes[1]; ++i1) {
      for (int i0 = 0; i0 < un_nodes[0]; ++i0) {
        std::size_t idx = gunion_.node_index(i0, i1, i2);
        int ii[3] = {i0, i1, i2};
        bool in_u = true, in_v = true;
        for (int k = 0; k < n; ++k) {
          int ju = ii[k] - offu[k], jv = ii[k] - offv[k];
          if (ju < 0 || ju >= u_nodes[k]) in_u = false;
          if (jv < 0 || jv >= v_nodes[k]) in_v = false;
        }
        if (in_u) {
          inu[idx] = 1;
          uval[idx] = u.values[gu.node_index(ii[0] - offu[0], ii[1] - offu[1],
                                             n == 3 ? ii[2] - offu[2] : 0)];
        }
        if (in_v) {
          inv_[idx] = 1;
          vval[idx] = v.values[gv.node_index(ii[0] - offv[0], ii[1] - offv[1],
                                             n == 3 ? ii[2] - offv[2] : 0)];
        }
        if (!in_u && !in_v)
          throw std::logic_error("glue: node outside both domains");
        // sup-norm defect from the shrunk core A = A' minus band
        double d = -1e300;
        for (int k = 0; k < n; ++k) {
          double coord = un[k].lo + ii[k] * h;
          double center = 0.5 * (su[k].lo + su[k].hi);
          double half_core = 0.5 * (su[k].hi - su[k].lo) - band;
          d = std::max(d, std::abs(coord - center) - half_core);
        }
        delta[idx] = d;
      }
    }
  }

  EnergyWorkspace ws = make_workspace(f, gunion_);
  double e_u = energy(f, u, eps).total;
  double e_v = energy(f, v, eps).total;

  GlueResult best;
  best.energy_u = e_u;
  best.energy_v = e_v;
  double best_energy = 0.0;
  bool first = true;

  ScalarField w;
  w.grid = gunion_;
  w.values.assign(total_nodes, 0.0);
  w.clamped.assign(total_nodes, 0);
  w.datum.assign(total_nodes, 0.0);
  w.datum_spec = u.datum_spec;

  std::vector<std::uint8_t> pure_u(total_nodes), pure_v(total_nodes);

  for (int layer = 1; layer <= layers; ++layer) {
    double r_in = band * static_cast<double>(layer) / (layers + 1);
    double r_out = band * static_cast<double>(layer + 1) / (layers + 1);
    for (std::size_t idx = 0; idx < total_nodes; ++idx) {
      double phi;
      if (!inv_[idx]) phi = 1.0;
      else if (!inu[idx]) phi = 0.0;
      else if (delta[idx] <= r_in) phi = 1.0;
      else if (delta[idx] >= r_out) phi = 0.0;
      else phi = (r_out - delta[idx]) / (r_out - r_in);
      w.values[idx] = phi * uval[idx] + (1.0 - phi) * vval[idx];
      pure_u[idx] = (phi >= 1.0) ? 1 : 0;
      pure_v[idx] = (phi <= 0.0) ? 1 : 0;
    }
    double e_w = energy_total(f, w, eps, ws);

    // shell cost: energy over cells whose corners are not all pure u or all v
    double omega = 0.0;
    {
      const int n0 = gunion_.cells[0], n1 = gunion_.cells[1];
      const int n2 = (n == 3) ? gunion_.cells[2] : 1;
      auto corner_state = [&](int i0, int i1, int i2, const std::vector<std::uint8_t>& m) {
        return m[gunion_.node_index(i0, i1, i2)] != 0;
      };
      const double inv_h = 1.0 / h;
      const double inv_eps = 1.0 / eps;
      WellEval well(f.well());
      const bool p_two = (f.p() == 2.0);
      double cellvol = std::pow(h, n);
      std::size_t c = 0;
      for (int i2 = 0; i2 < n2; ++i2) {
        for (int i1 = 0; i1 < n1; ++i1) {
          for (int i0 = 0; i0 < n0; ++i0, ++c) {
            bool all_u = true, all_v = true;
            for (int mask = 0; mask < (1 << n); ++mask) {
              int j0 = i0 + (mask & 1), j1 = i1 + ((mask >> 1) & 1);
              int j2 = (n == 3) ? i2 + ((mask >> 2) & 1) : 0;
              if (!corner_state(j0, j1, j2, pure_u)) all_u = false;
              if (!corner_state(j0, j1, j2, pure_v)) all_v = false;
            }
            if (all_u || all_v) continue;
            // evaluate this cell's energy
            std::size_t L = gunion_.node_index(i0, i1, n == 3 ? i2 : 0);
            const double* vv = w.values.data();
            const int s1 = n0 + 1;
            double g0, g1, g2 = 0.0, uc;
            if (n == 2) {
              double v00 = vv[L], v10 = vv[L + 1], v01 = vv[L + s1], v11 = vv[L + s1 + 1];
              g0 = (v10 - v00) * inv_h;
              g1 = (v01 - v00) * inv_h;
              uc = 0.25 * (v00 + v10 + v01 + v11);
            } else {
              const int s2 = (n0 + 1) * (n1 + 1);
              double v000 = vv[L], v100 = vv[L + 1], v010 = vv[L + s1], v110 = vv[L + s1 + 1];
              double v001 = vv[L + s2], v101 = vv[L + s2 + 1], v011 = vv[L + s1 + s2],
                     v111 = vv[L + s1 + s2 + 1];
              g0 = (v100 - v000) * inv_h;
              g1 = (v010 - v000) * inv_h;
              g2 = (v001 - v000) * inv_h;
              uc = 0.125 * (v000 + v100 + v010 + v110 + v001 + v101 + v011 + v111);
            }
            Vec gl{g0, g1, g2};
            Vec xi = scale(mat_vec(R, gl, n), eps, n);
            double q = dot(xi, xi, n);
            double gradterm = p_two ? q : std::pow(q, 0.5 * f.p());
            omega += cellvol * inv_eps * ws.cell_coeff[c] * (well.value(uc) + gradterm);
          }
        }
      }
    }

    if (first || e_w < best_energy) {
      first = false;
      best_energy = e_w;
      best.energy_glued = e_w;
      best.omega_hat = omega;
      best.best_layer = layer;
      best.field = w;
    }
  }

  double tol = 1e-9 * (std::abs(e_u) + std::abs(e_v) + std::abs(best.energy_glued)) + 1e-12;
  best.inequality_ok = best.energy_glued <= e_u + e_v + best.omega_hat + tol;

  // datum and clamp of the union problem, for admissibility checks
  {
    const DatumSpec& ds = u.datum_spec;
    TransitionProfile prof(ds.profile_width);
    ScalarField ref = init_from_datum(gunion_, ds.x, ds.nu, ds.eps,
                                      ds.delta_bc, prof);
    best.field.datum = ref.datum;
    best.field.clamped = ref.clamped;
    best.field.datum_spec = ref.datum_spec;
  }
  return best;
}

ScalarField rescale_field(const ScalarField& field, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("rescale_field: lambda must be > 0");
  ScalarField out = field;
  out.grid.h = field.grid.h * lambda;
  for (int i = 0; i < field.grid.n; ++i) {
    out.grid.box.sides[static_cast<std::size_t>(i)] =
        field.grid.box.sides[static_cast<std::size_t>(i)] * lambda;
    out.grid.box.center[static_cast<std::size_t>(i)] =
        field.grid.box.center[static_cast<std::size_t>(i)] * lambda;
  }
  out.datum_spec.eps = field.datum_spec.eps * lambda;
  out.datum_spec.delta_bc = field.datum_spec.delta_bc * lambda;
  out.datum_spec.phase_offset = field.datum_spec.phase_offset * lambda;
  for (int i = 0; i < field.grid.n; ++i)
    out.datum_spec.x[static_cast<std::size_t>(i)] =
        field.datum_spec.x[static_cast<std::size_t>(i)] * lambda;
  return out;
}

void write_field_csv(const ScalarField& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_field_csv: cannot open " + path);
  const Grid& g = field.grid;
  int n = g.n;
  out << (n == 2 ? "w0,w1,y0,y1,value,clamped\n" : "w0,w1,w2,y0,y1,y2,value,clamped\n");
  auto nodes = g.nodes_per_axis();
  char buf[320];
  for (int i2 = 0; i2 < nodes[2]; ++i2) {
    for (int i1 = 0; i1 < nodes[1]; ++i1) {
      for (int i0 = 0; i0 < nodes[0]; ++i0) {
        std::size_t idx = g.node_index(i0, i1, i2);
        Vec w = g.node_local(i0, i1, i2);
        Vec y = g.node_physical(i0, i1, i2);
        if (n == 2) {
          std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                        w[0], w[1], y[0], y[1], field.values[idx],
                        field.clamped[idx] ? 1 : 0);
        } else {
          std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                        w[0], w[1], w[2], y[0], y[1], y[2], field.values[idx],
                        field.clamped[idx] ? 1 : 0);
        }
        out << buf;
      }
    }
  }
}

void write_field_binary(const ScalarField& field, double eps,
                        const std::string& path) {
  const Grid& g = field.grid;
  for (int i = 1; i < g.n; ++i)
    if (g.cells[static_cast<std::size_t>(i)] != g.cells[0] ||
        std::abs(g.box.sides[static_cast<std::size_t>(i)] - g.box.sides[0]) > 1e-12)
      throw std::invalid_argument("write_field_binary: cubic grids only");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_field_binary: cannot open " + path);
  const char magic[4] = {'P', 'C', 'F', '1'};
  out.write(magic, 4);
  std::int32_t n = g.n, N = g.cells[0];
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&N), sizeof N);
  double rho = g.box.sides[0];
  out.write(reinterpret_cast<const char*>(&rho), sizeof rho);
  for (int i = 0; i < g.n; ++i) {
    double c = g.box.frame.nu[static_cast<std::size_t>(i)];
    out.write(reinterpret_cast<const char*>(&c), sizeof c);
  }
  out.write(reinterpret_cast<const char*>(&eps), sizeof eps);
  out.write(reinterpret_cast<const char*>(field.values.data()),
            static_cast<std::streamsize>(field.values.size() * sizeof(double)));
}

}  // namespace phasecell

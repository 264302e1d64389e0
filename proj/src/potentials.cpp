#include "phasecell/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace phasecell {

namespace {

double horner(const std::vector<double>& c, double t) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
  return v;
}

double horner_derivative(const std::vector<double>& c, double t) {
  double v = 0.0;
  for (int i = static_cast<int>(c.size()) - 1; i >= 1; --i)
    v = v * t + c[static_cast<std::size_t>(i)] * i;
  return v;
}

}  // namespace

DoubleWell::DoubleWell(WellKind kind, double scale, std::vector<double> r)
    : kind_(kind), scale_(scale), r_(std::move(r)) {
  if (!(scale_ > 0.0)) throw std::invalid_argument("DoubleWell: scale must be > 0");
  if (r_.empty()) throw std::invalid_argument("DoubleWell: empty polynomial");
  // The factor R must keep W positive away from {0,1} on the working range.
  for (int i = -500; i <= 1500; ++i) {
    double t = i * 1e-3;
    if (!(horner(r_, t) > 0.0))
      throw std::invalid_argument("DoubleWell: R(t) must be positive on [-0.5, 1.5]");
  }
}

DoubleWell DoubleWell::quartic(double scale) {
  return DoubleWell(WellKind::Quartic, scale, {1.0});
}

DoubleWell DoubleWell::quadratic_wells(double scale, double gain) {
  if (!(gain >= 0.0)) throw std::invalid_argument("DoubleWell: gain must be >= 0");
  // R(t) = 1 + gain (t - 1/2)^2
  return DoubleWell(WellKind::QuadraticWells, scale,
                    {1.0 + 0.25 * gain, -gain, gain});
}

DoubleWell DoubleWell::custom_polynomial(std::vector<double> r_coeffs,
                                         double scale) {
  return DoubleWell(WellKind::CustomPolynomial, scale, std::move(r_coeffs));
}

double DoubleWell::operator()(double t) const {
  double q = t * (1.0 - t);
  return scale_ * q * q * horner(r_, t);
}

double DoubleWell::derivative(double t) const {
  double q = t * (1.0 - t);
  double dq = 1.0 - 2.0 * t;
  return scale_ * (2.0 * q * dq * horner(r_, t) + q * q * horner_derivative(r_, t));
}

DoubleWell DoubleWell::scaled(double factor) const {
  return DoubleWell(kind_, scale_ * factor, r_);
}

std::string DoubleWell::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case WellKind::Quartic: os << "quartic"; break;
    case WellKind::QuadraticWells: os << "quadratic-wells"; break;
    case WellKind::CustomPolynomial: os << "custom-polynomial"; break;
  }
  os << "(scale=" << scale_ << ")";
  return os.str();
}

TransitionProfile::TransitionProfile(double width) : width_(width) {
  if (!(width > 0.0) || width > 1.0)
    throw std::invalid_argument("TransitionProfile: width must be in (0, 1]");
}

double TransitionProfile::operator()(double t) const {
  double s = (t / width_ + 1.0) * 0.5;
  s = std::clamp(s, 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

double TransitionProfile::derivative(double t) const {
  double s = (t / width_ + 1.0) * 0.5;
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 3.0 * s * (1.0 - s) / width_;
}

double eval_profile(double t) {
  static const TransitionProfile def;
  return def(t);
}

void gauss_legendre_01(int k, std::vector<double>& nodes,
                       std::vector<double>& weights) {
  if (k < 1) throw std::invalid_argument("gauss_legendre_01: need k >= 1");
  nodes.assign(static_cast<std::size_t>(k), 0.0);
  weights.assign(static_cast<std::size_t>(k), 0.0);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < k; ++i) {
    double x = std::cos(pi * (i + 0.75) / (k + 0.5));
    double pd = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Legendre recurrence for P_k(x) and P_k'(x)
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= k; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pd = k * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pd;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);  // descending x -> ascending node
    weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * pd * pd);
  }
}

namespace {

struct GlRule {
  std::vector<double> nodes, weights;
};

// thread-safe: magic-static initialization happens inside the initializer
const GlRule& gl7() {
  static const GlRule rule = [] {
    GlRule r;
    gauss_legendre_01(7, r.nodes, r.weights);
    return r;
  }();
  return rule;
}

// Composite GL7 on [a,b] split into `panels` equal panels.
template <class F>
double integrate_gl7(const F& f, double a, double b, int panels) {
  const std::vector<double>& xs = gl7().nodes;
  const std::vector<double>& ws = gl7().weights;
  double total = 0.0;
  double len = (b - a) / panels;
  for (int i = 0; i < panels; ++i) {
    double lo = a + i * len;
    double part = 0.0;
    for (std::size_t q = 0; q < xs.size(); ++q)
      part += ws[q] * f(lo + xs[q] * len);
    total += part * len;
  }
  return total;
}

}  // namespace

double compute_cp(const DoubleWell& w, double p, int quad_points) {
  if (!(p > 1.0)) throw std::invalid_argument("compute_cp: p must be > 1");
  if (quad_points < 64) throw std::invalid_argument("compute_cp: quad_points must be >= 64");
  const double expo = (p - 1.0) / p;
  auto g = [&](double t) { return std::pow(w(t), expo); };

  // Panels graded geometrically toward both roots; the integrand W^{(p-1)/p}
  // can have a cusp there for p < 2.
  int levels = std::max(6, quad_points / 14);
  const std::vector<double>& xs = gl7().nodes;
  const std::vector<double>& ws = gl7().weights;

  double half = 0.0;
  auto add_panel = [&](double lo, double hi, bool mirror) {
    double len = hi - lo;
    double part = 0.0;
    for (std::size_t q = 0; q < xs.size(); ++q) {
      double t = lo + xs[q] * len;
      part += ws[q] * g(mirror ? 1.0 - t : t);
    }
    half += part * len;
  };
  double result = 0.0;
  for (int side = 0; side < 2; ++side) {
    half = 0.0;
    double prev = 0.0;
    for (int j = 1; j <= levels; ++j) {
      double edge = 0.5 * std::ldexp(1.0, j - levels);
      add_panel(prev, edge, side == 1);
      prev = edge;
    }
    result += half;
  }
  return p * std::pow(p - 1.0, (1.0 - p) / p) * result;
}

double compute_Cu(const DoubleWell& w, const TransitionProfile& profile,
                  double p) {
  if (!(p > 1.0)) throw std::invalid_argument("compute_Cu: p must be > 1");
  double width = profile.width();
  auto f = [&](double t) {
    double du = profile.derivative(t);
    return w(profile(t)) + std::pow(std::abs(du), p);
  };
  return integrate_gl7(f, -width, width, 64);
}

namespace {

struct Energy1D {
  // Nodal minimisation of sum_cells h * a_cell * quadrature(W) + gradient term.
  double h = 0.0;
  double p = 2.0;
  const DoubleWell* well = nullptr;
  Quadrature1D quad = Quadrature1D::SegmentExact;
  std::vector<double> gl_nodes, gl_weights;  // on [0,1]
  std::vector<double> a_at_node;             // weight at GL points, per cell (flattened)
  std::vector<double> a_cell;                // cell-average weight

  double pow_p(double x) const {
    double ax = std::abs(x);
    if (p == 2.0) return ax * ax;
    return std::pow(ax, p);
  }
  double dpow_p(double x) const {  // d/dx |x|^p
    if (p == 2.0) return 2.0 * x;
    double ax = std::abs(x);
    if (ax == 0.0) return 0.0;
    return p * std::pow(ax, p - 1.0) * (x > 0 ? 1.0 : -1.0);
  }

  double energy(const std::vector<double>& v) const {
    const DoubleWell& W = *well;
    std::size_t cells = v.size() - 1;
    double total = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
      double d = (v[i + 1] - v[i]) / h;
      double wpart = 0.0;
      if (quad == Quadrature1D::CellMean) {
        wpart = W(0.5 * (v[i] + v[i + 1]));
        total += h * a_cell[i] * (wpart + pow_p(d));
      } else {
        for (std::size_t q = 0; q < gl_nodes.size(); ++q) {
          double val = v[i] + gl_nodes[q] * (v[i + 1] - v[i]);
          wpart += gl_weights[q] * a_at_node[i * gl_nodes.size() + q] * W(val);
        }
        total += h * (wpart + a_cell[i] * pow_p(d));
      }
    }
    return total;
  }

  void gradient(const std::vector<double>& v, std::vector<double>& g) const {
    const DoubleWell& W = *well;
    std::size_t cells = v.size() - 1;
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t i = 0; i < cells; ++i) {
      double d = (v[i + 1] - v[i]) / h;
      double dgrad = a_cell[i] * dpow_p(d);  // d/dd of gradient term (per h)
      if (quad == Quadrature1D::CellMean) {
        double wm = 0.5 * h * a_cell[i] * W.derivative(0.5 * (v[i] + v[i + 1]));
        g[i] += wm - dgrad;
        g[i + 1] += wm + dgrad;
      } else {
        for (std::size_t q = 0; q < gl_nodes.size(); ++q) {
          double xi = gl_nodes[q];
          double val = v[i] + xi * (v[i + 1] - v[i]);
          double wd = h * gl_weights[q] * a_at_node[i * gl_nodes.size() + q] *
                      W.derivative(val);
          g[i] += wd * (1.0 - xi);
          g[i + 1] += wd * xi;
        }
        g[i] -= dgrad;
        g[i + 1] += dgrad;
      }
    }
  }
};

Profile1DResult minimise_1d(Energy1D& e, std::vector<double> v,
                            const std::vector<double>& t) {
  std::size_t nn = v.size();
  std::vector<double> g(nn), gp(nn), vp(nn), pg(nn);
  auto project = [&](std::vector<double>& x) {
    for (std::size_t i = 1; i + 1 < nn; ++i) x[i] = std::clamp(x[i], 0.0, 1.0);
    x[0] = 0.0;
    x[nn - 1] = 1.0;
  };
  project(v);
  double energy = e.energy(v);
  e.gradient(v, g);
  g[0] = g[nn - 1] = 0.0;

  const double scale = std::max(1.0, std::abs(energy));
  const double tol_pg = 1e-10 * scale;
  const int max_iters = 50000;
  const int stall_window = 100;
  double stall_ref = energy;
  int stall_count = 0;
  const double amin = 1e-10 * e.h * e.h, amax = 1e10 * e.h * e.h;
  double alpha = e.h * e.h;
  std::vector<double> recent{energy};

  Profile1DResult out;
  int it = 0;
  for (; it < max_iters; ++it) {
    double pgn = 0.0;
    for (std::size_t i = 0; i < nn; ++i) {
      double stepped = v[i] - g[i];
      if (i == 0) stepped = 0.0;
      else if (i == nn - 1) stepped = 1.0;
      else stepped = std::clamp(stepped, 0.0, 1.0);
      pg[i] = v[i] - stepped;
      pgn = std::max(pgn, std::abs(pg[i]));
    }
    if (pgn <= tol_pg) {
      out.converged = true;
      break;
    }
    if (++stall_count >= stall_window) {
      if (stall_ref - energy <= 1e-14 * scale) {
        out.converged = true;
        break;
      }
      stall_ref = energy;
      stall_count = 0;
    }

    double eref = *std::max_element(recent.begin(), recent.end());
    vp = v;
    gp = g;
    double step = std::clamp(alpha, amin, amax);
    double enew = 0.0;
    std::vector<double> vn(nn);
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < nn; ++i) vn[i] = vp[i] - step * gp[i];
      project(vn);
      enew = e.energy(vn);
      double decr = 0.0;
      for (std::size_t i = 0; i < nn; ++i) decr += gp[i] * (vp[i] - vn[i]);
      if (enew <= eref - 1e-4 * decr || step <= amin) break;
      step *= 0.5;
    }
    v = vn;
    energy = enew;
    e.gradient(v, g);
    g[0] = g[nn - 1] = 0.0;

    double sts = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < nn; ++i) {
      double s = v[i] - vp[i];
      double y = g[i] - gp[i];
      sts += s * s;
      sty += s * y;
    }
    alpha = (sty > 0.0) ? std::clamp(sts / sty, amin, amax) : amax;

    recent.push_back(energy);
    if (recent.size() > 10) recent.erase(recent.begin());
  }
  out.cost = e.energy(v);
  out.iterations = it;
  out.t = t;
  out.v = std::move(v);
  double pgn = 0.0;
  for (std::size_t i = 1; i + 1 < nn; ++i) {
    double stepped = std::clamp(out.v[i] - g[i], 0.0, 1.0);
    pgn = std::max(pgn, std::abs(out.v[i] - stepped));
  }
  out.pg_norm = pgn;
  return out;
}

Energy1D make_energy_1d(const DoubleWell& w, double p, int grid, double T,
                        Quadrature1D quad,
                        const std::vector<double>& weight_values,
                        double weight_offset) {
  Energy1D e;
  e.h = 2.0 * T / grid;
  e.p = p;
  e.well = &w;
  e.quad = quad;
  int k = std::max(3, (w.degree() + 2) / 2);
  gauss_legendre_01(k, e.gl_nodes, e.gl_weights);
  std::size_t cells = static_cast<std::size_t>(grid);
  auto weight_at = [&](double t) {
    if (weight_values.empty()) return 1.0;
    double frac = t - weight_offset - std::floor(t - weight_offset);
    auto idx = static_cast<std::size_t>(frac * static_cast<double>(weight_values.size()));
    idx = std::min(idx, weight_values.size() - 1);
    return weight_values[idx];
  };
  e.a_at_node.resize(cells * e.gl_nodes.size());
  e.a_cell.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    double lo = -T + static_cast<double>(i) * e.h;
    double acc = 0.0;
    for (std::size_t q = 0; q < e.gl_nodes.size(); ++q) {
      double a = weight_at(lo + e.gl_nodes[q] * e.h);
      e.a_at_node[i * e.gl_nodes.size() + q] = a;
      acc += e.gl_weights[q] * a;
    }
    e.a_cell[i] = weight_values.empty() ? 1.0 : acc;
  }
  return e;
}

Profile1DResult run_profile_1d(const DoubleWell& w, double p, int grid,
                               double T, Quadrature1D quad,
                               const std::vector<double>& weight_values,
                               double weight_offset) {
  if (!(p > 1.0)) throw std::invalid_argument("optimal_profile_1d: p must be > 1");
  if (grid < 128) throw std::invalid_argument("optimal_profile_1d: grid must be >= 128");
  if (!(T > 0.0)) throw std::invalid_argument("optimal_profile_1d: half_width must be > 0");

  Energy1D e = make_energy_1d(w, p, grid, T, quad, weight_values, weight_offset);
  std::vector<double> t(static_cast<std::size_t>(grid) + 1);
  std::vector<double> v(t.size());
  TransitionProfile init;
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = -T + static_cast<double>(i) * e.h;
    v[i] = init(t[i]);
  }
  return minimise_1d(e, std::move(v), t);
}

}  // namespace

Profile1DResult optimal_profile_1d(const DoubleWell& w, double p, int grid,
                                   double half_width, Quadrature1D quad) {
  return run_profile_1d(w, p, grid, half_width, quad, {}, 0.0);
}

Profile1DResult weighted_profile_1d(const DoubleWell& w, double p, int grid,
                                    const std::vector<double>& weight_values,
                                    double weight_offset, double half_width) {
  for (double a : weight_values)
    if (!(a > 0.0))
      throw std::invalid_argument("weighted_profile_1d: weights must be positive");
  return run_profile_1d(w, p, grid, half_width, Quadrature1D::SegmentExact,
                        weight_values, weight_offset);
}

}  // namespace phasecell

#pragma once

// Double-well potentials, the reference transition profile, and the 1D
// transition constants c_p (optimal cost) and C_u (reference-profile cost).

#include <string>
#include <vector>

namespace phasecell {

enum class WellKind { Quartic, QuadraticWells, CustomPolynomial };

// W(t) = scale * t^2 (1-t)^2 * R(t), with R a polynomial kept strictly
// positive on the working range. The factored form pins the zeros of W to
// exactly {0,1} and gives closed-form derivatives.
class DoubleWell {
 public:
  static DoubleWell quartic(double scale = 1.0);
  static DoubleWell quadratic_wells(double scale = 1.0, double gain = 4.0);
  // r_coeffs are ascending coefficients of R(t); R must stay positive on
  // [-0.5, 1.5] (checked at construction).
  static DoubleWell custom_polynomial(std::vector<double> r_coeffs,
                                      double scale = 1.0);

  double operator()(double t) const;
  double derivative(double t) const;

  WellKind kind() const { return kind_; }
  double scale() const { return scale_; }
  const std::vector<double>& r_coeffs() const { return r_; }
  // Degree of W as a polynomial in t.
  int degree() const { return 4 + static_cast<int>(r_.size()) - 1; }

  DoubleWell scaled(double factor) const;

  std::string describe() const;

 private:
  DoubleWell(WellKind kind, double scale, std::vector<double> r);

  WellKind kind_;
  double scale_;
  std::vector<double> r_;  // ascending coefficients of R
};

// C^1 transition profile: cubic smoothstep stretched to support [-width,width],
// width in (0,1] so that u(t) = 0 for t <= -1 and u(t) = 1 for t >= 1 always.
class TransitionProfile {
 public:
  explicit TransitionProfile(double width = 1.0);

  double operator()(double t) const;
  double derivative(double t) const;
  double width() const { return width_; }

 private:
  double width_;
};

double eval_profile(double t);  // default profile

// c_p = p (p-1)^{(1-p)/p} \int_0^1 W(t)^{(p-1)/p} dt, composite Gauss-Legendre
// with panels graded geometrically toward t = 0 and t = 1 (the integrand can
// have infinite slope at the roots for p < 2). quad_points >= 64.
double compute_cp(const DoubleWell& w, double p, int quad_points = 512);

// C_u = \int_{-1}^{1} (W(u(t)) + |u'(t)|^p) dt for the given profile; the
// integrand vanishes outside the profile support.
double compute_Cu(const DoubleWell& w, const TransitionProfile& profile,
                  double p);

enum class Quadrature1D {
  SegmentExact,  // exact integral of W along each linear segment (Gauss rule
                 // matched to the polynomial degree of W)
  CellMean       // one-point rule W(mean of cell endpoint values), the same
                 // rule the n-dimensional field energy uses
};

struct Profile1DResult {
  double cost = 0.0;
  std::vector<double> t;
  std::vector<double> v;
  bool converged = false;
  int iterations = 0;
  double pg_norm = 0.0;
};

// Minimises \int_{-T}^{T} a(t) (W(v) + |v'|^p) dt over nodal v with
// v(-T) = 0, v(T) = 1, 0 <= v <= 1. With SegmentExact quadrature the reported
// cost is the exact continuum energy of the piecewise-linear minimiser, hence
// a true upper bound for c_p (unit weight).
Profile1DResult optimal_profile_1d(const DoubleWell& w, double p, int grid,
                                   double half_width = 5.0,
                                   Quadrature1D quad = Quadrature1D::SegmentExact);

// Same problem with a piecewise-constant weight a(t): the "channel oracle"
// for laminate media. weight_period is the period of a; weight_values are the
// equal-width layer values within one period.
Profile1DResult weighted_profile_1d(const DoubleWell& w, double p, int grid,
                                    const std::vector<double>& weight_values,
                                    double weight_offset = 0.0,
                                    double half_width = 5.0);

// Gauss-Legendre nodes/weights on [0,1]; computed by Newton iteration.
void gauss_legendre_01(int k, std::vector<double>& nodes,
                       std::vector<double>& weights);

}  // namespace phasecell

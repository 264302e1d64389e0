#pragma once

// The admissible integrand family f(y,u,xi) = a(y) (W(u) + |xi|^p), with
// constant, periodic (laminate / checkerboard) and stationary random
// coefficient fields. Growth constants are c1 = min a, c2 = max a.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "phasecell/la.hpp"
#include "phasecell/potentials.hpp"

namespace phasecell {

enum class CoefficientKind {
  Constant,
  PeriodicLaminate,
  PeriodicCheckerboard,
  RandomCheckerboard
};

// Stationary random field: one i.i.d. value per unit cell z of Z^n, drawn
// from a finite list by a stateless hash of (master_seed, z + offset). The
// integer offset realises the shift group tau_z exactly: shifting the field
// never re-hashes, so covariance holds bit-for-bit.
struct RandomCheckerboard {
  std::uint64_t master_seed = 0;
  std::vector<double> values;
  std::array<std::int64_t, 3> offset{0, 0, 0};

  double value_at_cell(const std::int64_t* z, int n) const;
};

class CoefficientField {
 public:
  static CoefficientField constant(double a);
  // a varies along `axis`; the unit period splits into equal layers carrying
  // `values` in order.
  static CoefficientField laminate(int axis, std::vector<double> values);
  // 1-periodic checkerboard on half-cells: value index = parity of
  // sum_i floor(2 y_i).
  static CoefficientField checkerboard(double a0, double a1);
  static CoefficientField random_checkerboard(std::uint64_t seed,
                                              std::vector<double> values);

  double operator()(const Vec& y, int n) const;
  double min_value() const { return lo_; }
  double max_value() const { return hi_; }
  CoefficientKind kind() const { return kind_; }
  const RandomCheckerboard& random() const;
  RandomCheckerboard& random();

  std::string describe() const;

 private:
  CoefficientKind kind_ = CoefficientKind::Constant;
  int axis_ = 0;
  std::vector<double> values_{1.0};
  RandomCheckerboard random_{};
  double lo_ = 1.0, hi_ = 1.0;

  void finish_init();
};

struct IntegrandSpec {
  DoubleWell well = DoubleWell::quartic();
  double p = 2.0;
  // kept for the homogeneous variant; coefficient variants derive c1, c2 from
  // the field range
  double c1 = 1.0;
  double c2 = 1.0;
  bool homogeneous = true;
  CoefficientField coefficient = CoefficientField::constant(1.0);
};

class Integrand {
 public:
  double operator()(const Vec& y, double u, const Vec& xi, int n) const;
  double df_du(const Vec& y, double u, const Vec& xi, int n) const;
  // gradient of f with respect to xi
  Vec df_dxi(const Vec& y, double u, const Vec& xi, int n) const;

  // coefficient value at y (1 for the homogeneous variant); spatial_scale
  // rescales the lookup point, realising f(y/eps, u, xi) families.
  double coefficient_at(const Vec& y, int n) const;

  double p() const { return p_; }
  double c1() const { return c1_; }
  double c2() const { return c2_; }
  const DoubleWell& well() const { return well_; }
  bool homogeneous() const { return homogeneous_; }
  const CoefficientField& field() const { return field_; }
  CoefficientField& field() { return field_; }
  double spatial_scale() const { return spatial_scale_; }

  // Copy whose coefficient is evaluated at factor * y.
  Integrand rescale_space(double factor) const;
  // Copy with the random field shifted by tau_z.
  Integrand with_shifted_field(const std::array<std::int64_t, 3>& z) const;

  std::string describe() const;

  friend Integrand make_integrand(const IntegrandSpec& spec);

 private:
  DoubleWell well_ = DoubleWell::quartic();
  double p_ = 2.0;
  double c1_ = 1.0, c2_ = 1.0;
  bool homogeneous_ = true;
  CoefficientField field_ = CoefficientField::constant(1.0);
  double spatial_scale_ = 1.0;
};

Integrand make_integrand(const IntegrandSpec& spec);

double eval_f(const Integrand& f, const Vec& y, double u, const Vec& xi, int n);

RandomCheckerboard shift_random(const RandomCheckerboard& field,
                                const std::array<std::int64_t, 3>& z);

}  // namespace phasecell

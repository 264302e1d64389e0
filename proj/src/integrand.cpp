#include "phasecell/integrand.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "phasecell/rng.hpp"

namespace phasecell {

double RandomCheckerboard::value_at_cell(const std::int64_t* z, int n) const {
  std::int64_t shifted[3] = {0, 0, 0};
  for (int i = 0; i < n; ++i) shifted[i] = z[i] + offset[static_cast<std::size_t>(i)];
  std::uint64_t h = mix_hash(master_seed, shifted, n);
  return values[static_cast<std::size_t>(h % values.size())];
}

void CoefficientField::finish_init() {
  if (values_.empty())
    throw std::invalid_argument("CoefficientField: empty value list");
  for (double v : values_)
    if (!(v > 0.0))
      throw std::invalid_argument("CoefficientField: coefficient values must be > 0");
  lo_ = *std::min_element(values_.begin(), values_.end());
  hi_ = *std::max_element(values_.begin(), values_.end());
}

CoefficientField CoefficientField::constant(double a) {
  CoefficientField f;
  f.kind_ = CoefficientKind::Constant;
  f.values_ = {a};
  f.finish_init();
  return f;
}

CoefficientField CoefficientField::laminate(int axis, std::vector<double> values) {
  if (axis < 0 || axis > 2)
    throw std::invalid_argument("CoefficientField: laminate axis out of range");
  CoefficientField f;
  f.kind_ = CoefficientKind::PeriodicLaminate;
  f.axis_ = axis;
  f.values_ = std::move(values);
  f.finish_init();
  return f;
}

CoefficientField CoefficientField::checkerboard(double a0, double a1) {
  CoefficientField f;
  f.kind_ = CoefficientKind::PeriodicCheckerboard;
  f.values_ = {a0, a1};
  f.finish_init();
  return f;
}

CoefficientField CoefficientField::random_checkerboard(std::uint64_t seed,
                                                       std::vector<double> values) {
  CoefficientField f;
  f.kind_ = CoefficientKind::RandomCheckerboard;
  f.values_ = values;
  f.random_.master_seed = seed;
  f.random_.values = std::move(values);
  f.finish_init();
  return f;
}

const RandomCheckerboard& CoefficientField::random() const {
  if (kind_ != CoefficientKind::RandomCheckerboard)
    throw std::logic_error("CoefficientField: not a random field");
  return random_;
}

RandomCheckerboard& CoefficientField::random() {
  if (kind_ != CoefficientKind::RandomCheckerboard)
    throw std::logic_error("CoefficientField: not a random field");
  return random_;
}

double CoefficientField::operator()(const Vec& y, int n) const {
  switch (kind_) {
    case CoefficientKind::Constant:
      return values_[0];
    case CoefficientKind::PeriodicLaminate: {
      double t = y[static_cast<std::size_t>(axis_)];
      double frac = t - std::floor(t);
      auto idx = static_cast<std::size_t>(frac * static_cast<double>(values_.size()));
      idx = std::min(idx, values_.size() - 1);
      return values_[idx];
    }
    case CoefficientKind::PeriodicCheckerboard: {
      std::int64_t parity = 0;
      for (int i = 0; i < n; ++i)
        parity += static_cast<std::int64_t>(std::floor(2.0 * y[static_cast<std::size_t>(i)]));
      return values_[static_cast<std::size_t>(((parity % 2) + 2) % 2)];
    }
    case CoefficientKind::RandomCheckerboard: {
      std::int64_t z[3] = {0, 0, 0};
      for (int i = 0; i < n; ++i)
        z[i] = static_cast<std::int64_t>(std::floor(y[static_cast<std::size_t>(i)]));
      return random_.value_at_cell(z, n);
    }
  }
  return values_[0];
}

std::string CoefficientField::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case CoefficientKind::Constant: os << "constant(" << values_[0] << ")"; break;
    case CoefficientKind::PeriodicLaminate:
      os << "laminate(axis=" << axis_ << ", layers=" << values_.size() << ")";
      break;
    case CoefficientKind::PeriodicCheckerboard: os << "checkerboard"; break;
    case CoefficientKind::RandomCheckerboard:
      os << "random-checkerboard(seed=" << random_.master_seed << ")";
      break;
  }
  return os.str();
}

Integrand make_integrand(const IntegrandSpec& spec) {
  if (!(spec.p > 1.0)) throw std::invalid_argument("make_integrand: p must be > 1");
  Integrand f;
  f.well_ = spec.well;
  f.p_ = spec.p;
  f.homogeneous_ = spec.homogeneous;
  if (spec.homogeneous) {
    if (!(spec.c1 > 0.0) || spec.c1 > spec.c2)
      throw std::invalid_argument("make_integrand: need 0 < c1 <= c2");
    if (spec.c1 != spec.c2)
      throw std::invalid_argument(
          "make_integrand: homogeneous variant has a single coefficient; use a "
          "coefficient field for c1 < c2");
    f.c1_ = f.c2_ = spec.c1;
    f.field_ = CoefficientField::constant(spec.c1);
  } else {
    f.field_ = spec.coefficient;
    f.c1_ = f.field_.min_value();
    f.c2_ = f.field_.max_value();
  }
  return f;
}

double Integrand::coefficient_at(const Vec& y, int n) const {
  if (homogeneous_) return c1_;
  if (spatial_scale_ == 1.0) return field_(y, n);
  Vec ys{};
  for (int i = 0; i < n; ++i) ys[static_cast<std::size_t>(i)] = spatial_scale_ * y[static_cast<std::size_t>(i)];
  return field_(ys, n);
}

double Integrand::operator()(const Vec& y, double u, const Vec& xi, int n) const {
  double q = dot(xi, xi, n);
  double grad = (p_ == 2.0) ? q : std::pow(q, 0.5 * p_);
  return coefficient_at(y, n) * (well_(u) + grad);
}

double Integrand::df_du(const Vec& y, double u, const Vec&, int n) const {
  return coefficient_at(y, n) * well_.derivative(u);
}

Vec Integrand::df_dxi(const Vec& y, double u, const Vec& xi, int n) const {
  (void)u;
  double a = coefficient_at(y, n);
  Vec g{};
  if (p_ == 2.0) {
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = a * 2.0 * xi[static_cast<std::size_t>(i)];
    return g;
  }
  double q = dot(xi, xi, n);
  if (q == 0.0) return g;  // |xi|^p has vanishing gradient at 0 for p > 1
  double factor = a * p_ * std::pow(q, 0.5 * p_ - 1.0);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = factor * xi[static_cast<std::size_t>(i)];
  return g;
}

Integrand Integrand::rescale_space(double factor) const {
  if (!(factor > 0.0))
    throw std::invalid_argument("Integrand::rescale_space: factor must be > 0");
  Integrand f = *this;
  f.spatial_scale_ = spatial_scale_ * factor;
  return f;
}

Integrand Integrand::with_shifted_field(const std::array<std::int64_t, 3>& z) const {
  Integrand f = *this;
  if (f.field_.kind() == CoefficientKind::RandomCheckerboard)
    f.field_.random() = shift_random(f.field_.random(), z);
  return f;
}

std::string Integrand::describe() const {
  std::ostringstream os;
  os << "f = " << (homogeneous_ ? "" : field_.describe() + " * ") << "("
     << well_.describe() << " + |xi|^" << p_ << "), c1=" << c1_ << ", c2=" << c2_;
  return os.str();
}

double eval_f(const Integrand& f, const Vec& y, double u, const Vec& xi, int n) {
  return f(y, u, xi, n);
}

RandomCheckerboard shift_random(const RandomCheckerboard& field,
                                const std::array<std::int64_t, 3>& z) {
  RandomCheckerboard shifted = field;
  for (std::size_t i = 0; i < 3; ++i) shifted.offset[i] += z[i];
  return shifted;
}

}  // namespace phasecell

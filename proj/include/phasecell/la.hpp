#pragma once

// Small fixed-capacity linear algebra for spatial dimension n <= 3.
// The active dimension is carried by the caller; unused components stay zero.

#include <array>
#include <cmath>
#include <cstddef>

namespace phasecell {

using Vec = std::array<double, 3>;

// Columns of an orthogonal matrix; col(j) is the image of e_j.
using Mat = std::array<Vec, 3>;

inline Vec vec2(double x, double y) { return {x, y, 0.0}; }
inline Vec vec3(double x, double y, double z) { return {x, y, z}; }

inline double dot(const Vec& a, const Vec& b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a, int n) { return std::sqrt(dot(a, a, n)); }

inline Vec add(const Vec& a, const Vec& b, int n) {
  Vec r{};
  for (int i = 0; i < n; ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b, int n) {
  Vec r{};
  for (int i = 0; i < n; ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec scale(const Vec& a, double s, int n) {
  Vec r{};
  for (int i = 0; i < n; ++i) r[i] = a[i] * s;
  return r;
}

// y = M x
inline Vec mat_vec(const Mat& m, const Vec& x, int n) {
  Vec r{};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) r[i] += m[j][i] * x[j];
  return r;
}

// y = M^T x
inline Vec mat_tvec(const Mat& m, const Vec& x, int n) {
  Vec r{};
  for (int j = 0; j < n; ++j) r[j] = dot(m[j], x, n);
  return r;
}

inline Mat mat_mul(const Mat& a, const Mat& b, int n) {
  Mat r{};
  for (int j = 0; j < n; ++j) r[j] = mat_vec(a, b[j], n);
  return r;
}

inline Mat identity(int n) {
  Mat r{};
  for (int i = 0; i < n; ++i) r[i][i] = 1.0;
  return r;
}

inline Mat negate(const Mat& m, int n) {
  Mat r{};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) r[j][i] = -m[j][i];
  return r;
}

// Max |(M^T M - I)_ij|; 0 for exactly orthogonal columns.
inline double orthogonality_defect(const Mat& m, int n) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double e = dot(m[i], m[j], n) - (i == j ? 1.0 : 0.0);
      worst = std::max(worst, std::abs(e));
    }
  return worst;
}

}  // namespace phasecell

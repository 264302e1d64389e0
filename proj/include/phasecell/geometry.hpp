#pragma once

// Rotated cubes Q^nu_rho(x), rotation frames R_nu, jump and regularised jump
// data, and the integer-scaled lattice boxes I_nu feeding the subadditive
// process at rational directions.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "phasecell/la.hpp"
#include "phasecell/potentials.hpp"

namespace phasecell {

struct RotationFrame {
  int n = 2;
  Vec nu{0.0, 1.0, 0.0};
  Mat R = identity(2);  // columns; R e_n = nu
};

// Orthogonal frame with R e_n = nu. In 2D this is the rotation with first
// column (nu_2, -nu_1), for which R_{-nu} = -R_nu, so opposite normals span
// the same cube. In 3D a Householder reflection is used, with the lower
// hemisphere defined through -R of the antipode for the same reason.
// Catalogued rational directions get frames with exactly rational entries.
RotationFrame frame_for(const Vec& nu, int n);

struct RotatedCube {
  Vec x{};          // center
  double rho = 1.0; // side length
  RotationFrame frame;
};

RotatedCube make_cube(const Vec& x, double rho, const Vec& nu, int n);

// Axis-aligned box in the coordinates of `frame`, physical point
// y = center + R w for local w in prod [-sides_i/2, sides_i/2].
struct Box {
  int n = 2;
  Vec center{};
  Vec sides{};
  RotationFrame frame;
};

Box box_of(const RotatedCube& cube);

std::vector<Vec> box_vertices(const Box& box);

// 1 on {(y-x).nu >= 0}, else 0.
int jump_datum(const Vec& x, const Vec& nu, const Vec& y, int n);

// u(((y-x).nu)/eps); coincides with the jump datum where |(y-x).nu| > eps.
double regularised_datum(const Vec& x, const Vec& nu, double eps,
                         const TransitionProfile& profile, const Vec& y, int n);

// Rational direction catalog (n = 2). Returns M_nu, the smallest integer > 2
// with M_nu R_nu integer-valued, when nu matches a catalogued direction.
std::optional<std::int64_t> catalog_m_nu(const Vec& nu, int n);

std::vector<Vec> catalog_directions(int n);

struct LatticeInterval {
  int d = 1;  // dimension of I (= n-1)
  std::array<std::int64_t, 2> lo{};
  std::array<std::int64_t, 2> hi{};
  Vec nu{};
  std::int64_t m_nu = 3;
  double c = 0.5;  // half-extent along nu before scaling
  Box box;         // I_nu = M_nu R_nu (I x [-c, c))
};

// Builds I_nu := M_nu R_nu (I x [-c,c)), c = max_i (hi_i - lo_i)/2. Throws if
// nu is not catalogued (callers should fall back to direct cube estimates) or
// if I is degenerate.
LatticeInterval lattice_interval(const std::array<std::int64_t, 2>& lo,
                                 const std::array<std::int64_t, 2>& hi,
                                 const Vec& nu, int n);

// Lattice vector z'_nu = M_nu R_nu (z', 0) of the translation
// (I + z')_nu = I_nu + z'_nu; lies in Z^n and in the hyperplane Pi^nu.
std::array<std::int64_t, 3> lattice_shift_vector(const LatticeInterval& iv,
                                                 const std::array<std::int64_t, 2>& z);

}  // namespace phasecell

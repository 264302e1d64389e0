#include "phasecell/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace phasecell {

namespace {

struct CatalogEntry {
  std::int64_t a, b, q;  // direction (a, b)/q
};

// Base rational directions; the catalog is closed under sign changes.
const CatalogEntry kCatalog2d[] = {
    {1, 0, 1}, {0, 1, 1}, {3, 4, 5}, {4, 3, 5}, {5, 12, 13}, {8, 15, 17},
};

std::optional<CatalogEntry> match_catalog_2d(const Vec& nu) {
  for (const auto& e : kCatalog2d) {
    for (int sa = -1; sa <= 1; sa += 2) {
      for (int sb = -1; sb <= 1; sb += 2) {
        double dx = static_cast<double>(sa * e.a) / static_cast<double>(e.q);
        double dy = static_cast<double>(sb * e.b) / static_cast<double>(e.q);
        if (std::abs(nu[0] - dx) < 1e-12 && std::abs(nu[1] - dy) < 1e-12)
          return CatalogEntry{sa * e.a, sb * e.b, e.q};
      }
    }
  }
  return std::nullopt;
}

int last_nonzero_index(const Vec& nu, int n) {
  for (int i = n - 1; i >= 0; --i)
    if (nu[static_cast<std::size_t>(i)] != 0.0) return i;
  return -1;
}

Mat householder_to_en(const Vec& nu, int n) {
  // Reflection mapping e_n to nu; valid away from nu = e_n.
  Vec w{};
  for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = -nu[static_cast<std::size_t>(i)];
  w[static_cast<std::size_t>(n - 1)] += 1.0;  // w = e_n - nu
  double ww = dot(w, w, n);
  if (ww < 1e-28) return identity(n);
  Mat m = identity(n);
  for (int j = 0; j < n; ++j) {
    double proj = 2.0 * w[static_cast<std::size_t>(j)] / ww;
    for (int i = 0; i < n; ++i)
      m[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] -= proj * w[static_cast<std::size_t>(i)];
  }
  return m;
}

}  // namespace

RotationFrame frame_for(const Vec& nu_in, int n) {
  if (n != 2 && n != 3) throw std::invalid_argument("frame_for: n must be 2 or 3");
  double len = norm(nu_in, n);
  if (!(len > 0.0)) throw std::invalid_argument("frame_for: zero direction");
  Vec nu{};
  for (int i = 0; i < n; ++i) nu[static_cast<std::size_t>(i)] = nu_in[static_cast<std::size_t>(i)] / len;

  RotationFrame f;
  f.n = n;
  f.nu = nu;
  if (n == 2) {
    if (auto e = match_catalog_2d(nu)) {
      // exact rational entries
      double a = static_cast<double>(e->a) / static_cast<double>(e->q);
      double b = static_cast<double>(e->b) / static_cast<double>(e->q);
      f.nu = vec2(a, b);
      f.R[0] = vec2(b, -a);
      f.R[1] = vec2(a, b);
    } else {
      f.R[0] = vec2(nu[1], -nu[0]);
      f.R[1] = nu;
    }
    return f;
  }

  int i_nu = last_nonzero_index(nu, n);
  if (nu[static_cast<std::size_t>(i_nu)] > 0.0) {
    f.R = householder_to_en(nu, n);
  } else {
    Vec anti = scale(nu, -1.0, n);
    f.R = negate(householder_to_en(anti, n), n);
  }
  return f;
}

RotatedCube make_cube(const Vec& x, double rho, const Vec& nu, int n) {
  if (!(rho > 0.0)) throw std::invalid_argument("make_cube: rho must be > 0");
  RotatedCube c;
  c.x = x;
  c.rho = rho;
  c.frame = frame_for(nu, n);
  return c;
}

Box box_of(const RotatedCube& cube) {
  Box b;
  b.n = cube.frame.n;
  b.center = cube.x;
  for (int i = 0; i < b.n; ++i) b.sides[static_cast<std::size_t>(i)] = cube.rho;
  b.frame = cube.frame;
  return b;
}

std::vector<Vec> box_vertices(const Box& box) {
  std::vector<Vec> out;
  int corners = 1 << box.n;
  out.reserve(static_cast<std::size_t>(corners));
  for (int mask = 0; mask < corners; ++mask) {
    Vec local{};
    for (int i = 0; i < box.n; ++i)
      local[static_cast<std::size_t>(i)] =
          ((mask >> i) & 1 ? 0.5 : -0.5) * box.sides[static_cast<std::size_t>(i)];
    out.push_back(add(box.center, mat_vec(box.frame.R, local, box.n), box.n));
  }
  return out;
}

int jump_datum(const Vec& x, const Vec& nu, const Vec& y, int n) {
  return dot(sub(y, x, n), nu, n) >= 0.0 ? 1 : 0;
}

double regularised_datum(const Vec& x, const Vec& nu, double eps,
                         const TransitionProfile& profile, const Vec& y, int n) {
  if (!(eps > 0.0)) throw std::invalid_argument("regularised_datum: eps must be > 0");
  return profile(dot(sub(y, x, n), nu, n) / eps);
}

std::optional<std::int64_t> catalog_m_nu(const Vec& nu, int n) {
  if (n != 2) return std::nullopt;
  double len = norm(nu, 2);
  if (!(len > 0.0)) return std::nullopt;
  Vec unit = vec2(nu[0] / len, nu[1] / len);
  if (auto e = match_catalog_2d(unit))
    return e->q > 2 ? e->q : 3;  // smallest integer > 2 clearing denominators
  return std::nullopt;
}

std::vector<Vec> catalog_directions(int n) {
  std::vector<Vec> out;
  if (n != 2) return out;
  for (const auto& e : kCatalog2d) {
    for (int sa = -1; sa <= 1; sa += 2) {
      for (int sb = -1; sb <= 1; sb += 2) {
        double dx = static_cast<double>(sa * e.a) / static_cast<double>(e.q);
        double dy = static_cast<double>(sb * e.b) / static_cast<double>(e.q);
        Vec v = vec2(dx, dy);
        bool dup = false;
        for (const auto& u : out)
          if (std::abs(u[0] - v[0]) < 1e-15 && std::abs(u[1] - v[1]) < 1e-15) dup = true;
        if (!dup) out.push_back(v);
      }
    }
  }
  return out;
}

LatticeInterval lattice_interval(const std::array<std::int64_t, 2>& lo,
                                 const std::array<std::int64_t, 2>& hi,
                                 const Vec& nu, int n) {
  auto m = catalog_m_nu(nu, n);
  if (!m)
    throw std::invalid_argument(
        "lattice_interval: direction not in the rational catalog; use direct "
        "cube estimates for generic normals");
  int d = n - 1;
  std::int64_t max_len = 0;
  for (int i = 0; i < d; ++i) {
    if (hi[static_cast<std::size_t>(i)] <= lo[static_cast<std::size_t>(i)])
      throw std::invalid_argument("lattice_interval: degenerate interval");
    max_len = std::max(max_len, hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)]);
  }

  LatticeInterval iv;
  iv.d = d;
  iv.lo = lo;
  iv.hi = hi;
  iv.m_nu = *m;
  iv.c = 0.5 * static_cast<double>(max_len);
  iv.nu = frame_for(nu, n).nu;

  Box box;
  box.n = n;
  box.frame = frame_for(nu, n);
  Vec mid{};
  double mnu = static_cast<double>(iv.m_nu);
  for (int i = 0; i < d; ++i) {
    double a = static_cast<double>(lo[static_cast<std::size_t>(i)]);
    double b = static_cast<double>(hi[static_cast<std::size_t>(i)]);
    box.sides[static_cast<std::size_t>(i)] = mnu * (b - a);
    mid[static_cast<std::size_t>(i)] = mnu * 0.5 * (a + b);
  }
  box.sides[static_cast<std::size_t>(n - 1)] = mnu * 2.0 * iv.c;
  mid[static_cast<std::size_t>(n - 1)] = 0.0;
  box.center = mat_vec(box.frame.R, mid, n);
  iv.box = box;
  return iv;
}

std::array<std::int64_t, 3> lattice_shift_vector(const LatticeInterval& iv,
                                                 const std::array<std::int64_t, 2>& z) {
  // M_nu R_nu (z', 0): exact integer arithmetic through the rational frame.
  std::array<std::int64_t, 3> out{0, 0, 0};
  int n = iv.d + 1;
  Vec local{};
  for (int i = 0; i < iv.d; ++i)
    local[static_cast<std::size_t>(i)] = static_cast<double>(z[static_cast<std::size_t>(i)]);
  Vec shifted = mat_vec(iv.box.frame.R, local, n);
  for (int i = 0; i < n; ++i) {
    double v = static_cast<double>(iv.m_nu) * shifted[static_cast<std::size_t>(i)];
    double r = std::round(v);
    if (std::abs(v - r) > 1e-9)
      throw std::logic_error("lattice_shift_vector: non-integer lattice vector");
    out[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(r);
  }
  return out;
}

}  // namespace phasecell

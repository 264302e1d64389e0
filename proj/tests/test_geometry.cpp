#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "phasecell/geometry.hpp"
#include "phasecell/rng.hpp"

using namespace phasecell;

TEST_CASE("frame for e_n is the identity") {
  RotationFrame f = frame_for(vec2(0, 1), 2);
  CHECK(f.R[0][0] == 1.0);
  CHECK(f.R[0][1] == 0.0);
  CHECK(f.R[1][0] == 0.0);
  CHECK(f.R[1][1] == 1.0);
  RotationFrame g = frame_for(vec3(0, 0, 1), 3);
  CHECK(orthogonality_defect(g.R, 3) == 0.0);
  CHECK(g.R[2][2] == 1.0);
}

TEST_CASE("catalogued rational direction matches the published frame") {
  RotationFrame f = frame_for(vec2(0.6, 0.8), 2);
  // rows [[4/5, 3/5], [-3/5, 4/5]]
  CHECK(f.R[0][0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(f.R[1][0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(f.R[0][1] == doctest::Approx(-0.6).epsilon(1e-15));
  CHECK(f.R[1][1] == doctest::Approx(0.8).epsilon(1e-15));
  // 5 R has integer entries
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i) {
      double v = 5.0 * f.R[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
      CHECK(std::abs(v - std::round(v)) < 1e-12);
    }
  CHECK(*catalog_m_nu(vec2(0.6, 0.8), 2) == 5);
  CHECK(*catalog_m_nu(vec2(0, 1), 2) == 3);
  CHECK(*catalog_m_nu(vec2(5.0 / 13, 12.0 / 13), 2) == 13);
  CHECK(!catalog_m_nu(vec2(1, 1), 2));
}

TEST_CASE("frames are orthogonal with R e_n = nu") {
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    double a = rng.uniform(0, 2 * M_PI);
    RotationFrame f = frame_for(vec2(std::cos(a), std::sin(a)), 2);
    CHECK(orthogonality_defect(f.R, 2) <= 1e-12);
    Vec im = mat_vec(f.R, vec2(0, 1), 2);
    CHECK(std::abs(im[0] - f.nu[0]) <= 1e-12);
    CHECK(std::abs(im[1] - f.nu[1]) <= 1e-12);

    Vec v = vec3(rng.symmetric(1), rng.symmetric(1), rng.symmetric(1));
    if (norm(v, 3) < 0.1) continue;
    RotationFrame g = frame_for(v, 3);
    CHECK(orthogonality_defect(g.R, 3) <= 1e-12);
    Vec im3 = mat_vec(g.R, vec3(0, 0, 1), 3);
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(im3[static_cast<std::size_t>(i)] - g.nu[static_cast<std::size_t>(i)]) <= 1e-12);
  }
  CHECK_THROWS(frame_for(Vec{}, 2));
}

TEST_CASE("opposite normals span the same cube") {
  Rng rng(9);
  for (int n : {2, 3}) {
    for (int k = 0; k < 60; ++k) {
      Vec nu{};
      for (int i = 0; i < n; ++i) nu[static_cast<std::size_t>(i)] = rng.symmetric(1);
      if (norm(nu, n) < 0.05) continue;
      auto va = box_vertices(box_of(make_cube(Vec{}, 2.0, nu, n)));
      auto vb = box_vertices(box_of(make_cube(Vec{}, 2.0, scale(nu, -1.0, n), n)));
      for (const Vec& p : va) {
        double best = 1e300;
        for (const Vec& q : vb) best = std::min(best, norm(sub(p, q, n), n));
        CHECK(best <= 1e-12);
      }
    }
  }
}

TEST_CASE("jump datum") {
  Vec x = vec2(0.3, -0.2);
  Vec nu = vec2(0, 1);
  CHECK(jump_datum(x, nu, x, 2) == 1);
  CHECK(jump_datum(x, nu, sub(x, nu, 2), 2) == 0);
  CHECK(jump_datum(x, nu, add(x, nu, 2), 2) == 1);
}

TEST_CASE("regularised datum saturates outside the slab") {
  TransitionProfile prof;
  Vec x = vec2(0.1, 0.4);
  Vec nu = vec2(0.6, 0.8);
  double eps = 0.2;
  Vec above = add(x, scale(nu, 2.0 * eps, 2), 2);
  Vec below = add(x, scale(nu, -2.0 * eps, 2), 2);
  CHECK(regularised_datum(x, nu, eps, prof, above, 2) == 1.0);
  CHECK(regularised_datum(x, nu, eps, prof, below, 2) == 0.0);
  CHECK(regularised_datum(x, nu, eps, prof, x, 2) == doctest::Approx(0.5).epsilon(1e-14));
  // eps = 1 is the eps-free regularised datum
  Rng rng(21);
  for (int k = 0; k < 50; ++k) {
    Vec y = vec2(rng.symmetric(2), rng.symmetric(2));
    double t = dot(sub(y, x, 2), nu, 2);
    CHECK(regularised_datum(x, nu, 1.0, prof, y, 2) == prof(t));
  }
  CHECK_THROWS(regularised_datum(x, nu, 0.0, prof, x, 2));
}

TEST_CASE("lattice interval for the vertical direction") {
  LatticeInterval iv = lattice_interval({-1, 0}, {1, 0}, vec2(0, 1), 2);
  CHECK(iv.m_nu == 3);
  CHECK(iv.c == doctest::Approx(1.0));
  // I_nu = 3 ([-1,1) x [-1,1)): sides 6, centered at the origin
  CHECK(iv.box.sides[0] == doctest::Approx(6.0));
  CHECK(iv.box.sides[1] == doctest::Approx(6.0));
  CHECK(std::abs(iv.box.center[0]) < 1e-12);
  CHECK(std::abs(iv.box.center[1]) < 1e-12);
}

TEST_CASE("lattice interval for (3,4)/5") {
  LatticeInterval iv = lattice_interval({0, 0}, {1, 0}, vec2(0.6, 0.8), 2);
  CHECK(iv.m_nu == 5);
  CHECK(iv.c == doctest::Approx(0.5));
  CHECK(iv.box.sides[0] == doctest::Approx(5.0));
  CHECK(iv.box.sides[1] == doctest::Approx(5.0));
}

TEST_CASE("lattice translation property") {
  for (const Vec& nu : {vec2(0, 1), vec2(0.6, 0.8), vec2(-0.8, 0.6)}) {
    LatticeInterval base = lattice_interval({0, 0}, {2, 0}, nu, 2);
    for (std::int64_t z : {-2, 1, 4}) {
      LatticeInterval moved = lattice_interval({z, 0}, {z + 2, 0}, nu, 2);
      auto zv = lattice_shift_vector(base, {z, 0});
      // (I + z')_nu = I_nu + M R (z',0), and the shift lies in Pi^nu and Z^n
      for (int i = 0; i < 2; ++i) {
        double expected = base.box.center[static_cast<std::size_t>(i)] +
                          static_cast<double>(zv[static_cast<std::size_t>(i)]);
        CHECK(std::abs(moved.box.center[static_cast<std::size_t>(i)] - expected) < 1e-9);
      }
      // exact in integer arithmetic: z'_nu . (a, b) with nu = (a, b)/q
      std::int64_t q = base.m_nu == 3 ? 1 : base.m_nu;
      std::int64_t a = static_cast<std::int64_t>(std::llround(base.nu[0] * static_cast<double>(q)));
      std::int64_t b = static_cast<std::int64_t>(std::llround(base.nu[1] * static_cast<double>(q)));
      CHECK(zv[0] * a + zv[1] * b == 0);
    }
  }
}

TEST_CASE("lattice interval rejects bad input") {
  CHECK_THROWS(lattice_interval({0, 0}, {0, 0}, vec2(0, 1), 2));        // degenerate
  CHECK_THROWS(lattice_interval({0, 0}, {1, 0}, vec2(1, 1), 2));        // off catalog
}

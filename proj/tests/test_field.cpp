#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "phasecell/field.hpp"
#include "phasecell/rng.hpp"

using namespace phasecell;

namespace {

Integrand homogeneous(double p = 2.0) {
  IntegrandSpec spec;
  spec.p = p;
  return make_integrand(spec);
}

ScalarField noisy(const Grid& grid, const Vec& nu, double eps, double amp,
                  std::uint64_t seed) {
  ScalarField f = init_from_datum(grid, Vec{}, nu, eps, 2.0 * grid.h);
  Rng rng(seed);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (f.clamped[i]) continue;
    f.values[i] = std::clamp(f.values[i] + amp * rng.symmetric(1.0), 0.0, 1.0);
  }
  return f;
}

}  // namespace

TEST_CASE("datum initialisation: values, clamps, validation") {
  RotatedCube cube = make_cube(Vec{}, 1.0, vec2(0, 1), 2);
  Grid grid = make_grid(cube, 32);
  double eps = 0.125;
  ScalarField f = init_from_datum(grid, Vec{}, vec2(0, 1), eps, 2.0 * grid.h);

  // boundary nodes are clamped, the mid-plane node holds 1/2
  CHECK(f.clamped[grid.node_index(0, 0)] == 1);
  CHECK(f.clamped[grid.node_index(32, 32)] == 1);
  CHECK(f.clamped[grid.node_index(16, 0)] == 1);
  CHECK(f.clamped[grid.node_index(16, 16)] == 0);
  CHECK(f.values[grid.node_index(16, 16)] == doctest::Approx(0.5).epsilon(1e-14));
  // two node layers at delta_bc = 2h, not three
  CHECK(f.clamped[grid.node_index(16, 1)] == 1);
  CHECK(f.clamped[grid.node_index(16, 2)] == 0);
  // saturated away from the interface
  CHECK(f.values[grid.node_index(16, 30)] == 1.0);
  CHECK(f.values[grid.node_index(16, 2)] == 0.0);

  CHECK_THROWS(init_from_datum(grid, Vec{}, vec2(0, 1), eps, 0.5 * grid.h));
  CHECK_THROWS(init_from_datum(grid, Vec{}, vec2(0, 1), eps, 0.6));
  CHECK_THROWS(init_from_datum(grid, Vec{}, Vec{}, eps, 2.0 * grid.h));
}

TEST_CASE("constant fields have zero energy at the wells") {
  Integrand f = homogeneous();
  RotatedCube cube = make_cube(Vec{}, 1.0, vec2(0, 1), 2);
  Grid grid = make_grid(cube, 16);
  ScalarField u = init_from_datum(grid, Vec{}, vec2(0, 1), 0.125, 2.0 * grid.h);
  std::fill(u.values.begin(), u.values.end(), 0.0);
  CHECK(energy(f, u, 0.125).total == 0.0);
  std::fill(u.values.begin(), u.values.end(), 1.0);
  CHECK(energy(f, u, 0.125).total == 0.0);
}

TEST_CASE("datum energy is bounded by c2 C_u rho^{n-1} (1 + slack)") {
  double cu = compute_Cu(DoubleWell::quartic(), TransitionProfile{}, 2.0);
  for (int n : {2, 3}) {
    Integrand f = homogeneous();
    Vec nu = n == 2 ? vec2(0, 1) : vec3(0, 0, 1);
    RotatedCube cube = make_cube(Vec{}, 1.0, nu, n);
    Grid grid = make_grid(cube, n == 2 ? 64 : 24);
    for (double eps : {0.125, 0.0625}) {
      ScalarField u = init_from_datum(grid, Vec{}, nu, eps, 2.0 * grid.h);
      double total = energy(f, u, eps).total;
      CHECK(total <= cu * 1.05);
      CHECK(total > 0.0);
    }
  }
}

TEST_CASE("slicing lower bound at admissible fields") {
  Integrand f = homogeneous();
  double cp = compute_cp(f.well(), 2.0);
  RotatedCube cube = make_cube(Vec{}, 1.0, vec2(0, 1), 2);
  Grid grid = make_grid(cube, 64);
  for (std::uint64_t s : {1u, 2u, 3u}) {
    ScalarField u = noisy(grid, vec2(0, 1), 0.0625, 0.3, s);
    CHECK(energy(f, u, 0.0625).total >= cp * 0.95);
  }
}

TEST_CASE("analytic gradient matches finite differences") {
  Rng pick(1234);
  IntegrandSpec lam;
  lam.homogeneous = false;
  lam.coefficient = CoefficientField::laminate(1, {1.0, 2.0});
  IntegrandSpec rc;
  rc.homogeneous = false;
  rc.coefficient = CoefficientField::random_checkerboard(9, {0.5, 2.0});
  for (const Integrand& f :
       {homogeneous(), homogeneous(3.0), make_integrand(lam), make_integrand(rc)}) {
    RotatedCube cube = make_cube(Vec{}, 1.0, vec2(0.6, 0.8), 2);
    Grid grid = make_grid(cube, 20);
    EnergyWorkspace ws = make_workspace(f, grid);
    for (int trial = 0; trial < 5; ++trial) {
      ScalarField u = noisy(grid, vec2(0.6, 0.8), 0.25, 0.3,
                            100 + static_cast<std::uint64_t>(trial));
      for (auto& v : u.values) v = 0.2 + 0.6 * v;  // FD probes stay inside [0,1]
      u.enforce_clamp();
      std::vector<double> grad;
      energy_gradient_into(f, u, 0.25, ws, grad);
      for (int probe = 0; probe < 5; ++probe) {
        std::size_t idx = static_cast<std::size_t>(pick.next_u64() % u.values.size());
        if (u.clamped[idx]) continue;
        double d = 1e-6, saved = u.values[idx];
        u.values[idx] = saved + d;
        double ep = energy_total(f, u, 0.25, ws);
        u.values[idx] = saved - d;
        double em = energy_total(f, u, 0.25, ws);
        u.values[idx] = saved;
        double fd = (ep - em) / (2 * d);
        CHECK(std::abs(fd - grad[idx]) / std::max(1.0, std::abs(grad[idx])) < 1e-5);
      }
      for (std::size_t i = 0; i < grad.size(); ++i)
        if (u.clamped[i]) CHECK(grad[i] == 0.0);
    }
  }
}

TEST_CASE("gradient in 3D matches finite differences") {
  Integrand f = homogeneous();
  RotatedCube cube = make_cube(Vec{}, 1.0, vec3(0.6, 0, 0.8), 3);
  Grid grid = make_grid(cube, 10);
  EnergyWorkspace ws = make_workspace(f, grid);
  ScalarField u = init_from_datum(grid, Vec{}, vec3(0.6, 0, 0.8), 0.25, 2.0 * grid.h);
  Rng rng(5);
  for (auto& v : u.values) v = std::clamp(v + 0.2 * rng.symmetric(1.0), 0.2, 0.8);
  u.enforce_clamp();
  std::vector<double> grad;
  energy_gradient_into(f, u, 0.25, ws, grad);
  Rng pick(6);
  for (int probe = 0; probe < 10; ++probe) {
    std::size_t idx = static_cast<std::size_t>(pick.next_u64() % u.values.size());
    if (u.clamped[idx]) continue;
    double d = 1e-6, saved = u.values[idx];
    u.values[idx] = saved + d;
    double ep = energy_total(f, u, 0.25, ws);
    u.values[idx] = saved - d;
    double em = energy_total(f, u, 0.25, ws);
    u.values[idx] = saved;
    CHECK(std::abs((ep - em) / (2 * d) - grad[idx]) < 1e-5 * std::max(1.0, std::abs(grad[idx])));
  }
}

TEST_CASE("energy is frame-covariant for homogeneous integrands") {
  Integrand f = homogeneous();
  for (const Vec& nu : {vec2(0.6, 0.8), vec2(-0.8, 0.6), vec2(5.0 / 13, 12.0 / 13)}) {
    RotatedCube rot = make_cube(Vec{}, 1.0, nu, 2);
    Grid grot = make_grid(rot, 24);
    ScalarField u = noisy(grot, nu, 0.2, 0.3, 77);
    RotatedCube axis = make_cube(Vec{}, 1.0, vec2(0, 1), 2);
    Grid gax = make_grid(axis, 24);
    ScalarField v = init_from_datum(gax, Vec{}, vec2(0, 1), 0.2, 2.0 * gax.h);
    v.values = u.values;
    double e1 = energy(f, u, 0.2).total;
    double e2 = energy(f, v, 0.2).total;
    CHECK(std::abs(e1 - e2) <= 1e-10 * e1);
  }
}

TEST_CASE("rescaling a field") {
  Integrand f = homogeneous();
  RotatedCube cube = make_cube(Vec{}, 1.0, vec2(0, 1), 2);
  Grid grid = make_grid(cube, 32);
  ScalarField u = noisy(grid, vec2(0, 1), 0.25, 0.2, 8);

  SUBCASE("identity at lambda = 1") {
    ScalarField v = rescale_field(u, 1.0);
    CHECK(v.values == u.values);
    CHECK(v.grid.h == u.grid.h);
  }
  SUBCASE("composition") {
    ScalarField a = rescale_field(rescale_field(u, 2.0), 3.0);
    ScalarField b = rescale_field(u, 6.0);
    CHECK(a.grid.h == doctest::Approx(b.grid.h).epsilon(1e-15));
    CHECK(a.grid.box.sides[0] == doctest::Approx(b.grid.box.sides[0]).epsilon(1e-15));
    CHECK(a.values == b.values);
  }
  SUBCASE("energy identity on matched grids") {
    for (double eps : {0.25, 0.125}) {
      double lhs = energy(f, u, eps).total;
      ScalarField v = rescale_field(u, 1.0 / eps);
      double rhs = eps * energy(f, v, 1.0).total;  // n = 2: eps^{n-1} = eps
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
    }
  }
  CHECK_THROWS(rescale_field(u, 0.0));
}

TEST_CASE("gluing identical fields returns the field itself") {
  Integrand f = homogeneous();
  double eps = 0.1;
  RotatedCube cube = make_cube(Vec{}, 1.0, vec2(0, 1), 2);
  Grid grid = make_grid(cube, 40);
  ScalarField u = init_from_datum(grid, Vec{}, vec2(0, 1), eps, 2.0 * grid.h);
  GlueResult g = glue(f, u, u, eps, 4, 0.25);
  CHECK(g.field.values == u.values);
  CHECK(g.inequality_ok);
  CHECK(g.energy_glued == doctest::Approx(g.energy_u).epsilon(1e-12));
}

TEST_CASE("gluing pure phases costs nothing") {
  Integrand f = homogeneous();
  RotatedCube cube = make_cube(Vec{}, 1.0, vec2(0, 1), 2);
  Grid grid = make_grid(cube, 40);
  ScalarField u = init_from_datum(grid, Vec{}, vec2(0, 1), 0.1, 2.0 * grid.h);
  RotatedCube moved = cube;
  moved.x = vec2(3.0 * grid.h, 0);
  Grid gmoved = make_grid(moved, 40);
  ScalarField v = init_from_datum(gmoved, Vec{}, vec2(0, 1), 0.1, 2.0 * gmoved.h);
  for (auto* w : {&u, &v}) {
    std::fill(w->values.begin(), w->values.end(), 1.0);
    std::fill(w->datum.begin(), w->datum.end(), 1.0);
  }
  GlueResult g = glue(f, u, v, 0.1, 3, 0.2);
  CHECK(g.omega_hat == 0.0);
  CHECK(g.energy_glued == 0.0);
  CHECK(g.inequality_ok);
}

TEST_CASE("gluing rejects incompatible geometry") {
  Integrand f = homogeneous();
  RotatedCube a = make_cube(Vec{}, 1.0, vec2(0, 1), 2);
  Grid ga = make_grid(a, 40);
  ScalarField u = init_from_datum(ga, Vec{}, vec2(0, 1), 0.1, 2.0 * ga.h);
  // different spacing
  Grid gb = make_grid(a, 50);
  ScalarField v = init_from_datum(gb, Vec{}, vec2(0, 1), 0.1, 2.0 * gb.h);
  CHECK_THROWS(glue(f, u, v, 0.1, 3, 0.2));
  // different frame
  RotatedCube c = make_cube(Vec{}, 1.0, vec2(0.6, 0.8), 2);
  Grid gc = make_grid(c, 40);
  ScalarField w = init_from_datum(gc, Vec{}, vec2(0.6, 0.8), 0.1, 2.0 * gc.h);
  CHECK_THROWS(glue(f, u, w, 0.1, 3, 0.2));
  // misaligned nodes
  RotatedCube d = a;
  d.x = vec2(0.3 * ga.h, 0);
  Grid gd = make_grid(d, 40);
  ScalarField z = init_from_datum(gd, Vec{}, vec2(0, 1), 0.1, 2.0 * gd.h);
  CHECK_THROWS(glue(f, u, z, 0.1, 3, 0.2));
  CHECK_THROWS(glue(f, u, u, 0.1, 1, 0.2));
}

TEST_CASE("energy over masked cells splits the total") {
  Integrand f = homogeneous();
  RotatedCube cube = make_cube(Vec{}, 1.0, vec2(0, 1), 2);
  Grid grid = make_grid(cube, 16);
  ScalarField u = noisy(grid, vec2(0, 1), 0.125, 0.3, 4);
  std::vector<std::uint8_t> all(grid.cell_count(), 1), none(grid.cell_count(), 0);
  std::vector<std::uint8_t> half(grid.cell_count(), 0);
  for (std::size_t i = 0; i < half.size(); i += 2) half[i] = 1;
  std::vector<std::uint8_t> other(grid.cell_count(), 0);
  for (std::size_t i = 1; i < other.size(); i += 2) other[i] = 1;
  double total = energy(f, u, 0.125).total;
  CHECK(energy_over_cells(f, u, 0.125, all) == doctest::Approx(total).epsilon(1e-14));
  CHECK(energy_over_cells(f, u, 0.125, none) == 0.0);
  CHECK(energy_over_cells(f, u, 0.125, half) + energy_over_cells(f, u, 0.125, other) ==
        doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("field snapshots round-trip through the binary header") {
  namespace fs = std::filesystem;
  RotatedCube cube = make_cube(Vec{}, 1.0, vec2(0.6, 0.8), 2);
  Grid grid = make_grid(cube, 12);
  ScalarField u = init_from_datum(grid, Vec{}, vec2(0.6, 0.8), 0.25, 2.0 * grid.h);
  fs::path dir = fs::temp_directory_path() / "phasecell_field_test";
  fs::create_directories(dir);
  std::string csv = (dir / "f.csv").string();
  std::string bin = (dir / "f.bin").string();
  write_field_csv(u, csv);
  write_field_binary(u, 0.25, bin);
  CHECK(fs::file_size(csv) > 0);

  std::ifstream in(bin, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  CHECK(std::string(magic, 4) == "PCF1");
  std::int32_t n = 0, N = 0;
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&N), 4);
  CHECK(n == 2);
  CHECK(N == 12);
  double rho = 0, nu0 = 0, nu1 = 0, eps = 0;
  in.read(reinterpret_cast<char*>(&rho), 8);
  in.read(reinterpret_cast<char*>(&nu0), 8);
  in.read(reinterpret_cast<char*>(&nu1), 8);
  in.read(reinterpret_cast<char*>(&eps), 8);
  CHECK(rho == 1.0);
  CHECK(nu0 == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(eps == 0.25);
  std::vector<double> vals(u.values.size());
  in.read(reinterpret_cast<char*>(vals.data()),
          static_cast<std::streamsize>(vals.size() * 8));
  CHECK(vals == u.values);
  fs::remove_all(dir);
}

#include <cmath>
#include <random>

#include "doctest.h"
#include "ortholip/energy.hpp"

using namespace ortholip;

namespace {

ScalarField random_field(const Grid& g, unsigned seed, double amp = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amp, amp);
  ScalarField u(g);
  for (double& v : u.values) v = dist(rng);
  return u;
}

ScalarField smooth_field(const Grid& g, double a, double b) {
  return ScalarField::sample(g, [&](const Point& x) {
    return std::sin(a * x[0] + 0.3) * std::cos(b * x[1]) + 0.4 * x[0] * x[1];
  });
}

}  // namespace

TEST_CASE("integrand values") {
  CHECK(g_value(3.0, 2.0, 0.0) == 4.5);
  CHECK(g_value(0.5, 3.0, 1.0) == 0.0);
  CHECK(g_value(2.0, 4.0, 1.0) == 0.25);
  CHECK(g_eps_second(5.0, 2.0, 0.0, 0.1) == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(g_eps_second(0.5, 3.0, 1.0, 0.0) == 0.0);
  CHECK(g_eps_second(3.0, 4.0, 1.0, 0.01) == doctest::Approx(12.01).epsilon(1e-15));
  CHECK(g_eps_value(2.0, 3.0, 0.5, 0.2) == doctest::Approx(std::pow(1.5, 3) / 3 + 0.4));
  CHECK(g_eps_prime(-2.0, 3.0, 0.5, 0.2) == doctest::Approx(-2.25 - 0.4));
}

TEST_CASE("integrand symmetry, monotonicity and ellipticity") {
  for (double p : {2.0, 2.5, 3.0, 4.0})
    for (double delta : {0.0, 0.3})
      for (double eps : {0.0, 0.05}) {
        Integrand ig{p, delta, eps, true};
        double prev_v = -1.0, prev_p = -1.0;
        for (int k = 0; k <= 400; ++k) {
          const double t = k * 0.01;
          CHECK(ig.value(t) == ig.value(-t));
          CHECK(ig.prime(t) == -ig.prime(-t));
          CHECK(ig.second(t) >= eps);
          CHECK(ig.value(t) >= prev_v);
          CHECK(ig.prime(t) >= prev_p);
          prev_v = ig.value(t);
          prev_p = ig.prime(t);
        }
      }
}

TEST_CASE("smoothed p = 2 kink: derivatives are consistent") {
  const double delta = 0.3;
  Integrand ig{2.0, delta, 0.01, true};
  const double eta = ig.ramp_width();
  for (double a : {-0.1 * eta, 0.1 * eta, 0.5 * eta, 0.7 * eta, eta, 2 * eta, 0.5}) {
    const double t = delta + a;
    const double s = 1e-7 * eta;
    CHECK(ig.prime(t) == doctest::Approx((ig.value(t + s) - ig.value(t - s)) / (2 * s)).epsilon(1e-6));
    CHECK(ig.second(t) == doctest::Approx((ig.prime(t + s) - ig.prime(t - s)) / (2 * s)).epsilon(1e-5));
  }
  Integrand raw{2.0, delta, 0.01, false};
  CHECK(raw.second(delta + 1e-9) == doctest::Approx(1.01));
  CHECK(raw.second(delta - 1e-9) == doctest::Approx(0.01));
  CHECK(std::abs(ig.value(1.3) - raw.value(1.3)) <= eta);
}

TEST_CASE("degeneracy vector") {
  DegeneracyVector d({0.2, 0.1, 0.7});
  CHECK(d.aggregate() == 1.7);
  CHECK(d.min() == 0.1);
  CHECK_FALSE(d.all_zero());
  CHECK(DegeneracyVector::zeros(2).aggregate() == 1.0);
  CHECK_THROWS_AS(DegeneracyVector({-0.1, 0.0}), std::invalid_argument);
}

TEST_CASE("energy closed forms") {
  Grid g = Grid::cube(2, 9, 0.0, 1.0);
  auto lin = ScalarField::sample(g, [](const Point& x) { return x[0]; });
  auto spec = make_spec(lin, 2.0, {0.0, 0.0}, 0.0);
  CHECK(energy_total(lin, spec) == doctest::Approx(0.5).epsilon(1e-14));
  const Ball B{{0.5, 0.5, 0.0}, 0.3};
  CHECK(energy_total(lin, spec, B) == doctest::Approx(0.5 * region_measure(g, B)).epsilon(1e-14));
  CHECK(energy_total(lin, spec, Ball{{0.5, 0.5, 0.0}, 0.5}) <= energy_total(lin, spec));

  auto slow = ScalarField::sample(g, [](const Point& x) { return 0.1 * x[0] - 0.05 * std::sin(3 * x[1]); });
  auto dspec = make_spec(slow, 3.0, {0.2, 0.2}, 0.0);
  CHECK(energy_total(slow, dspec) == 0.0);
  CHECK_THROWS_AS(energy_total(lin, spec, Ball{{0.9, 0.5, 0.0}, 0.3}), GeometryError);
}

TEST_CASE("energy matches an independent cell-by-cell summation") {
  Grid g = Grid::cube(2, 4, 0.0, 1.5);
  auto u = random_field(g, 17);
  ScalarField f = random_field(g, 18);
  auto spec = make_spec(u, 3.0, {0.2, 0.1}, 0.05);
  spec.lower = LinearTerm{f, std::nullopt};
  const double h = 0.5;
  double oracle = 0.0;
  auto val = [&](int i, int j) { return u.values[static_cast<std::size_t>(i + 4 * j)]; };
  auto fv = [&](int i, int j) { return f.values[static_cast<std::size_t>(i + 4 * j)]; };
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double dx0 = (val(i + 1, j) - val(i, j)) / h, dx1 = (val(i + 1, j + 1) - val(i, j + 1)) / h;
      const double dy0 = (val(i, j + 1) - val(i, j)) / h, dy1 = (val(i + 1, j + 1) - val(i + 1, j)) / h;
      double cell = 0.5 * (g_value(dx0, 3, 0.2) + g_value(dx1, 3, 0.2)) +
                    0.5 * (g_value(dy0, 3, 0.1) + g_value(dy1, 3, 0.1));
      cell += 0.025 * 0.5 * (dx0 * dx0 + dx1 * dx1 + dy0 * dy0 + dy1 * dy1);
      cell += 0.25 * (fv(i, j) * val(i, j) + fv(i + 1, j) * val(i + 1, j) + fv(i, j + 1) * val(i, j + 1) +
                      fv(i + 1, j + 1) * val(i + 1, j + 1));
      oracle += h * h * cell;
    }
  CHECK(energy_total(u, spec) == doctest::Approx(oracle).epsilon(1e-13));
  CHECK(energy_total(u, spec, Ball{{0.75, 0.75, 0.0}, 0.75}) == doctest::Approx(oracle).epsilon(1e-13));
}

TEST_CASE("energy depends on gradients only and is convex") {
  Grid g = Grid::cube(3, 6, 0.0, 1.0);
  auto u = random_field(g, 1);
  auto v = random_field(g, 2);
  auto spec = make_spec(u, 3.0, {0.1, 0.0, 0.2}, 0.01);
  ScalarField shifted = u;
  for (double& x : shifted.values) x += 0.75;
  CHECK(energy_total(shifted, spec) == doctest::Approx(energy_total(u, spec)).epsilon(1e-12));
  ScalarField mid(g);
  for (std::size_t n = 0; n < g.node_count(); ++n) mid[n] = 0.5 * (u[n] + v[n]);
  const double lhs = energy_total(mid, spec);
  const double rhs = 0.5 * energy_total(u, spec) + 0.5 * energy_total(v, spec);
  CHECK(lhs <= rhs * (1 + 1e-12));
}

TEST_CASE("first variation: affine fields and the 5-point stencil") {
  Grid g = Grid::cube(2, 9, 0.0, 1.0);
  auto aff = ScalarField::sample(g, [](const Point& x) { return 0.75 * x[0] - 0.5 * x[1]; });
  for (double p : {2.0, 3.0, 4.0}) CHECK(el_residual_norm(aff, make_spec(aff, p, {0.0, 0.0}, 0.1)) <= 1e-12);

  auto u = random_field(g, 5);
  auto f = random_field(g, 6);
  auto spec = make_spec(u, 2.0, {0.0, 0.0}, 0.0);
  spec.lower = LinearTerm{f, std::nullopt};
  auto F = first_variation(u, spec);
  const double h = g.spacing(0);
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    if (g.on_boundary(n)) {
      CHECK(F[n] == 0.0);
      continue;
    }
    const double lap = (u[n + 1] + u[n - 1] + u[n + 9] + u[n - 9] - 4 * u[n]) / (h * h);
    CHECK(F[n] / (h * h) == doctest::Approx(-lap + f[n]).epsilon(1e-11));
  }
}

TEST_CASE("first variation is the gradient of the energy") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd(0.0, 1.0);
  Grid g = Grid::cube(2, 8, 0.0, 1.0);
  auto u = smooth_field(g, 2.0, 3.0);
  auto c = ScalarField::sample(g, [](const Point& x) { return x[0] - 0.5; });
  for (double p : {2.0, 3.0, 4.0}) {
    auto spec = make_spec(u, p, {0.1, 0.05}, 0.02);
    spec.lower = make_power_term(c, 1.0, p);
    auto F = first_variation(u, spec);
    const auto mask = spec.free_mask();
    for (int k = 0; k < 5; ++k) {
      ScalarField dir(g);
      for (std::size_t n = 0; n < g.node_count(); ++n) dir[n] = mask[n] ? nd(rng) : 0.0;
      const double s = 1e-5;
      ScalarField up = u, dn = u;
      double analytic = 0.0;
      for (std::size_t n = 0; n < g.node_count(); ++n) {
        up[n] += s * dir[n];
        dn[n] -= s * dir[n];
        analytic += F[n] * dir[n];
      }
      const double fd = (energy_total(up, spec) - energy_total(dn, spec)) / (2 * s);
      CHECK(fd == doctest::Approx(analytic).epsilon(1e-6));
    }
  }
}

TEST_CASE("lambda homogeneity of the first variation") {
  Grid g = Grid::cube(2, 7, 0.0, 1.0);
  auto u = smooth_field(g, 1.0, 2.0);
  auto f = random_field(g, 9);
  const double p = 3.0, lam = 3.0;
  auto spec = make_spec(u, p, {0.0, 0.0}, 0.0);
  spec.lower = LinearTerm{f, std::nullopt};
  auto spec_l = make_spec(u.scaled(lam), p, {0.0, 0.0}, 0.0);
  spec_l.lower = LinearTerm{f.scaled(std::pow(lam, p - 1)), std::nullopt};
  auto F = first_variation(u, spec);
  auto Fl = first_variation(u.scaled(lam), spec_l);
  for (std::size_t n = 0; n < g.node_count(); ++n)
    CHECK(Fl[n] == doctest::Approx(std::pow(lam, p - 1) * F[n]).epsilon(1e-13));
}

TEST_CASE("differentiated residual") {
  Grid g = Grid::cube(2, 11, 0.0, 1.0);
  auto aff = ScalarField::sample(g, [](const Point& x) { return 2 * x[0] + x[1]; });
  for (int j = 0; j < 2; ++j) {
    auto R = differentiated_system_residual(aff, make_spec(aff, 3.0, {0.0, 0.0}, 0.1), j);
    for (double v : R.values) CHECK(std::abs(v) <= 1e-12);
  }
  // p = 2: the differentiated residual is the central difference of F
  auto u = smooth_field(g, 2.0, 1.0);
  auto f = ScalarField::sample(g, [](const Point& x) { return 1 + x[0] * x[0] - 3 * x[0] * x[1]; });
  auto spec = make_spec(u, 2.0, {0.0, 0.0}, 0.05);
  spec.lower = LinearTerm{f, std::nullopt};
  auto F = first_variation(u, spec);
  const double h = g.spacing(0);
  for (int j = 0; j < 2; ++j) {
    auto R = differentiated_system_residual(u, spec, j);
    const std::size_t s = g.stride(j);
    for (std::size_t n = 0; n < g.node_count(); ++n) {
      if (!g.is_inner(n, 2)) {
        CHECK(R[n] == 0.0);
        continue;
      }
      CHECK(R[n] == doctest::Approx((F[n + s] - F[n - s]) / (2 * h)).epsilon(1e-9));
    }
  }
}

TEST_CASE("lower-order term validation") {
  Grid g = Grid::cube(2, 5, 0.0, 1.0);
  ScalarField c(g, 0.3);
  auto term = make_power_term(c, 2.0, 3.0);
  CHECK_NOTHROW(validate_lower_order(term, g));
  NonlinearTerm bad = term;
  bad.G = [](std::size_t, double xi) { return -xi * xi; };
  CHECK_THROWS_AS(validate_lower_order(bad, g), std::invalid_argument);
  NonlinearTerm fast = term;
  fast.gamma = 1.5;
  CHECK_THROWS_AS(validate_lower_order(fast, g), std::invalid_argument);
  CHECK(lower_second(term, 0, 2.0) == doctest::Approx(8.0));
  NonlinearTerm fd = term;
  fd.G_xixi = nullptr;
  CHECK(lower_second(fd, 0, 2.0) == doctest::Approx(8.0).epsilon(1e-8));
}

TEST_CASE("spec validation") {
  Grid g = Grid::cube(2, 9, -1.0, 1.0);
  auto spec = make_spec(ScalarField(g), 2.0, {0.0, 0.0}, 0.1);
  CHECK_NOTHROW(spec.validate(true));
  spec.eps = 0.0;
  CHECK_NOTHROW(spec.validate(false));
  CHECK_THROWS_AS(spec.validate(true), std::invalid_argument);
  spec.eps = 0.7;
  CHECK_THROWS_AS(spec.validate(false), std::invalid_argument);
  spec.eps = 0.1;
  spec.p = 1.5;
  CHECK_THROWS_AS(spec.validate(true), std::invalid_argument);
  spec.p = 2.0;
  spec.domain = Ball{{0.0, 0.0, 0.0}, 0.5};
  CHECK_NOTHROW(spec.validate(true));
  spec.domain = Ball{{0.0, 0.0, 0.0}, 0.6};
  CHECK_THROWS_AS(spec.validate(true), GeometryError);
}

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "ortholip/field_io.hpp"
#include "ortholip/grid.hpp"

using namespace ortholip;

namespace {

ScalarField random_field(const Grid& g, unsigned seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  ScalarField u(g);
  for (double& v : u.values) v = dist(rng);
  return u;
}

}  // namespace

TEST_CASE("grid indexing and weights") {
  Grid g({4, 5}, {0.5, 0.25}, {-1.0, 2.0});
  CHECK(g.node_count() == 20);
  for (std::size_t n = 0; n < g.node_count(); ++n) CHECK(g.index(g.multi_index(n)) == n);
  CHECK(g.upper(0) == doctest::Approx(0.5));
  CHECK(g.upper(1) == doctest::Approx(3.0));
  double total = 0.0;
  for (std::size_t n = 0; n < g.node_count(); ++n) total += g.node_weight(n);
  CHECK(total == doctest::Approx(1.5 * 1.0));
  CHECK_THROWS_AS(Grid({1, 5}, {1.0, 1.0}, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Grid({3, 3}, {0.0, 1.0}, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Grid({3, 3, 3, 3}, {1, 1, 1, 1}, {0, 0, 0, 0}), std::invalid_argument);
}

TEST_CASE("gradient is exact on affine fields") {
  Grid g = Grid::cube(2, 9, 0.0, 1.0);
  auto u = ScalarField::sample(g, [](const Point& x) { return 3.0 * x[0]; });
  auto du = gradient(u);
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    if (g.has_edge(0, n)) CHECK(du.at(0, n) == doctest::Approx(3.0).epsilon(1e-14));
    if (g.has_edge(1, n)) CHECK(du.at(1, n) == 0.0);
  }
  auto c = gradient(ScalarField(g, 7.5));
  for (int a = 0; a < 2; ++a)
    for (double v : c.components[a]) CHECK(v == 0.0);
}

TEST_CASE("gradient stencil on x1*x2 by hand") {
  Grid g = Grid::cube(2, 3, 0.0, 1.0);
  auto u = ScalarField::sample(g, [](const Point& x) { return x[0] * x[1]; });
  auto du = gradient(u);
  // nodes at 0, 0.5, 1: (u(0.5,0.5) - u(0,0.5)) / 0.5 = 0.5
  CHECK(du.at(0, g.index({0, 1, 0})) == 0.5);
  // (u(1,1) - u(0.5,1)) / 0.5 = 1
  CHECK(du.at(0, g.index({1, 2, 0})) == 1.0);
  CHECK(du.at(1, g.index({2, 0, 0})) == 1.0);
  CHECK(du.at(1, g.index({0, 1, 0})) == 0.0);
}

TEST_CASE("lp and linf norms") {
  Grid g = Grid::cube(2, 11, 0.0, 1.0);
  CHECK(lp_norm(ScalarField(g, 2.0), 2.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(lp_norm(ScalarField(g, 0.0), 3.0) == 0.0);
  CHECK(linf_norm(ScalarField(g, 5.0)) == 5.0);
  CHECK(linf_norm(gradient(ScalarField(g, 0.0))) == 0.0);

  auto u = random_field(g, 11);
  double m = 0.0;
  for (double v : u.values) m = std::max(m, std::abs(v));
  CHECK(linf_norm(u) == m);

  Ball inner{{0.5, 0.5, 0.0}, 0.2};
  Ball outer{{0.5, 0.5, 0.0}, 0.45};
  auto du = gradient(u);
  CHECK(lp_norm(du, 3.0, inner) <= lp_norm(du, 3.0, outer));
  CHECK(lp_norm(du.scaled(-2.5), 3.0, outer) == doctest::Approx(2.5 * lp_norm(du, 3.0, outer)).epsilon(1e-14));
  CHECK_THROWS_AS(lp_norm(du, 2.0, Ball{{0.9, 0.5, 0.0}, 0.3}), GeometryError);
  CHECK_THROWS_AS(linf_norm(u, Ball{{0.55, 0.55, 0.0}, 0.01}), GeometryError);
}

TEST_CASE("ball lp norm against a midpoint quadrature at double resolution") {
  const Ball B{{0.5, 0.5, 0.0}, 0.4};
  Grid g = Grid::cube(2, 41, 0.0, 1.0);
  auto u = ScalarField::sample(g, [](const Point& x) { return x[0]; });
  const double value = lp_norm(gradient(u), 4.0, B);

  // |grad u| = 1, so the integral is the area of the clipped ball
  const int fine = 80;
  const double hf = 1.0 / fine;
  double area = 0.0;
  for (int i = 0; i < fine; ++i)
    for (int j = 0; j < fine; ++j) {
      const double x = (i + 0.5) * hf - 0.5;
      const double y = (j + 0.5) * hf - 0.5;
      if (x * x + y * y < 0.16) area += hf * hf;
    }
  CHECK(std::abs(value - std::pow(area, 0.25)) <= 0.02 * std::pow(area, 0.25));
}

TEST_CASE("cut-off function") {
  const Ball inner{{0.0, 0.0, 0.0}, 0.25};
  const Ball outer{{0.0, 0.0, 0.0}, 0.75};
  double prev_excess = 1e9;
  for (std::size_t n : {17, 33, 65, 129}) {
    Grid g = Grid::cube(2, n, -1.0, 1.0);
    auto eta = cutoff_eta(g, inner, outer);
    for (std::size_t k = 0; k < g.node_count(); ++k) {
      const Point x = g.position(k);
      const double r = std::hypot(x[0], x[1]);
      CHECK(eta[k] >= 0.0);
      CHECK(eta[k] <= 1.0);
      if (r <= 0.25) CHECK(eta[k] == 1.0);
      if (r >= 0.75) CHECK(eta[k] == 0.0);
    }
    const double bound = kCutoffGradientBound / 0.5;
    const double measured = linf_norm(gradient(eta));
    const double excess = measured / bound - 1.0;
    CHECK(excess <= 4.0 * g.spacing(0));
    prev_excess = std::min(prev_excess, excess);
  }
  CHECK_THROWS_AS(cutoff_eta(Grid::cube(2, 9, -1, 1), outer, outer), GeometryError);
  CHECK_THROWS_AS(cutoff_eta(Grid::cube(2, 9, -1, 1), Ball{{0.1, 0, 0}, 0.2}, outer), GeometryError);
}

TEST_CASE("mollifier") {
  Grid g = Grid::cube(2, 33, 0.0, 1.0);
  const Ball core{{0.5, 0.5, 0.0}, 0.3};
  auto c = mollify(ScalarField(g, 3.25), 0.1, core);
  for (double v : c.values) CHECK(v == 3.25);

  auto u = random_field(g, 3);
  auto same = mollify(u, 0.5 * g.spacing(0));
  CHECK(same.values == u.values);

  auto lin = ScalarField::sample(g, [](const Point& x) { return 2.0 * x[0] - x[1]; });
  auto ml = mollify(lin, 0.12, core);
  for (std::size_t n = 0; n < g.node_count(); ++n) CHECK(ml[n] == doctest::Approx(lin[n]).epsilon(1e-12));

  auto mu = mollify(u, 0.1, core);
  double lo = 1e9, hi = -1e9;
  for (double v : u.values) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double v : mu.values) {
    CHECK(v >= lo);
    CHECK(v <= hi);
  }
  auto pos = mollify(random_field(g, 4, 0.0, 1.0), 0.1, core);
  for (double v : pos.values) CHECK(v >= 0.0);

  auto v = random_field(g, 5);
  ScalarField sum(g);
  for (std::size_t n = 0; n < g.node_count(); ++n) sum[n] = 2.0 * u[n] + v[n];
  auto ms = mollify(sum, 0.1, core);
  auto mv = mollify(v, 0.1, core);
  for (std::size_t n = 0; n < g.node_count(); ++n)
    CHECK(ms[n] == doctest::Approx(2.0 * mu[n] + mv[n]).epsilon(1e-12));

  CHECK_THROWS_AS(mollify(u, 0.1), GeometryError);
}

TEST_CASE("nodal derivatives") {
  Grid g = Grid::cube(3, 9, 0.0, 1.0);
  auto aff = ScalarField::sample(g, [](const Point& x) { return 0.5 * x[0] - 0.25 * x[1] + 2.0 * x[2] + 1.0; });
  auto d = nodal_derivatives(aff);
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    if (!d.valid[n]) continue;
    CHECK(d[n].d[0] == 0.5);
    CHECK(d[n].d[1] == -0.25);
    CHECK(d[n].d[2] == 2.0);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(d[n].dd[i][j] == 0.0);
  }
  auto quad = ScalarField::sample(g, [](const Point& x) { return x[0] * x[0] + x[0] * x[1]; });
  auto q = nodal_derivatives(quad);
  const std::size_t mid = g.index({4, 4, 4});
  CHECK(q.valid[mid]);
  CHECK(q[mid].dd[0][0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(q[mid].dd[0][1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(q[mid].dd[1][0] == q[mid].dd[0][1]);
  CHECK(q[mid].dd[2][2] == doctest::Approx(0.0));
  CHECK(q[mid].d[0] == doctest::Approx(2.0 * 0.5 + 0.5).epsilon(1e-12));
  CHECK_FALSE(q.valid[g.index({0, 4, 4})]);
}

TEST_CASE("field files round-trip bit for bit") {
  Grid g({5, 4, 3}, {0.1, 0.3, 1.0 / 3.0}, {-0.7, 0.0, 1e-9});
  std::mt19937_64 rng(99);
  ScalarField u(g);
  for (double& v : u.values) {
    std::uint64_t bits = rng();
    double x;
    std::memcpy(&x, &bits, sizeof x);
    v = std::isfinite(x) ? x : 1.0 / 3.0;
  }
  auto base = std::filesystem::temp_directory_path() / "ortholip_field_roundtrip";
  write_field(u, base);
  auto back = read_field(base);
  CHECK(back.grid == g);
  for (std::size_t n = 0; n < g.node_count(); ++n)
    CHECK(std::memcmp(&back.values[n], &u.values[n], sizeof(double)) == 0);
  CHECK(parse_double(format_double(0.1)) == 0.1);
}

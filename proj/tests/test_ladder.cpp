#include <cmath>

#include "doctest.h"
#include "ortholip/ladder.hpp"

using namespace ortholip;

TEST_CASE("rational parsing") {
  CHECK(parse_rational("2") == Rational(2));
  CHECK(parse_rational("2.5") == Rational(5, 2));
  CHECK(parse_rational("-0.125") == Rational(-1, 8));
  CHECK(parse_rational("7/3") == Rational(7, 3));
  CHECK(parse_rational(" 3. ") == Rational(3));
  CHECK(rational_to_string(Rational(14, 6)) == "7/3");
  CHECK_THROWS_AS(parse_rational("abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("1e3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("."), std::invalid_argument);
}

TEST_CASE("homogeneous ladder, p = 2, N = 3") {
  const auto t = ladder(Regime::homogeneous, Rational(2), 3, Rational(2), 10);
  CHECK(t.two_star == Rational(6));
  CHECK(t.row(0).gamma == Rational(4));
  CHECK(t.row(1).gamma == Rational(8));
  CHECK(t.row(2).gamma == Rational(16));
  CHECK(t.row(3).gamma == Rational(32));
  CHECK(t.row(3).gamma_hat == Rational(96));
  CHECK(t.tau_bar == Rational(2, 5));
  CHECK(t.beta == Rational(3, 2));
  CHECK_FALSE(t.row(0).tau.has_value());
  for (int j = 1; j <= 10; ++j) CHECK(*t.row(j).tau == t.tau_bar);
  CHECK(tau_monotonicity_check(t));
  CHECK_FALSE(t.j1.has_value());
}

TEST_CASE("homogeneous ladder identities for several p") {
  for (const char* ps : {"2", "5/2", "3", "4", "7.25"}) {
    CAPTURE(ps);
    const Rational p = parse_rational(ps);
    for (int N : {2, 3, 4, 5}) {
      const auto t = ladder(Regime::homogeneous, p, N, Rational(N + 1), 10);
      CHECK(t.row(0).gamma == p + 2);
      for (int j = 0; j < 10; ++j) CHECK(t.row(j + 1).gamma == 2 * t.row(j).gamma - p + 2);
      for (int j = 1; j <= 10; ++j) {
        const Rational tau = *t.row(j).tau;
        CHECK(tau > 0);
        CHECK(tau < 1);
        CHECK(tau >= t.tau_bar);
        if (j > 1) CHECK(tau <= *t.row(j - 1).tau);
        // double-precision evaluation of the definition
        const double a = to_double(t.two_star) / 2.0;
        const double pd = to_double(p);
        const double gj = pd + std::ldexp(1.0, j + 2) - 2.0, gm = pd + std::ldexp(1.0, j + 1) - 2.0;
        CHECK(to_double(tau) == doctest::Approx((a - 1.0) / (a * gj / gm - 1.0)).epsilon(1e-14));
      }
      CHECK(tau_monotonicity_check(t));
    }
  }
}

TEST_CASE("non-homogeneous ladder, N = 3, h = 2") {
  const auto t = ladder(Regime::nonhomogeneous, Rational(2), 3, Rational(2), 10);
  CHECK(t.h_prime == Rational(2));
  CHECK(t.tau_bar == Rational(1, 10));
  CHECK(t.tau_bar == zeta(t.two_star / (2 * t.h_prime), Rational(4)));
  CHECK(t.beta == Rational(18));
  // q = 2^j - 1 >= max{-1, 2}  =>  j0 = 2
  CHECK(t.j0 == 2);
  CHECK(t.row(2).gamma == Rational(26));
  CHECK(t.row(2).gamma_hat == Rational(42));
  CHECK(*t.j1 == 2);
  CHECK(*t.q1 == Rational(7));
  CHECK(t.row(t.j0).gamma <= t.two_star * *t.q1);
  CHECK_FALSE(t.row(1).in_range);
  CHECK(t.row(2).in_range);
  CHECK_FALSE(t.row(2).tau.has_value());
  CHECK(t.row(3).tau.has_value());
  CHECK(tau_monotonicity_check(t));
}

TEST_CASE("non-homogeneous ladder identities") {
  for (const char* ps : {"2", "3", "9/2", "6"})
    for (int N : {2, 3, 4})
      for (const char* hs : {"2.5", "3", "5", "12"}) {
        CAPTURE(ps);
        CAPTURE(N);
        CAPTURE(hs);
        const Rational p = parse_rational(ps), h = parse_rational(hs);
        if (h <= Rational(N, 2) || (N == 2 && h <= 2)) continue;
        const auto t = ladder(Regime::nonhomogeneous, p, N, h, 12);
        const Rational bound = t.two_star / (2 * t.h_prime);
        CHECK(bound > 1);
        // independent j0: smallest j >= 1 with 2^j - 1 >= both limits, in doubles
        const double hp = to_double(t.h_prime), pd = to_double(p), ts = to_double(t.two_star);
        const double qmin = std::max((pd - 2 * hp) / (2 * (hp - 1)), ts * pd / (2 * hp) - 1);
        int j0 = 1;
        while (std::ldexp(1.0, j0) - 1 < qmin - 1e-12) ++j0;
        CHECK(t.j0 == j0);
        for (const auto& r : t.rows) {
          if (r.j < t.j0) continue;
          CHECK(r.gamma > 0);
          CHECK(r.gamma_hat / r.gamma >= bound);
          if (r.j >= t.j0 + 1) {
            CHECK(*r.ratio >= 2);
            CHECK(*r.ratio <= 4);
            CHECK(*r.tau > 0);
            CHECK(*r.tau < 1);
            CHECK(*r.tau >= t.tau_bar);
          }
        }
        CHECK(t.row(t.j0).gamma <= t.two_star * *t.q1);
        CHECK(tau_monotonicity_check(t));
      }
}

TEST_CASE("ladder preconditions and negative control") {
  CHECK_THROWS_AS(ladder(Regime::nonhomogeneous, Rational(2), 3, Rational(3, 2), 10), std::invalid_argument);
  CHECK_THROWS_AS(ladder(Regime::homogeneous, Rational(2), 3, Rational(1), 10), std::invalid_argument);
  CHECK_THROWS_AS(ladder(Regime::nonhomogeneous, Rational(2), 2, Rational(2), 10), std::invalid_argument);
  CHECK_NOTHROW(ladder(Regime::nonhomogeneous, Rational(2), 2, Rational(3), 10));
  CHECK_THROWS_AS(ladder(Regime::homogeneous, Rational(3, 2), 3, Rational(2), 10), std::invalid_argument);
  CHECK_THROWS_AS(ladder(Regime::homogeneous, Rational(2), 1, Rational(2), 10), std::invalid_argument);

  auto t = ladder(Regime::nonhomogeneous, Rational(2), 3, Rational(2), 8);
  const int j = t.j0 + 2;
  t.rows[j].gamma = 5 * t.rows[j - 1].gamma;
  CHECK_FALSE(tau_check(t).gamma_ratio_in_2_4);
  CHECK_FALSE(tau_monotonicity_check(t));

  auto hom = ladder(Regime::homogeneous, Rational(3), 3, Rational(2), 6);
  hom.rows[4].gamma = hom.rows[3].gamma * Rational(101, 100);
  CHECK_FALSE(tau_monotonicity_check(hom));
}

TEST_CASE("ladder serialization") {
  const auto t = ladder(Regime::nonhomogeneous, Rational(5, 2), 3, Rational(3), 6);
  const auto j = t.to_json();
  CHECK(j["regime"] == "nonhomogeneous");
  CHECK(j["p"]["exact"] == "5/2");
  CHECK(j["rows"].size() == 7);
  CHECK(j["rows"][0]["tau"].is_null());
  CHECK(t.to_text().find("tau_bar") != std::string::npos);
  CHECK(ladder(Regime::homogeneous, Rational(2), 2, Rational(3), 3).to_json()["two_star_surrogate"] == true);
}

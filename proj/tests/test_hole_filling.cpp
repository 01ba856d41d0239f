#include <cmath>
#include <random>

#include "doctest.h"
#include "ortholip/hole_filling.hpp"
#include "support/fixtures.hpp"

using namespace ortholip;

TEST_CASE("coefficient values") {
  HoleFillingInstance a;
  a.theta = 0.0;
  a.lambda = 0.5;
  a.alpha = 1.0;
  CHECK(hole_filling_coefficient(a) == 2.0);

  HoleFillingInstance b;
  b.theta = 0.5;
  b.alpha = 2.0;
  b.beta = 1.0;
  b.lambda = 0.9;
  CHECK(hole_filling_coefficient(b) == doctest::Approx((1.0 / 0.01) * (0.81 / 0.31)).epsilon(1e-12));
  CHECK(hole_filling_coefficient(b) == doctest::Approx(261.29).epsilon(1e-4));
}

TEST_CASE("parameter ranges") {
  HoleFillingInstance in;
  in.theta = 0.25;
  in.alpha = 2.0;
  in.lambda = 0.5;  // theta^{1/alpha} = 0.5
  CHECK_THROWS_AS(hole_filling_coefficient(in), std::invalid_argument);
  in.lambda = 1.0;
  CHECK_THROWS_AS(hole_filling_coefficient(in), std::invalid_argument);
  in.lambda = 0.6;
  CHECK_NOTHROW(hole_filling_coefficient(in));
  in.beta = 3.0;
  CHECK_THROWS_AS(in.validate(), std::invalid_argument);
  in.beta = 1.0;
  in.theta = 1.0;
  CHECK_THROWS_AS(in.validate(), std::invalid_argument);
  in.theta = 0.25;
  in.r = 2.0;
  CHECK_THROWS_AS(in.validate(), std::invalid_argument);
}

TEST_CASE("absorption constant") {
  CHECK(fixtures::absorption_constant(2.0, 0.0) == 1.0);
  // theta = 1/4, a = 1: 4(1-x)/(x(3-4x)) is smallest at x = 1/2, value 4
  CHECK(fixtures::absorption_constant(1.0, 0.25) == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("constructed instances satisfy hypothesis and conclusion") {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 200; ++k) {
    const auto w = fixtures::hole_filling_witness(rng);
    const auto res = hole_filling_check(w.Z, w.inst);
    CAPTURE(w.inst.to_json().dump());
    CHECK(res.hypothesis);
    CHECK(res.conclusion);
    CHECK(res.conclusion_ratio <= 1.0 + 1e-12);
  }
}

TEST_CASE("violations are detected") {
  HoleFillingInstance in;
  in.A = 1.0;
  in.alpha = 1.0;
  in.beta = 1.0;
  in.theta = 0.0;
  in.lambda = 0.5;
  in.r = 0.0;
  in.R = 1.0;
  // Z = 10 breaks the hypothesis for s - t = 1 and the conclusion at r
  auto res = hole_filling_check([](double) { return 10.0; }, in);
  CHECK_FALSE(res.hypothesis);
  CHECK_FALSE(res.conclusion);
  // Z = 0 satisfies everything
  res = hole_filling_check([](double) { return 0.0; }, in);
  CHECK(res.hypothesis);
  CHECK(res.conclusion);
  CHECK_THROWS_AS(hole_filling_check([](double) { return -1.0; }, in), std::invalid_argument);
}

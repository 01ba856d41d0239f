#pragma once

// Shared fixtures for the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <boost/math/tools/minima.hpp>

#include "ortholip/energy.hpp"
#include "ortholip/hole_filling.hpp"
#include "ortholip/solver.hpp"

namespace ortholip::fixtures {

inline double max_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a[n] - b[n]));
  return m;
}

/// Random cubic-ish boundary data on a 2D grid.
inline ScalarField poly_boundary(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const double a = d(rng), b = d(rng), c = d(rng), e = d(rng), f = d(rng);
  return ScalarField::sample(g, [=](const Point& x) {
    return a * x[0] + b * x[1] + c * x[0] * x[1] + e * x[0] * x[0] - f * x[1] * x[1] * x[0];
  });
}

/// Smooth data whose gradient stays away from the coordinate hyperplanes.
inline ScalarField smooth_boundary(const Grid& g) {
  return ScalarField::sample(g, [](const Point& x) {
    return x[0] + 0.5 * x[1] + 0.3 * std::sin(1.3 * x[0] + 0.4) * std::cos(0.9 * x[1]) + 0.2 * x[2];
  });
}

/// Harmonic data with a non-trivial Hessian.
inline ScalarField harmonic_boundary(const Grid& g) {
  return ScalarField::sample(g, [](const Point& x) {
    return std::exp(0.8 * x[0]) * std::sin(0.8 * x[1] + 0.3) + 0.4 * x[0];
  });
}

inline ScalarField affine_boundary(const Grid& g) {
  return ScalarField::sample(g, [](const Point& x) { return 0.75 * x[0] - 0.375 * x[1] + 0.25; });
}

enum class Kind { harmonic_p2, smooth_p3, smooth_p4, nonhom_p3 };
inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::harmonic_p2: return "harmonic_p2";
    case Kind::smooth_p3: return "smooth_p3";
    case Kind::smooth_p4: return "smooth_p4";
    case Kind::nonhom_p3: return "nonhom_p3";
  }
  return "";
}

/// Problem on [-1,1]^2 with n nodes per axis.
inline ProblemSpec smooth_spec(Kind kind, std::size_t n, double eps = 1e-2) {
  const Grid g = Grid::cube(2, n, -1.0, 1.0);
  switch (kind) {
    case Kind::harmonic_p2: return make_spec(harmonic_boundary(g), 2.0, {0.0, 0.0}, eps);
    case Kind::smooth_p3: return make_spec(smooth_boundary(g), 3.0, {0.0, 0.0}, eps);
    case Kind::smooth_p4: return make_spec(smooth_boundary(g), 4.0, {0.0, 0.0}, eps);
    case Kind::nonhom_p3: {
      auto spec = make_spec(smooth_boundary(g), 3.0, {0.2, 0.1}, eps);
      spec.lower = LinearTerm{ScalarField::sample(g, [](const Point& x) { return 0.5 * std::cos(x[0]) + 0.3 * x[1]; }),
                              std::nullopt};
      return spec;
    }
  }
  return {};
}

struct Solved {
  ProblemSpec spec;
  SolveResult result;
};

inline Solved solve_fixture(Kind kind, std::size_t n, double eps = 1e-2, double tol = 1e-10) {
  Solved s{smooth_spec(kind, n, eps), {}};
  s.result = solve_regularized(s.spec, tol, 200);
  if (!s.result.converged) throw std::runtime_error(std::string("fixture did not converge: ") + kind_name(kind));
  return s;
}

/// inf over x in (0, 1 - theta^{1/a}) of
/// x^{-a} / (1 - theta (1 - x)^{-a}). Equals 1 when theta = 0.
inline double absorption_constant(double a, double theta) {
  if (theta == 0.0) return 1.0;
  const double xmax = 1.0 - std::pow(theta, 1.0 / a);
  auto phi = [&](double x) { return std::pow(x, -a) / (1.0 - theta * std::pow(1.0 - x, -a)); };
  const int samples = 2000;
  int best = 1;
  double best_v = phi(xmax * best / samples);
  for (int k = 2; k < samples; ++k) {
    const double v = phi(xmax * k / samples);
    if (v < best_v) {
      best_v = v;
      best = k;
    }
  }
  const auto r = boost::math::tools::brent_find_minima(phi, xmax * (best - 1) / samples,
                                                       xmax * (best + 1) / samples, 52);
  return std::min(best_v, r.second);
}

struct HoleFillingWitness {
  HoleFillingInstance inst;
  std::function<double(double)> Z;
};

/// Z(t) = rA cA A/(R'-t)^alpha + rB cB B/(R'-t)^beta + rC C/(1-theta) with
/// R' > R. Each summand satisfies the hypothesis term by term.
inline HoleFillingWitness hole_filling_witness(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  HoleFillingInstance in;
  in.A = 5.0 * u01(rng);
  in.B = 5.0 * u01(rng);
  in.C = 5.0 * u01(rng);
  in.alpha = 0.5 + 3.5 * u01(rng);
  in.beta = in.alpha * (0.05 + 0.95 * u01(rng));
  in.theta = 0.95 * u01(rng);
  const double lo = std::pow(in.theta, 1.0 / in.alpha);
  in.lambda = lo + (1.0 - lo) * (0.02 + 0.96 * u01(rng));
  in.r = 0.5 * u01(rng);
  in.R = in.r + 0.1 + u01(rng);
  const double Rp = in.R * (1.0 + 0.01 + u01(rng));
  const double shrink = 1.0 - 1e-10;
  const double cA = in.A * u01(rng) * absorption_constant(in.alpha, in.theta) * shrink;
  const double cB = in.B * u01(rng) * absorption_constant(in.beta, in.theta) * shrink;
  const double cC = in.C * u01(rng) / (1.0 - in.theta);
  const double a = in.alpha, b = in.beta;
  return {in, [=](double t) { return cA / std::pow(Rp - t, a) + cB / std::pow(Rp - t, b) + cC; }};
}

}  // namespace ortholip::fixtures

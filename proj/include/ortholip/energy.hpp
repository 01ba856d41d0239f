#pragma once

// Orthotropic integrands, the discrete regularized functional, the lower-order
// term and the Euler-Lagrange residual.
//
// Discrete energy (edge form):
//   E(u) = sum_i sum_{edges e along i} w_e g_{i,eps}(D_i u(e)) + sum_n w_n L(n, u_n)
// with trapezoidal weights from Grid. Restricted to a ball the same quantity is
// assembled cell by cell (cell volume times the mean of the cell's edge values
// per axis, plus the mean of the corner values of L) and cells are kept when
// their center lies in the ball. On the whole grid both forms coincide.

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "json.hpp"
#include "ortholip/grid.hpp"

namespace ortholip {

/// (1/p) (|t| - delta)_+^p
double g_value(double t, double p, double delta);

/// One axis of the regularized integrand g_i(t) + (eps/2) t^2.
///
/// For p = 2 and delta > 0 the kink of g'' at |t| = delta is replaced by a C^1
/// ramp of width eta_s = 1e-3 * max(1, delta) when `smooth` is set: with
/// a = |t| - delta, g'' = r(a) where r rises from 0 to 1 on [0, eta_s]
/// (two quadratic pieces), and g, g' are its exact primitives. Outside the ramp
/// the value is shifted by a constant of order eta_s^2 and the slope by eta_s/2.
struct Integrand {
  double p = 2.0;
  double delta = 0.0;
  double eps = 0.0;
  bool smooth = true;

  double value(double t) const;
  double prime(double t) const;
  double second(double t) const;
  bool smoothed() const { return smooth && p == 2.0 && delta > 0.0; }
  double ramp_width() const { return 1e-3 * (delta > 1.0 ? delta : 1.0); }
};

double g_eps_value(double t, double p, double delta, double eps, bool smooth = true);
double g_eps_prime(double t, double p, double delta, double eps, bool smooth = true);
double g_eps_second(double t, double p, double delta, double eps, bool smooth = true);

class DegeneracyVector {
 public:
  DegeneracyVector() = default;
  explicit DegeneracyVector(std::vector<double> deltas);
  static DegeneracyVector zeros(int dim) { return DegeneracyVector(std::vector<double>(dim, 0.0)); }

  double operator[](int axis) const { return delta_[axis]; }
  int size() const { return static_cast<int>(delta_.size()); }
  const std::vector<double>& values() const { return delta_; }
  /// 1 + max_i delta_i
  double aggregate() const;
  double min() const;
  bool all_zero() const;
  bool operator==(const DegeneracyVector& o) const = default;

 private:
  std::vector<double> delta_;
};

struct NoLowerOrder {};

/// f * u, with grad_f optional (filled by central differences when missing).
struct LinearTerm {
  ScalarField f;
  std::optional<GradientField> grad_f;
};

/// G(x, xi) convex in xi, sampled per node. G_xixi may be left empty; a central
/// difference of G_xi is used then.
struct NonlinearTerm {
  using Fn = std::function<double(std::size_t node, double xi)>;
  Fn G;
  Fn G_xi;
  Fn G_xixi;
  ScalarField a;
  ScalarField b;
  double gamma = 2.0;
  nlohmann::json descriptor;
};

using LowerOrderTerm = std::variant<NoLowerOrder, LinearTerm, NonlinearTerm>;

/// G(x, xi) = (b/gamma) |xi|^gamma + c(x) xi. Growth bounds a = |c|,
/// b_growth = b/gamma + |c|.
NonlinearTerm make_power_term(const ScalarField& c, double b, double gamma);

/// Throws std::invalid_argument when G fails the sampled convexity or growth
/// test on xi in [-xi_max, xi_max].
void validate_lower_order(const LowerOrderTerm& term, const Grid& grid, double xi_max = 4.0);

bool has_lower_order(const LowerOrderTerm& term);
/// Node value, xi-derivative and second xi-derivative of the lower-order term.
double lower_value(const LowerOrderTerm& term, std::size_t node, double xi);
double lower_prime(const LowerOrderTerm& term, std::size_t node, double xi);
double lower_second(const LowerOrderTerm& term, std::size_t node, double xi);

struct ProblemSpec {
  Grid grid;
  double p = 2.0;
  DegeneracyVector deltas;
  double eps = 0.1;
  double eps0 = 0.5;
  /// Free nodes: grid-interior nodes inside `domain` (all interior nodes when
  /// empty). Every other node is frozen to `boundary`.
  std::optional<Ball> domain;
  ScalarField boundary;
  LowerOrderTerm lower = NoLowerOrder{};
  bool smooth_p2_kink = true;

  /// Throws std::invalid_argument (or GeometryError). With `for_solve` the
  /// regularization must satisfy 0 < eps <= eps0; otherwise eps = 0 is allowed.
  void validate(bool for_solve) const;
  Integrand integrand(int axis) const;
  std::vector<char> free_mask() const;
  std::size_t free_count() const;
};

/// Convenience: whole-grid problem with boundary data U and no lower-order term.
ProblemSpec make_spec(const ScalarField& boundary, double p, std::vector<double> deltas, double eps);

double energy_total(const ScalarField& u, const ProblemSpec& spec,
                    const std::optional<Ball>& region = std::nullopt);

/// Gradient of the whole-grid energy with respect to the nodal values, zeroed
/// on frozen nodes. Divided by the node weight it is the discrete form of
/// -sum_i (g'_{i,eps}(u_{x_i}))_{x_i} + f.
ScalarField first_variation(const ScalarField& u, const ProblemSpec& spec);

/// sqrt(sum over free nodes of (F_n / w_n)^2 w_n), F = first_variation.
double el_residual_norm(const ScalarField& u, const ProblemSpec& spec);
/// Same norm from an already computed first variation.
double variation_norm(const ScalarField& variation, const ProblemSpec& spec);

/// Residual of the equation differentiated along axis j:
///   R_j[n] = sum_i w [a_i D_jD_i u (edge into n) - a_i D_jD_i u (edge out of n)] / h_i
///            + w_n D_j (lower-order derivative field)
/// with a_i = g''_{i,eps}(D_i u) on the edge, D_jD_i u the central difference
/// along j of the edge differences, and D_j a central difference. Defined on
/// free nodes with every index in [2, n-3]; zero elsewhere.
ScalarField differentiated_system_residual(const ScalarField& u, const ProblemSpec& spec, int j);

}  // namespace ortholip

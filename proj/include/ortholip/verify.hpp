#pragma once

// Numerical instances of the Caccioppoli family, the reverse Hoelder step and
// the Lipschitz estimates.
//
// Conventions shared by the nodal checkers (caccioppoli, weird_caccioppoli,
// staircase, power_caccioppoli, reverse_holder):
//   * derivatives come from nodal_derivatives(): u_{x_i} is the mean of the
//     surrounding cell gradients, u_{x_i x_j} the difference of cell gradients
//     across the node (nested first differences, first-order consistent);
//   * integrals are node sums with weight h^dim; ball integrals keep the nodes
//     strictly inside the ball;
//   * a_i = g''_{i,eps}(u_{x_i}) at the node;
//   * f_{x_j} is the nodal derivative of the lower-order field (f for the
//     linear term, G_xi(x, u(x)) for the nonlinear one, so the derivative is
//     total);
//   * every report carries its RHS terms with unit constants and the implied
//     constant LHS / sum(RHS).
// The Lipschitz estimates use the cell-based norms of grid_core instead.

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ortholip/energy.hpp"
#include "ortholip/report.hpp"
#include "ortholip/solver.hpp"

namespace ortholip {

inline constexpr double kNoBudget = std::numeric_limits<double>::infinity();

/// Scalar map t -> value(t) with its derivative.
struct ScalarMap {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::string name;

  static ScalarMap identity();
  static ScalarMap constant(double c);
  /// |t|^r (r >= 1 keeps it convex and C^1 on R for r > 1, on [0, inf) for r = 1)
  static ScalarMap power(double r);
  /// |t|^r / r
  static ScalarMap scaled_power(double r);
};

/// Sampled convexity test on [lo, hi] via second differences.
bool sampled_convex(const ScalarMap& m, double lo, double hi, int samples = 201);
bool sampled_nondecreasing(const ScalarMap& m, double lo, double hi, int samples = 201);

/// True when f vanishes identically (or is absent) and every delta_i is 0.
bool homogeneous_regime(const ProblemSpec& spec);

/// Sobolev exponent 2N/(N-2); the surrogate 4 for N = 2.
double sobolev_exponent(int N);

/// sum_i int a_i |(Phi(u_{x_j}))_{x_i}|^2 eta^2
///   <= C [ sum_i int a_i Phi(u_{x_j})^2 eta_{x_i}^2 + int |f_{x_j}| |Phi'| |Phi| eta^2 ]
InequalityReport check_caccioppoli(const ScalarField& u, const ProblemSpec& spec, const ScalarMap& Phi, int j,
                                   const Ball& inner, const Ball& outer, double budget = kNoBudget);

/// Terms: "T1" = sum_i int a_i u_j^2 Phi Psi |grad eta|^2,
/// "mixed" = sqrt(F1) (sqrt(F2) + sqrt(E1)), "E2". Factors F1, F2, E1, E2.
InequalityReport check_weird_caccioppoli(const ScalarField& u, const ProblemSpec& spec, const ScalarMap& Phi,
                                         const ScalarMap& Psi, double theta, int j, int k, const Ball& inner,
                                         const Ball& outer, double budget = kNoBudget);

/// I(a, b) = sum_i int a_i u_{x_i x_j}^2 |u_{x_j}|^{2a} |u_{x_k}|^{2b} eta^2.
/// LHS = I(s-1, m). Homogeneous terms: R1, R2 (weight m+1), R3 = I(2s-1, m-s).
/// Non-homogeneous terms: R3, R1 (weight m+1, both axes), R4 (weight m^2, |grad f|).
InequalityReport check_staircase(const ScalarField& u, const ProblemSpec& spec, int s, int m, int j, int k,
                                 const Ball& inner, const Ball& outer, double budget = kNoBudget);

struct StaircaseStep {
  int s;
  int m;
};
/// (s_l, m_l) = (2^l, q + 1 - 2^l), l = 0..ell0, q = 2^ell0 - 1.
std::vector<StaircaseStep> staircase_indices(int ell0);
/// Reports for l = 0..ell0-1; the R3 term of step l is the LHS of step l+1.
std::vector<InequalityReport> staircase_chain(const ScalarField& u, const ProblemSpec& spec, int ell0, int j,
                                              int k, const Ball& inner, const Ball& outer,
                                              double budget = kNoBudget);

/// Homogeneous: LHS = int |grad(|u_k|^{q+(p-2)/2} u_k)|^2 eta^2,
/// terms q^5 sum_{i,j} int a_i |u_j|^{2q+2} |grad eta|^2 and q^5 sum_i int a_i |u_k|^{2q+2} |grad eta|^2.
/// Non-homogeneous: LHS with (|u_k| - delta_k)_+^{p/2} |u_k|^q and the |grad f| term.
InequalityReport check_power_caccioppoli(const ScalarField& u, const ProblemSpec& spec, int ell0, int k,
                                         const Ball& inner, const Ball& outer, double budget = kNoBudget);

/// Radii satisfy 0 < t < s <= R <= 1 (normalized chart). The "radius_factor"
/// factor is q^5 / (s - t)^2.
/// Homogeneous: LHS = (int_{B_t} U^{(2*/2)(2q+p)})^{2/2*}, U = max_k |u_k|,
///   single term radius_factor * int_{B_s} (U^{2q+p} + 1).
/// Non-homogeneous (U = max_k |u_k| / (2 delta)): LHS = (int_{B_t} (U - 1/2)_+^{(2*/2)p} U^{2* q})^{2/2*},
///   term radius_factor (1 + ||grad f||_{L^h(B_R)}) (int_{B_s} U^{(2q+2)h'} + 1)^{(2q+p)/((2q+2)h')}.
InequalityReport check_reverse_holder(const ScalarField& u, const ProblemSpec& spec, double q, const Point& center,
                                      double t, double s, double R, double h = 2.0, double budget = kNoBudget);

/// ||grad U||_inf(B_{R0/2}) <= C [ (avg_{B_R0} |grad U|^p)^{1/p}
///                                 + (R0^2 (avg_{B_R0} |grad f|^h)^{1/h})^{1/(p-1)} ].
/// Cell-based norms; requires B_{2 R0} inside the grid. grad_f defaults to the
/// staggered gradient of f.
InequalityReport check_lipschitz_estimate(const ScalarField& U, const ScalarField& f,
                                          const std::optional<GradientField>& grad_f, double p,
                                          const Point& center, double R0, double h, double budget = kNoBudget);

/// ||grad u||_inf(B_r0) <= C (1 + ||grad f||_{L^h(B_R0)}^{s2}) / (R0 - r0)^{s2} (||grad u||_{L^p(B_R0)}^{s1} + 1)
InequalityReport check_uniform_estimate(const SolveResult& solve, const ProblemSpec& spec, const Point& center,
                                        double r0, double R0, double sigma1, double sigma2, double h = 2.0,
                                        double budget = kNoBudget);

/// Raw quantities of one uniform-estimate instance, used for exponent fits.
struct UniformSample {
  double lhs;        // ||grad u||_inf(B_r0)
  double grad_f;     // ||grad f||_{L^h(B_R0)}
  double gap;        // R0 - r0
  double grad_u;     // ||grad u||_{L^p(B_R0)}
};
UniformSample uniform_sample(const SolveResult& solve, const ProblemSpec& spec, const Point& center, double r0,
                             double R0, double h = 2.0);

struct SigmaFit {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double log_c = 0.0;
  double rms = 0.0;
};
/// Least squares in log space of lhs ~ C (1 + g^s2)/gap^s2 (n^s1 + 1) over
/// s1, s2 in [lo, hi]; log C is eliminated in closed form.
SigmaFit fit_uniform_exponents(const std::vector<UniformSample>& samples, double lo = 0.0, double hi = 4.0);

/// Per axis max over edges of |D_i u_limit - D_i U| against 2 delta_i + slack.
/// LHS is the worst ratio difference / bound over the axes and the single
/// term is 1, so the implied constant passes at budget 1.
InequalityReport check_propagation(const ScalarField& u_limit, const ScalarField& U, const DegeneracyVector& deltas,
                                   double slack);

}  // namespace ortholip

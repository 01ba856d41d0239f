#pragma once

// Damped Newton method for the regularized discrete problem, and
// eps-continuation.
//
// Each iteration assembles the Hessian of the energy restricted to the free
// nodes, solves it with a sparse LDL^T factorization and backtracks along the
// Newton direction until the Armijo condition holds. Near the minimum the
// energy decrease drops below double resolution; a full step is then accepted
// when it reduces the Euler-Lagrange residual.

#include <optional>
#include <string>
#include <vector>

#include "ortholip/energy.hpp"
#include "ortholip/report.hpp"

namespace ortholip {

struct SolveResult {
  ScalarField u;
  double energy = 0.0;
  // Entry 0 belongs to the initial guess. Early Newton steps may raise the
  // residual while lowering the energy; once it drops below entry 0 it
  // decreases strictly.
  std::vector<double> residual_history;
  std::vector<double> step_lengths;
  int iterations = 0;
  bool converged = false;
  double eps = 0.0;
  std::string message;

  double final_residual() const { return residual_history.empty() ? 0.0 : residual_history.back(); }
};

/// Minimizer of the p = 2, delta = 0, eps = 0 energy with the same frozen data
/// and no lower-order term.
ScalarField harmonic_extension(const ProblemSpec& spec);

/// Stops when el_residual_norm <= tol. Throws std::invalid_argument on an
/// invalid spec; non-convergence is reported through `converged`.
SolveResult solve_regularized(const ProblemSpec& spec, double tol, int max_iter,
                              const std::optional<ScalarField>& initial_guess = std::nullopt);

struct ContinuationResult {
  std::vector<double> schedule;
  std::vector<SolveResult> steps;
  /// distances[k] = W^{1,p} distance between steps k and k + 1
  std::vector<double> distances;
};

/// Throws std::runtime_error when a step fails to converge.
ContinuationResult continuation_solve(const ProblemSpec& spec, const std::vector<double>& eps_schedule,
                                      double tol, int max_iter = 200);

/// (||u - v||_p^p + ||grad(u - v)||_p^p)^(1/p) over the whole grid.
double w1p_distance(const ScalarField& u, const ScalarField& v, double p);

/// int_B |grad u|^p  <=  C [ int_2B |grad U|^p + |B|^{p'/N} int_2B |f|^{p'}
///                           + (eps0 + max_i delta_i^p) |B| ]
InequalityReport energy_estimate_check(const SolveResult& result, const ProblemSpec& spec,
                                       const Ball& B, double budget = 1e6);

}  // namespace ortholip

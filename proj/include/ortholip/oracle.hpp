#pragma once

// Brute-force references for small instances. Nothing here goes through the
// solver's assembly or line search; the only shared pieces are the grid and the
// integrand evaluations.

#include <optional>

#include "ortholip/energy.hpp"

namespace ortholip {

inline constexpr std::size_t kOracleMaxUnknowns = 64;

struct OracleStats {
  long sweeps = 0;
  double last_move = 0.0;
};

/// Gauss-Seidel sweeps over the free nodes; each node is set to the exact
/// minimizer of the energy restricted to that node, found by bisection on the
/// (monotone) nodal derivative down to an interval of width 1e-14 * scale.
/// Stops when a sweep moves no node by more than `tol`.
/// Throws std::invalid_argument above kOracleMaxUnknowns free nodes and
/// std::runtime_error when max_sweeps is exhausted.
ScalarField coordinate_descent_minimize(const ProblemSpec& spec, double tol, long max_sweeps = 5'000'000,
                                        OracleStats* stats = nullptr);

/// True iff the eps = 0 energy and Euler-Lagrange residual of u both vanish
/// exactly. Requires no lower-order term.
bool degenerate_minimizer_check(const ScalarField& u, const ProblemSpec& spec);

/// Direct sparse solve of coefficient * Delta_h u = f (5- or 7-point stencil)
/// with u = boundary on the grid boundary and outside `domain`.
ScalarField poisson_reference(const ScalarField& f, const ScalarField& boundary, double coefficient = 1.0,
                              const std::optional<Ball>& domain = std::nullopt);

}  // namespace ortholip

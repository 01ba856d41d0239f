#include "ortholip/oracle.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <stdexcept>

namespace ortholip {

namespace {

struct Incident {
  std::size_t other;
  int axis;
  double weight;
  bool forward;  // edge runs from this node to `other`
};

}  // namespace

ScalarField coordinate_descent_minimize(const ProblemSpec& spec, double tol, long max_sweeps,
                                        OracleStats* stats) {
  spec.validate(false);
  const Grid& g = spec.grid;
  const int dim = g.dim();
  const auto free = spec.free_mask();
  std::vector<std::size_t> nodes;
  for (std::size_t n = 0; n < free.size(); ++n)
    if (free[n]) nodes.push_back(n);
  if (nodes.size() > kOracleMaxUnknowns) throw std::invalid_argument("oracle: too many unknowns");

  std::vector<std::vector<Incident>> inc(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::size_t n = nodes[k];
    const Index idx = g.multi_index(n);
    for (int a = 0; a < dim; ++a) {
      const std::size_t s = g.stride(a);
      if (idx[a] + 1 < g.nodes(a)) inc[k].push_back({n + s, a, g.edge_weight(a, n), true});
      if (idx[a] > 0) inc[k].push_back({n - s, a, g.edge_weight(a, n - s), false});
    }
  }
  std::array<Integrand, kMaxDim> ig;
  for (int a = 0; a < dim; ++a) ig[a] = spec.integrand(a);

  ScalarField u = spec.boundary;
  std::vector<double> width(nodes.size(), 1.0);

  auto nodal_derivative = [&](std::size_t k, double x) {
    const std::size_t n = nodes[k];
    double d = 0.0;
    for (const Incident& e : inc[k]) {
      const double h = g.spacing(e.axis);
      if (e.forward)
        d -= e.weight * ig[e.axis].prime((u.values[e.other] - x) / h) / h;
      else
        d += e.weight * ig[e.axis].prime((x - u.values[e.other]) / h) / h;
    }
    return d + g.node_weight(n) * lower_prime(spec.lower, n, x);
  };

  long sweep = 0;
  double move = 0.0;
  for (; sweep < max_sweeps; ++sweep) {
    move = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const double x0 = u.values[nodes[k]];
      const double scale = std::max(1.0, std::abs(x0));
      double w = std::max(width[k], 1e-13 * scale);
      double lo = x0 - w;
      double hi = x0 + w;
      while (nodal_derivative(k, lo) > 0.0) {
        w *= 2.0;
        lo = x0 - w;
      }
      while (nodal_derivative(k, hi) < 0.0) {
        w *= 2.0;
        hi = x0 + w;
      }
      for (int it = 0; it < 400 && hi - lo > 1e-14 * scale; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double dm = nodal_derivative(k, mid);
        if (dm > 0.0)
          hi = mid;
        else if (dm < 0.0)
          lo = mid;
        else {
          lo = hi = mid;
        }
      }
      const double x1 = 0.5 * (lo + hi);
      const double m = std::abs(x1 - x0);
      width[k] = std::max(2.0 * m, 1e-13 * scale);
      move = std::max(move, m);
      u.values[nodes[k]] = x1;
    }
    if (move <= tol) break;
  }
  if (stats) {
    stats->sweeps = sweep + 1;
    stats->last_move = move;
  }
  if (move > tol) throw std::runtime_error("oracle: sweep limit reached before the move tolerance");
  return u;
}

bool degenerate_minimizer_check(const ScalarField& u, const ProblemSpec& spec) {
  if (has_lower_order(spec.lower)) throw std::invalid_argument("degenerate check: lower-order term must be none");
  ProblemSpec s = spec;
  s.eps = 0.0;
  return energy_total(u, s) == 0.0 && el_residual_norm(u, s) == 0.0;
}

ScalarField poisson_reference(const ScalarField& f, const ScalarField& boundary, double coefficient,
                              const std::optional<Ball>& domain) {
  const Grid& g = boundary.grid;
  if (!f.grid.same_layout(g)) throw std::invalid_argument("poisson_reference: grids differ");
  if (!(coefficient > 0.0)) throw std::invalid_argument("poisson_reference: coefficient must be positive");
  const int dim = g.dim();
  std::vector<long> slot(g.node_count(), -1);
  long dof = 0;
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    if (g.on_boundary(n)) continue;
    if (domain && !domain->contains(g.position(n), dim)) continue;
    slot[n] = dof++;
  }
  ScalarField u = boundary;
  if (dof == 0) return u;

  // -sum_a (u[n+e] - 2u[n] + u[n-e]) / h_a^2 = -f / coefficient
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs(dof);
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const long r = slot[n];
    if (r < 0) continue;
    double b = -f.values[n] / coefficient;
    for (int a = 0; a < dim; ++a) {
      const double c = 1.0 / (g.spacing(a) * g.spacing(a));
      trip.emplace_back(r, r, 2.0 * c);
      for (std::size_t m : {n - g.stride(a), n + g.stride(a)}) {
        if (slot[m] >= 0)
          trip.emplace_back(r, slot[m], -c);
        else
          b += c * boundary.values[m];
      }
    }
    rhs[r] = b;
  }
  Eigen::SparseMatrix<double> A(dof, dof);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("poisson_reference: factorization failed");
  const Eigen::VectorXd x = lu.solve(rhs);
  for (std::size_t n = 0; n < g.node_count(); ++n)
    if (slot[n] >= 0) u.values[n] = x[slot[n]];
  return u;
}

}  // namespace ortholip

#include "ortholip/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <stdexcept>

namespace ortholip {

namespace {

struct FreeMap {
  std::vector<long> slot;  // -1 for frozen nodes
  std::vector<std::size_t> nodes;
};

FreeMap map_free(const ProblemSpec& spec) {
  FreeMap m;
  const auto mask = spec.free_mask();
  m.slot.assign(mask.size(), -1);
  for (std::size_t n = 0; n < mask.size(); ++n)
    if (mask[n]) {
      m.slot[n] = static_cast<long>(m.nodes.size());
      m.nodes.push_back(n);
    }
  return m;
}

Eigen::SparseMatrix<double> assemble_hessian(const ScalarField& u, const ProblemSpec& spec, const FreeMap& fm) {
  const Grid& g = spec.grid;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(fm.nodes.size() * (1 + 2 * g.dim()) * 2);
  for (int a = 0; a < g.dim(); ++a) {
    const Integrand ig = spec.integrand(a);
    const std::size_t s = g.stride(a);
    const double h = g.spacing(a);
    for (std::size_t n = 0; n < g.node_count(); ++n) {
      if (!g.has_edge(a, n)) continue;
      const long i = fm.slot[n];
      const long j = fm.slot[n + s];
      if (i < 0 && j < 0) continue;
      const double c = g.edge_weight(a, n) * ig.second((u.values[n + s] - u.values[n]) / h) / (h * h);
      if (i >= 0) trip.emplace_back(i, i, c);
      if (j >= 0) trip.emplace_back(j, j, c);
      if (i >= 0 && j >= 0) {
        trip.emplace_back(i, j, -c);
        trip.emplace_back(j, i, -c);
      }
    }
  }
  if (has_lower_order(spec.lower))
    for (std::size_t k = 0; k < fm.nodes.size(); ++k) {
      const std::size_t n = fm.nodes[k];
      const double d = g.node_weight(n) * lower_second(spec.lower, n, u.values[n]);
      if (d != 0.0) trip.emplace_back(static_cast<long>(k), static_cast<long>(k), d);
    }
  const long dof = static_cast<long>(fm.nodes.size());
  Eigen::SparseMatrix<double> H(dof, dof);
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

Eigen::VectorXd restrict_to_free(const ScalarField& F, const FreeMap& fm) {
  Eigen::VectorXd v(static_cast<long>(fm.nodes.size()));
  for (std::size_t k = 0; k < fm.nodes.size(); ++k) v[static_cast<long>(k)] = F.values[fm.nodes[k]];
  return v;
}

ScalarField shifted(const ScalarField& u, const FreeMap& fm, const Eigen::VectorXd& d, double t) {
  ScalarField out = u;
  for (std::size_t k = 0; k < fm.nodes.size(); ++k) out.values[fm.nodes[k]] += t * d[static_cast<long>(k)];
  return out;
}

}  // namespace

ScalarField harmonic_extension(const ProblemSpec& spec) {
  ProblemSpec lap = spec;
  lap.p = 2.0;
  lap.deltas = DegeneracyVector::zeros(spec.grid.dim());
  lap.eps = 0.0;
  lap.lower = NoLowerOrder{};
  const FreeMap fm = map_free(lap);
  if (fm.nodes.empty()) return spec.boundary;
  const ScalarField& U = spec.boundary;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(assemble_hessian(U, lap, fm));
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("harmonic extension: factorization failed");
  const Eigen::VectorXd d = ldlt.solve(-restrict_to_free(first_variation(U, lap), fm));
  return shifted(U, fm, d, 1.0);
}

SolveResult solve_regularized(const ProblemSpec& spec, double tol, int max_iter,
                              const std::optional<ScalarField>& initial_guess) {
  spec.validate(true);
  if (!(tol > 0.0)) throw std::invalid_argument("solve: tol must be positive");
  if (max_iter < 0) throw std::invalid_argument("solve: max_iter must be >= 0");
  const FreeMap fm = map_free(spec);

  SolveResult res;
  res.eps = spec.eps;
  if (initial_guess) {
    if (!initial_guess->grid.same_layout(spec.grid)) throw std::invalid_argument("solve: initial guess grid");
    res.u = *initial_guess;
    const auto mask = spec.free_mask();
    for (std::size_t n = 0; n < mask.size(); ++n)
      if (!mask[n]) res.u.values[n] = spec.boundary.values[n];
  } else {
    res.u = harmonic_extension(spec);
  }

  ScalarField F = first_variation(res.u, spec);
  double r = variation_norm(F, spec);
  double E = energy_total(res.u, spec);
  res.residual_history.push_back(r);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;
  constexpr double kArmijo = 1e-4;
  constexpr double kMinStep = 1e-12;

  while (r > tol) {
    if (res.iterations >= max_iter) {
      res.message = "iteration limit reached";
      break;
    }
    const Eigen::SparseMatrix<double> H = assemble_hessian(res.u, spec, fm);
    if (!analyzed) {
      ldlt.analyzePattern(H);
      analyzed = true;
    }
    ldlt.factorize(H);
    if (ldlt.info() != Eigen::Success) {
      res.message = "Hessian factorization failed";
      break;
    }
    const Eigen::VectorXd grad = restrict_to_free(F, fm);
    const Eigen::VectorXd d = ldlt.solve(-grad);
    const double slope = grad.dot(d);

    double t = 1.0;
    bool accepted = false;
    ScalarField trial;
    ScalarField Ftrial;
    double Etrial = 0.0;
    double rtrial = 0.0;
    while (t >= kMinStep) {
      trial = shifted(res.u, fm, d, t);
      Etrial = energy_total(trial, spec);
      if (std::isfinite(Etrial) && Etrial <= E + kArmijo * t * slope) {
        accepted = true;
        break;
      }
      // energy differences below roundoff: judge the step by the residual
      const double noise = 1e-13 * (std::abs(E) + std::abs(Etrial));
      if (std::isfinite(Etrial) && Etrial - E <= noise) {
        Ftrial = first_variation(trial, spec);
        rtrial = variation_norm(Ftrial, spec);
        if (rtrial < r) {
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) {
      res.message = "line search stagnated";
      break;
    }
    if (Ftrial.values.empty()) {
      Ftrial = first_variation(trial, spec);
      rtrial = variation_norm(Ftrial, spec);
    }
    res.u = std::move(trial);
    F = std::move(Ftrial);
    E = Etrial;
    r = rtrial;
    ++res.iterations;
    res.residual_history.push_back(r);
    res.step_lengths.push_back(t);
  }
  res.energy = E;
  res.converged = r <= tol;
  if (res.converged) res.message = "converged";
  return res;
}

double w1p_distance(const ScalarField& u, const ScalarField& v, double p) {
  if (!u.grid.same_layout(v.grid)) throw std::invalid_argument("w1p_distance: grids differ");
  ScalarField d = u;
  for (std::size_t n = 0; n < d.size(); ++n) d.values[n] -= v.values[n];
  const double a = lp_norm(d, p);
  const double b = lp_norm(gradient(d), p);
  return std::pow(std::pow(a, p) + std::pow(b, p), 1.0 / p);
}

ContinuationResult continuation_solve(const ProblemSpec& spec, const std::vector<double>& eps_schedule,
                                      double tol, int max_iter) {
  if (eps_schedule.empty()) throw std::invalid_argument("continuation: empty schedule");
  for (std::size_t k = 0; k < eps_schedule.size(); ++k) {
    if (!(eps_schedule[k] > 0.0) || eps_schedule[k] > spec.eps0)
      throw std::invalid_argument("continuation: schedule entries must lie in (0, eps0]");
    if (k > 0 && !(eps_schedule[k] < eps_schedule[k - 1]))
      throw std::invalid_argument("continuation: schedule must be strictly decreasing");
  }
  ContinuationResult out;
  out.schedule = eps_schedule;
  ProblemSpec step = spec;
  std::optional<ScalarField> warm;
  for (double eps : eps_schedule) {
    step.eps = eps;
    SolveResult r = solve_regularized(step, tol, max_iter, warm);
    if (!r.converged)
      throw std::runtime_error("continuation: step eps=" + std::to_string(eps) + " did not converge (" +
                               r.message + ")");
    warm = r.u;
    if (!out.steps.empty()) out.distances.push_back(w1p_distance(out.steps.back().u, r.u, spec.p));
    out.steps.push_back(std::move(r));
  }
  return out;
}

InequalityReport energy_estimate_check(const SolveResult& result, const ProblemSpec& spec, const Ball& B,
                                       double budget) {
  const Grid& g = spec.grid;
  const Ball B2 = B.scaled(2.0);
  require_inside(g, B2, "energy_estimate_check");
  const double p = spec.p;
  const double pc = p / (p - 1.0);
  const double N = g.dim();

  InequalityReport rep;
  rep.name = "energy_estimate";
  rep.lhs = std::pow(lp_norm(gradient(result.u), p, B), p);
  rep.add_term("grad_U", std::pow(lp_norm(gradient(spec.boundary), p, B2), p));

  double f_term = 0.0;
  if (has_lower_order(spec.lower)) {
    ScalarField f(g);
    for (std::size_t n = 0; n < g.node_count(); ++n)
      f.values[n] = lower_prime(spec.lower, n, result.u.values[n]);
    f_term = std::pow(lp_norm(f, pc, B2), pc);
  }
  const double measure = region_measure(g, B);
  rep.add_term("data_f", std::pow(measure, pc / N) * f_term);
  double dmax = spec.deltas.aggregate() - 1.0;
  rep.add_term("degeneracy", (spec.eps0 + std::pow(dmax, p)) * measure);
  rep.params = {{"spacing", g.min_spacing()}, {"radius", B.radius}, {"p", p}, {"eps", spec.eps},
                {"clipping", "cell-center indicator"}};
  return rep.finalize(budget);
}

}  // namespace ortholip

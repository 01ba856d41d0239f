#include "ortholip/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ortholip {

double g_value(double t, double p, double delta) {
  const double a = std::abs(t) - delta;
  if (a <= 0.0) return 0.0;
  return std::pow(a, p) / p;
}

namespace {

// C^1 ramp for g'' and its two primitives, a = |t| - delta >= 0.
double ramp(double a, double eta) {
  if (a <= 0.0) return 0.0;
  if (a >= eta) return 1.0;
  const double s = a / eta;
  if (s <= 0.5) return 2.0 * s * s;
  return 1.0 - 2.0 * (1.0 - s) * (1.0 - s);
}

double ramp_int1(double a, double eta) {
  if (a <= 0.0) return 0.0;
  if (a >= eta) return a - 0.5 * eta;
  const double s = a / eta;
  if (s <= 0.5) return 2.0 * a * a * a / (3.0 * eta * eta);
  const double r = 1.0 - s;
  return a - 0.5 * eta + (2.0 * eta / 3.0) * r * r * r;
}

double ramp_int2(double a, double eta) {
  if (a <= 0.0) return 0.0;
  const double m = a - 0.5 * eta;
  if (a >= eta) return 0.5 * m * m + eta * eta / 48.0;
  const double s = a / eta;
  if (s <= 0.5) return a * a * a * a / (6.0 * eta * eta);
  const double r = 1.0 - s;
  return 0.5 * m * m - (eta * eta / 6.0) * r * r * r * r + eta * eta / 48.0;
}

double sgn(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

}  // namespace

double Integrand::value(double t) const {
  const double reg = 0.5 * eps * t * t;
  if (smoothed()) return ramp_int2(std::abs(t) - delta, ramp_width()) + reg;
  return g_value(t, p, delta) + reg;
}

double Integrand::prime(double t) const {
  const double reg = eps * t;
  const double a = std::abs(t) - delta;
  if (smoothed()) return sgn(t) * ramp_int1(a, ramp_width()) + reg;
  if (a <= 0.0) return reg;
  return sgn(t) * std::pow(a, p - 1.0) + reg;
}

double Integrand::second(double t) const {
  const double a = std::abs(t) - delta;
  if (smoothed()) return ramp(a, ramp_width()) + eps;
  if (p == 2.0) return (a > 0.0 || delta == 0.0 ? 1.0 : 0.0) + eps;
  if (a <= 0.0) return eps;
  return (p - 1.0) * std::pow(a, p - 2.0) + eps;
}

double g_eps_value(double t, double p, double delta, double eps, bool smooth) {
  return Integrand{p, delta, eps, smooth}.value(t);
}
double g_eps_prime(double t, double p, double delta, double eps, bool smooth) {
  return Integrand{p, delta, eps, smooth}.prime(t);
}
double g_eps_second(double t, double p, double delta, double eps, bool smooth) {
  return Integrand{p, delta, eps, smooth}.second(t);
}

DegeneracyVector::DegeneracyVector(std::vector<double> deltas) : delta_(std::move(deltas)) {
  for (double d : delta_)
    if (!(d >= 0.0) || !std::isfinite(d))
      throw std::invalid_argument("degeneracy thresholds must be finite and >= 0");
}

double DegeneracyVector::aggregate() const {
  double m = 0.0;
  for (double d : delta_) m = std::max(m, d);
  return 1.0 + m;
}

double DegeneracyVector::min() const {
  if (delta_.empty()) return 0.0;
  return *std::min_element(delta_.begin(), delta_.end());
}

bool DegeneracyVector::all_zero() const {
  return std::all_of(delta_.begin(), delta_.end(), [](double d) { return d == 0.0; });
}

NonlinearTerm make_power_term(const ScalarField& c, double b, double gamma) {
  if (!(gamma > 1.0)) throw std::invalid_argument("power term: gamma must exceed 1");
  if (!(b > 0.0)) throw std::invalid_argument("power term: b must be positive");
  NonlinearTerm t;
  const std::vector<double> cv = c.values;
  t.G = [cv, b, gamma](std::size_t n, double xi) {
    return b / gamma * std::pow(std::abs(xi), gamma) + cv[n] * xi;
  };
  t.G_xi = [cv, b, gamma](std::size_t n, double xi) {
    return b * sgn(xi) * std::pow(std::abs(xi), gamma - 1.0) + cv[n];
  };
  t.G_xixi = [b, gamma](std::size_t, double xi) {
    if (gamma == 2.0) return b;
    return b * (gamma - 1.0) * std::pow(std::abs(xi), gamma - 2.0);
  };
  t.a = ScalarField(c.grid);
  t.b = ScalarField(c.grid);
  for (std::size_t n = 0; n < c.size(); ++n) {
    t.a.values[n] = std::abs(cv[n]);
    t.b.values[n] = b / gamma + std::abs(cv[n]);
  }
  t.gamma = gamma;
  t.descriptor = {{"model", "power"}, {"b", b}, {"gamma", gamma}};
  return t;
}

bool has_lower_order(const LowerOrderTerm& term) {
  return !std::holds_alternative<NoLowerOrder>(term);
}

double lower_value(const LowerOrderTerm& term, std::size_t node, double xi) {
  if (auto* lin = std::get_if<LinearTerm>(&term)) return lin->f.values[node] * xi;
  if (auto* nl = std::get_if<NonlinearTerm>(&term)) return nl->G(node, xi);
  return 0.0;
}

double lower_prime(const LowerOrderTerm& term, std::size_t node, double xi) {
  if (auto* lin = std::get_if<LinearTerm>(&term)) return lin->f.values[node];
  if (auto* nl = std::get_if<NonlinearTerm>(&term)) return nl->G_xi(node, xi);
  return 0.0;
}

double lower_second(const LowerOrderTerm& term, std::size_t node, double xi) {
  if (auto* nl = std::get_if<NonlinearTerm>(&term)) {
    if (nl->G_xixi) return nl->G_xixi(node, xi);
    const double step = 1e-6 * std::max(1.0, std::abs(xi));
    return (nl->G_xi(node, xi + step) - nl->G_xi(node, xi - step)) / (2.0 * step);
  }
  return 0.0;
}

void validate_lower_order(const LowerOrderTerm& term, const Grid& grid, double xi_max) {
  if (auto* lin = std::get_if<LinearTerm>(&term)) {
    if (!lin->f.grid.same_layout(grid)) throw std::invalid_argument("f lives on a different grid");
    if (!lin->f.all_finite()) throw std::invalid_argument("f has non-finite values");
    if (lin->grad_f && !lin->grad_f->grid.same_layout(grid))
      throw std::invalid_argument("grad f lives on a different grid");
    return;
  }
  auto* nl = std::get_if<NonlinearTerm>(&term);
  if (!nl) return;
  if (!nl->G || !nl->G_xi) throw std::invalid_argument("nonlinear term needs G and G_xi");
  if (!nl->a.grid.same_layout(grid) || !nl->b.grid.same_layout(grid))
    throw std::invalid_argument("growth coefficients live on a different grid");
  constexpr int kSamples = 41;
  const double step = 2.0 * xi_max / (kSamples - 1);
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    double prev2 = 0.0, prev1 = 0.0;
    for (int k = 0; k < kSamples; ++k) {
      const double xi = -xi_max + k * step;
      const double g = nl->G(n, xi);
      if (!std::isfinite(g)) throw std::invalid_argument("G is not finite on the sampled range");
      const double bound = nl->b.values[n] * std::pow(std::abs(xi), nl->gamma) + nl->a.values[n];
      if (std::abs(g) > bound * (1.0 + 1e-12) + 1e-12)
        throw std::invalid_argument("G violates the growth bound b|xi|^gamma + a");
      if (k >= 2) {
        const double second = prev2 - 2.0 * prev1 + g;
        const double scale = std::abs(prev2) + 2.0 * std::abs(prev1) + std::abs(g) + 1.0;
        if (second < -1e-10 * scale) throw std::invalid_argument("G is not convex in xi");
      }
      prev2 = prev1;
      prev1 = g;
    }
  }
}

void ProblemSpec::validate(bool for_solve) const {
  if (grid.dim() != 2 && grid.dim() != 3) throw std::invalid_argument("spec: grid not set");
  if (!(p >= 2.0) || !std::isfinite(p)) throw std::invalid_argument("spec: p must be >= 2");
  if (deltas.size() != grid.dim()) throw std::invalid_argument("spec: one delta per axis required");
  if (!(eps0 > 0.0 && eps0 < 1.0)) throw std::invalid_argument("spec: eps0 must lie in (0,1)");
  if (!(eps >= 0.0) || eps > eps0) throw std::invalid_argument("spec: eps must lie in [0, eps0]");
  if (for_solve && !(eps > 0.0)) throw std::invalid_argument("spec: solving needs eps > 0");
  if (!boundary.grid.same_layout(grid) || boundary.size() != grid.node_count())
    throw std::invalid_argument("spec: boundary data lives on a different grid");
  if (!boundary.all_finite()) throw std::invalid_argument("spec: boundary data not finite");
  if (domain) require_inside(grid, domain->scaled(2.0), "spec domain (2B)");
  validate_lower_order(lower, grid);
}

Integrand ProblemSpec::integrand(int axis) const {
  return Integrand{p, deltas[axis], eps, smooth_p2_kink};
}

std::vector<char> ProblemSpec::free_mask() const {
  std::vector<char> mask(grid.node_count(), 0);
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    if (grid.on_boundary(n)) continue;
    if (domain && !domain->contains(grid.position(n), grid.dim())) continue;
    mask[n] = 1;
  }
  return mask;
}

std::size_t ProblemSpec::free_count() const {
  const auto m = free_mask();
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), 1));
}

ProblemSpec make_spec(const ScalarField& boundary, double p, std::vector<double> deltas, double eps) {
  ProblemSpec s;
  s.grid = boundary.grid;
  s.p = p;
  s.deltas = DegeneracyVector(std::move(deltas));
  s.eps = eps;
  s.boundary = boundary;
  return s;
}

namespace {

void check_layout(const ScalarField& u, const ProblemSpec& spec) {
  if (!u.grid.same_layout(spec.grid)) throw std::invalid_argument("field and spec grids differ");
}

// Central difference along j of a nodal field.
double central(const std::vector<double>& v, const Grid& g, std::size_t n, int j) {
  const std::size_t s = g.stride(j);
  return (v[n + s] - v[n - s]) / (2.0 * g.spacing(j));
}

}  // namespace

double energy_total(const ScalarField& u, const ProblemSpec& spec, const std::optional<Ball>& region) {
  check_layout(u, spec);
  const Grid& g = spec.grid;
  const int dim = g.dim();
  std::array<Integrand, kMaxDim> ig;
  for (int a = 0; a < dim; ++a) ig[a] = spec.integrand(a);

  if (!region) {
    double e = 0.0;
    for (int a = 0; a < dim; ++a) {
      const std::size_t s = g.stride(a);
      const double inv_h = 1.0 / g.spacing(a);
      for (std::size_t n = 0; n < g.node_count(); ++n) {
        if (!g.has_edge(a, n)) continue;
        e += g.edge_weight(a, n) * ig[a].value((u.values[n + s] - u.values[n]) * inv_h);
      }
    }
    if (has_lower_order(spec.lower))
      for (std::size_t n = 0; n < g.node_count(); ++n)
        e += g.node_weight(n) * lower_value(spec.lower, n, u.values[n]);
    return e;
  }

  require_inside(g, *region, "energy_total");
  const double vol = g.cell_volume();
  const int corners = 1 << dim;
  const double edge_share = 1.0 / static_cast<double>(corners / 2);
  const bool lower = has_lower_order(spec.lower);
  double e = 0.0;
  for (std::size_t c = 0; c < g.node_count(); ++c) {
    if (!g.is_cell_base(c) || !region->contains(g.cell_center(c), dim)) continue;
    double cell = 0.0;
    for (int mask = 0; mask < corners; ++mask) {
      std::size_t n = c;
      for (int a = 0; a < dim; ++a)
        if (mask & (1 << a)) n += g.stride(a);
      if (lower) cell += lower_value(spec.lower, n, u.values[n]) / corners;
      // every corner with bit a clear is the base of one cell edge along a
      for (int a = 0; a < dim; ++a) {
        if (mask & (1 << a)) continue;
        const double t = (u.values[n + g.stride(a)] - u.values[n]) / g.spacing(a);
        cell += edge_share * ig[a].value(t);
      }
    }
    e += vol * cell;
  }
  return e;
}

ScalarField first_variation(const ScalarField& u, const ProblemSpec& spec) {
  check_layout(u, spec);
  const Grid& g = spec.grid;
  const auto free = spec.free_mask();
  ScalarField out(g);
  for (int a = 0; a < g.dim(); ++a) {
    const Integrand ig = spec.integrand(a);
    const std::size_t s = g.stride(a);
    const double inv_h = 1.0 / g.spacing(a);
    for (std::size_t n = 0; n < g.node_count(); ++n) {
      if (!g.has_edge(a, n)) continue;
      const double flux = g.edge_weight(a, n) * ig.prime((u.values[n + s] - u.values[n]) * inv_h) * inv_h;
      out.values[n] -= flux;
      out.values[n + s] += flux;
    }
  }
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    if (!free[n]) {
      out.values[n] = 0.0;
      continue;
    }
    if (has_lower_order(spec.lower)) out.values[n] += g.node_weight(n) * lower_prime(spec.lower, n, u.values[n]);
  }
  return out;
}

double variation_norm(const ScalarField& variation, const ProblemSpec& spec) {
  const Grid& g = spec.grid;
  const auto free = spec.free_mask();
  double s = 0.0;
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    if (!free[n]) continue;
    const double w = g.node_weight(n);
    const double r = variation.values[n] / w;
    s += r * r * w;
  }
  return std::sqrt(s);
}

double el_residual_norm(const ScalarField& u, const ProblemSpec& spec) {
  return variation_norm(first_variation(u, spec), spec);
}

ScalarField differentiated_system_residual(const ScalarField& u, const ProblemSpec& spec, int j) {
  check_layout(u, spec);
  const Grid& g = spec.grid;
  const int dim = g.dim();
  if (j < 0 || j >= dim) throw std::invalid_argument("differentiated residual: bad axis");
  const auto free = spec.free_mask();
  const GradientField du = gradient(u);

  std::vector<double> lower_field;
  if (has_lower_order(spec.lower)) {
    lower_field.resize(g.node_count());
    for (std::size_t n = 0; n < g.node_count(); ++n)
      lower_field[n] = lower_prime(spec.lower, n, u.values[n]);
  }

  const std::size_t sj = g.stride(j);
  const double hj2 = 2.0 * g.spacing(j);
  ScalarField out(g);
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    if (!free[n] || !g.is_inner(n, 2)) continue;
    double r = 0.0;
    for (int i = 0; i < dim; ++i) {
      const Integrand ig = spec.integrand(i);
      const std::size_t si = g.stride(i);
      const auto& Di = du.components[i];
      // edge_flux(e) = g''(D_i u(e)) * D_j D_i u(e)
      auto edge_flux = [&](std::size_t e) {
        return ig.second(Di[e]) * (Di[e + sj] - Di[e - sj]) / hj2;
      };
      const double inflow = edge_flux(n - si);
      const double outflow = edge_flux(n);
      r += g.edge_weight(i, n) * (inflow - outflow) / g.spacing(i);
    }
    if (!lower_field.empty()) r += g.node_weight(n) * central(lower_field, g, n, j);
    out.values[n] = r;
  }
  return out;
}

}  // namespace ortholip

#include "ortholip/verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ortholip {

ScalarMap ScalarMap::identity() {
  return {[](double t) { return t; }, [](double) { return 1.0; }, "identity"};
}

ScalarMap ScalarMap::constant(double c) {
  return {[c](double) { return c; }, [](double) { return 0.0; }, "constant"};
}

ScalarMap ScalarMap::power(double r) {
  return {[r](double t) { return std::pow(std::abs(t), r); },
          [r](double t) {
            if (r == 0.0) return 0.0;
            const double sg = t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0);
            if (r == 1.0) return t == 0.0 ? 1.0 : sg;
            return r * sg * std::pow(std::abs(t), r - 1.0);
          },
          "power"};
}

ScalarMap ScalarMap::scaled_power(double r) {
  const ScalarMap base = power(r);
  return {[base, r](double t) { return base.value(t) / r; }, [base, r](double t) { return base.derivative(t) / r; },
          "scaled_power"};
}

bool sampled_convex(const ScalarMap& m, double lo, double hi, int samples) {
  if (!(hi > lo)) return true;
  const double step = (hi - lo) / (samples - 1);
  for (int k = 1; k + 1 < samples; ++k) {
    const double a = m.value(lo + (k - 1) * step), b = m.value(lo + k * step), c = m.value(lo + (k + 1) * step);
    if (a - 2 * b + c < -1e-10 * (std::abs(a) + 2 * std::abs(b) + std::abs(c) + 1e-300)) return false;
  }
  return true;
}

bool sampled_nondecreasing(const ScalarMap& m, double lo, double hi, int samples) {
  if (!(hi > lo)) return true;
  const double step = (hi - lo) / (samples - 1);
  double prev = m.value(lo);
  for (int k = 1; k < samples; ++k) {
    const double v = m.value(lo + k * step);
    if (v < prev - 1e-12 * std::abs(prev)) return false;
    prev = v;
  }
  return true;
}

bool homogeneous_regime(const ProblemSpec& spec) {
  if (!spec.deltas.all_zero()) return false;
  if (std::holds_alternative<NoLowerOrder>(spec.lower)) return true;
  if (auto* lin = std::get_if<LinearTerm>(&spec.lower))
    return std::all_of(lin->f.values.begin(), lin->f.values.end(), [](double v) { return v == 0.0; });
  return false;
}

double sobolev_exponent(int N) {
  if (N < 2) throw std::invalid_argument("sobolev exponent: N must be >= 2");
  if (N == 2) return 4.0;
  return 2.0 * N / (N - 2.0);
}

namespace {

double sq(double x) { return x * x; }

double norm2(const Point& v, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += v[a] * v[a];
  return s;
}

ScalarField lower_field(const ScalarField& u, const ProblemSpec& spec) {
  ScalarField f(spec.grid);
  if (has_lower_order(spec.lower))
    for (std::size_t n = 0; n < f.size(); ++n) f.values[n] = lower_prime(spec.lower, n, u.values[n]);
  return f;
}

void check_axis(int axis, int dim, const char* what) {
  if (axis < 0 || axis >= dim) throw std::invalid_argument(std::string(what) + ": axis out of range");
}

// Nodal data shared by the Caccioppoli-type checkers.
struct Context {
  const Grid* grid = nullptr;
  int dim = 0;
  double w = 0.0;
  NodalDerivatives du;
  std::vector<std::size_t> nodes;
  std::vector<double> eta;
  std::vector<Point> deta;
  std::vector<Point> df;
  std::vector<std::array<double, kMaxDim>> a;

  const Point& grad(std::size_t n) const { return du.jets[n].d; }
  double hess(std::size_t n, int i, int j) const { return du.jets[n].dd[i][j]; }
  double grad_eta2(std::size_t n) const { return norm2(deta[n], dim); }
  double grad_f_norm(std::size_t n) const { return std::sqrt(norm2(df[n], dim)); }
};

void require_margin(const Grid& g, const Ball& ball, const char* what) {
  double hmax = 0.0;
  for (int a = 0; a < g.dim(); ++a) hmax = std::max(hmax, g.spacing(a));
  require_inside(g, Ball{ball.center, ball.radius + 2.0 * hmax}, what);
}

Context make_context(const ScalarField& u, const ProblemSpec& spec, const Ball& inner, const Ball& outer,
                     const char* what) {
  if (!u.grid.same_layout(spec.grid)) throw std::invalid_argument(std::string(what) + ": grids differ");
  const Grid& g = spec.grid;
  require_margin(g, outer, what);
  Context c;
  c.grid = &g;
  c.dim = g.dim();
  c.w = g.cell_volume();
  c.du = nodal_derivatives(u);
  const ScalarField eta = cutoff_eta(g, inner, outer);
  c.eta = eta.values;
  const NodalDerivatives de = nodal_derivatives(eta);
  c.deta.assign(g.node_count(), Point{0, 0, 0});
  c.df.assign(g.node_count(), Point{0, 0, 0});
  c.a.assign(g.node_count(), {0, 0, 0});
  const bool lower = has_lower_order(spec.lower);
  NodalDerivatives dfield;
  if (lower) dfield = nodal_derivatives(lower_field(u, spec));
  std::array<Integrand, kMaxDim> ig;
  for (int i = 0; i < c.dim; ++i) ig[i] = spec.integrand(i);
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    if (!c.du.valid[n]) continue;
    c.nodes.push_back(n);
    c.deta[n] = de.jets[n].d;
    if (lower) c.df[n] = dfield.jets[n].d;
    for (int i = 0; i < c.dim; ++i) c.a[n][i] = ig[i].second(c.du.jets[n].d[i]);
  }
  return c;
}

nlohmann::json base_params(const Grid& g, const Ball& inner, const Ball& outer) {
  return {{"spacing", g.min_spacing()},
          {"inner_radius", inner.radius},
          {"outer_radius", outer.radius},
          {"cutoff_gradient_bound", kCutoffGradientBound},
          {"stencil", "nested first differences, node quadrature"}};
}

double max_abs_component(const Context& c, int j) {
  double m = 0.0;
  for (std::size_t n : c.nodes) m = std::max(m, std::abs(c.grad(n)[j]));
  return m;
}

// I(a, b) = sum_i int a_i u_ij^2 |u_j|^{2a} |u_k|^{2b} eta^2
double staircase_integral(const Context& c, int a, int b, int j, int k) {
  double s = 0.0;
  for (std::size_t n : c.nodes) {
    const double e2 = sq(c.eta[n]);
    if (e2 == 0.0) continue;
    const double uj = std::abs(c.grad(n)[j]);
    const double uk = std::abs(c.grad(n)[k]);
    const double wgt = std::pow(uj, 2.0 * a) * std::pow(uk, 2.0 * b);
    double acc = 0.0;
    for (int i = 0; i < c.dim; ++i) acc += c.a[n][i] * sq(c.hess(n, i, j));
    s += c.w * acc * wgt * e2;
  }
  return s;
}

}  // namespace

InequalityReport check_caccioppoli(const ScalarField& u, const ProblemSpec& spec, const ScalarMap& Phi, int j,
                                   const Ball& inner, const Ball& outer, double budget) {
  check_axis(j, spec.grid.dim(), "caccioppoli");
  const Context c = make_context(u, spec, inner, outer, "caccioppoli");
  const double range = max_abs_component(c, j) + 1.0;
  if (!sampled_convex(Phi, -range, range)) throw std::invalid_argument("caccioppoli: Phi is not convex");

  double lhs = 0.0, r1 = 0.0, r2 = 0.0;
  for (std::size_t n : c.nodes) {
    const double uj = c.grad(n)[j];
    const double phi = Phi.value(uj);
    const double dphi = Phi.derivative(uj);
    const double e2 = sq(c.eta[n]);
    for (int i = 0; i < c.dim; ++i) {
      lhs += c.w * c.a[n][i] * sq(dphi * c.hess(n, i, j)) * e2;
      r1 += c.w * c.a[n][i] * sq(phi) * sq(c.deta[n][i]);
    }
    r2 += c.w * std::abs(c.df[n][j]) * std::abs(dphi) * std::abs(phi) * e2;
  }
  InequalityReport rep;
  rep.name = "caccioppoli";
  rep.lhs = lhs;
  rep.add_term("cutoff", r1);
  rep.add_term("data_f", r2);
  rep.params = base_params(spec.grid, inner, outer);
  rep.params["j"] = j;
  rep.params["phi"] = Phi.name;
  rep.params["p"] = spec.p;
  rep.params["eps"] = spec.eps;
  return rep.finalize(budget);
}

InequalityReport check_weird_caccioppoli(const ScalarField& u, const ProblemSpec& spec, const ScalarMap& Phi,
                                         const ScalarMap& Psi, double theta, int j, int k, const Ball& inner,
                                         const Ball& outer, double budget) {
  const int dim = spec.grid.dim();
  check_axis(j, dim, "weird caccioppoli");
  check_axis(k, dim, "weird caccioppoli");
  if (!(theta >= 0.0 && theta <= 2.0)) throw std::invalid_argument("weird caccioppoli: theta must lie in [0,2]");
  const Context c = make_context(u, spec, inner, outer, "weird caccioppoli");
  const double top = sq(std::max(max_abs_component(c, j), max_abs_component(c, k))) + 1.0;
  if (!sampled_nondecreasing(Phi, 0.0, top)) throw std::invalid_argument("weird caccioppoli: Phi must be non-decreasing");
  if (!sampled_nondecreasing(Psi, 0.0, top) || !sampled_convex(Psi, 0.0, top))
    throw std::invalid_argument("weird caccioppoli: Psi must be convex and non-decreasing");

  double lhs = 0.0, t1 = 0.0, f1 = 0.0, f2 = 0.0, e1 = 0.0, e2 = 0.0;
  for (std::size_t n : c.nodes) {
    const double uj = c.grad(n)[j];
    const double uk = c.grad(n)[k];
    const double phi = Phi.value(uj * uj);
    const double psi = Psi.value(uk * uk);
    const double dpsi = Psi.derivative(uk * uk);
    const double eta2 = sq(c.eta[n]);
    const double ge2 = c.grad_eta2(n);
    double a_uij2 = 0.0, a_sum = 0.0;
    for (int i = 0; i < dim; ++i) {
      a_uij2 += c.a[n][i] * sq(c.hess(n, i, j));
      a_sum += c.a[n][i];
    }
    lhs += c.w * a_uij2 * phi * psi * eta2;
    t1 += c.w * a_sum * uj * uj * phi * psi * ge2;
    f1 += c.w * a_uij2 * uj * uj * phi * phi * std::pow(dpsi, theta) * eta2;
    f2 += c.w * a_sum * std::pow(std::abs(uk), 2.0 * theta) * std::pow(psi, 2.0 - theta) * ge2;
    e1 += c.w * std::abs(c.df[n][k]) * std::pow(std::abs(uk), theta + 1.0) *
          std::pow(std::abs(psi * dpsi), 1.0 - theta / 2.0) * eta2;
    e2 += c.w * std::abs(c.df[n][j]) * std::abs(uj) * phi * psi * eta2;
  }
  InequalityReport rep;
  rep.name = "weird_caccioppoli";
  rep.lhs = lhs;
  rep.add_term("T1", t1);
  rep.add_term("mixed", std::sqrt(f1) * (std::sqrt(f2) + std::sqrt(e1)));
  rep.add_term("E2", e2);
  rep.add_factor("F1", f1);
  rep.add_factor("F2", f2);
  rep.add_factor("E1", e1);
  rep.add_factor("E2", e2);
  rep.params = base_params(spec.grid, inner, outer);
  rep.params["j"] = j;
  rep.params["k"] = k;
  rep.params["theta"] = theta;
  rep.params["phi"] = Phi.name;
  rep.params["psi"] = Psi.name;
  return rep.finalize(budget);
}

InequalityReport check_staircase(const ScalarField& u, const ProblemSpec& spec, int s, int m, int j, int k,
                                 const Ball& inner, const Ball& outer, double budget) {
  const int dim = spec.grid.dim();
  check_axis(j, dim, "staircase");
  check_axis(k, dim, "staircase");
  if (s < 1 || m < s) throw std::invalid_argument("staircase: need 1 <= s <= m");
  const Context c = make_context(u, spec, inner, outer, "staircase");
  const bool homogeneous = homogeneous_regime(spec);
  const double e = 2.0 * s + 2.0 * m;

  double r1j = 0.0, r1k = 0.0, r4 = 0.0;
  for (std::size_t n : c.nodes) {
    const double uj = std::abs(c.grad(n)[j]);
    const double uk = std::abs(c.grad(n)[k]);
    double a_sum = 0.0;
    for (int i = 0; i < dim; ++i) a_sum += c.a[n][i];
    const double ge2 = c.grad_eta2(n);
    r1j += c.w * a_sum * std::pow(uj, e) * ge2;
    r1k += c.w * a_sum * std::pow(uk, e) * ge2;
    r4 += c.w * c.grad_f_norm(n) * (std::pow(uk, e - 1.0) + std::pow(uj, e - 1.0)) * sq(c.eta[n]);
  }
  InequalityReport rep;
  rep.name = "staircase";
  rep.lhs = staircase_integral(c, s - 1, m, j, k);
  const double r3 = staircase_integral(c, 2 * s - 1, m - s, j, k);
  if (homogeneous) {
    rep.add_term("R1", r1j);
    rep.add_term("R2", (m + 1.0) * r1k);
    rep.add_term("R3", r3);
  } else {
    rep.add_term("R3", r3);
    rep.add_term("R1", (m + 1.0) * (r1j + r1k));
    rep.add_term("R4", double(m) * m * r4);
  }
  rep.params = base_params(spec.grid, inner, outer);
  rep.params["s"] = s;
  rep.params["m"] = m;
  rep.params["j"] = j;
  rep.params["k"] = k;
  rep.params["regime"] = homogeneous ? "homogeneous" : "nonhomogeneous";
  return rep.finalize(budget);
}

std::vector<StaircaseStep> staircase_indices(int ell0) {
  if (ell0 < 1 || ell0 > 30) throw std::invalid_argument("staircase: ell0 must lie in [1, 30]");
  const int q = (1 << ell0) - 1;
  std::vector<StaircaseStep> out;
  for (int l = 0; l <= ell0; ++l) out.push_back({1 << l, q + 1 - (1 << l)});
  return out;
}

std::vector<InequalityReport> staircase_chain(const ScalarField& u, const ProblemSpec& spec, int ell0, int j,
                                              int k, const Ball& inner, const Ball& outer, double budget) {
  const auto idx = staircase_indices(ell0);
  std::vector<InequalityReport> out;
  for (int l = 0; l < ell0; ++l) out.push_back(check_staircase(u, spec, idx[l].s, idx[l].m, j, k, inner, outer, budget));
  return out;
}

InequalityReport check_power_caccioppoli(const ScalarField& u, const ProblemSpec& spec, int ell0, int k,
                                         const Ball& inner, const Ball& outer, double budget) {
  const int dim = spec.grid.dim();
  check_axis(k, dim, "power caccioppoli");
  if (ell0 < 1 || ell0 > 30) throw std::invalid_argument("power caccioppoli: q must be 2^ell0 - 1 with ell0 >= 1");
  const double q = std::ldexp(1.0, ell0) - 1.0;
  const double p = spec.p;
  const Context c = make_context(u, spec, inner, outer, "power caccioppoli");
  const bool homogeneous = homogeneous_regime(spec);
  const double dk = spec.deltas[k];

  double lhs = 0.0, ra = 0.0, rb = 0.0, rf = 0.0;
  for (std::size_t n : c.nodes) {
    const double t = c.grad(n)[k];
    const double at = std::abs(t);
    double dv;
    if (homogeneous) {
      dv = (q + p / 2.0) * std::pow(at, q + (p - 2.0) / 2.0);
    } else {
      const double x = at - dk;
      dv = x > 0.0 ? (p / 2.0) * std::pow(x, p / 2.0 - 1.0) * std::pow(at, q) + q * std::pow(x, p / 2.0) * std::pow(at, q - 1.0)
                   : 0.0;
    }
    double hk2 = 0.0;
    for (int i = 0; i < dim; ++i) hk2 += sq(c.hess(n, k, i));
    const double eta2 = sq(c.eta[n]);
    lhs += c.w * dv * dv * hk2 * eta2;

    double a_sum = 0.0, uj_sum = 0.0, uj_sum1 = 0.0;
    for (int i = 0; i < dim; ++i) a_sum += c.a[n][i];
    for (int jj = 0; jj < dim; ++jj) {
      uj_sum += std::pow(std::abs(c.grad(n)[jj]), 2.0 * q + 2.0);
      uj_sum1 += std::pow(std::abs(c.grad(n)[jj]), 2.0 * q + 1.0);
    }
    const double ge2 = c.grad_eta2(n);
    ra += c.w * a_sum * uj_sum * ge2;
    rb += c.w * a_sum * std::pow(at, 2.0 * q + 2.0) * ge2;
    rf += c.w * c.grad_f_norm(n) * (std::pow(at, 2.0 * q + 1.0) + uj_sum1) * eta2;
  }
  const double q5 = std::pow(q, 5.0);
  InequalityReport rep;
  rep.name = "power_caccioppoli";
  rep.lhs = lhs;
  if (homogeneous) {
    rep.add_term("all_axes", q5 * ra);
    rep.add_term("axis_k", q5 * rb);
  } else {
    rep.add_term("gradient", q5 * (ra + rb));
    rep.add_term("data_f", q5 * rf);
  }
  rep.add_factor("q5", q5);
  rep.params = base_params(spec.grid, inner, outer);
  rep.params["ell0"] = ell0;
  rep.params["q"] = q;
  rep.params["k"] = k;
  rep.params["regime"] = homogeneous ? "homogeneous" : "nonhomogeneous";
  return rep.finalize(budget);
}

InequalityReport check_reverse_holder(const ScalarField& u, const ProblemSpec& spec, double q, const Point& center,
                                      double t, double s, double R, double h, double budget) {
  if (!(t > 0.0 && t < s && s <= R && R <= 1.0))
    throw GeometryError("reverse holder: need 0 < t < s <= R <= 1");
  if (!(q >= 0.0)) throw std::invalid_argument("reverse holder: q must be >= 0");
  if (!u.grid.same_layout(spec.grid)) throw std::invalid_argument("reverse holder: grids differ");
  const Grid& g = spec.grid;
  const int dim = g.dim();
  require_margin(g, Ball{center, R}, "reverse holder");
  const double p = spec.p;
  const double two_star = sobolev_exponent(dim);
  const bool homogeneous = homogeneous_regime(spec);
  const double delta = spec.deltas.aggregate();
  const NodalDerivatives du = nodal_derivatives(u);
  NodalDerivatives dfield;
  if (!homogeneous && has_lower_order(spec.lower)) dfield = nodal_derivatives(lower_field(u, spec));
  const double w = g.cell_volume();
  const Ball Bt{center, t}, Bs{center, s}, BR{center, R};

  auto big_u = [&](std::size_t n) {
    double m = 0.0;
    for (int k = 0; k < dim; ++k) m = std::max(m, std::abs(du.jets[n].d[k]));
    return homogeneous ? m : m / (2.0 * delta);
  };

  const double radius_factor = std::pow(q, 5.0) / sq(s - t);
  InequalityReport rep;
  rep.name = "reverse_holder";
  rep.params = {{"spacing", g.min_spacing()}, {"t", t}, {"s", s}, {"R", R}, {"q", q}, {"p", p},
                {"two_star", two_star}, {"two_star_surrogate", dim == 2},
                {"regime", homogeneous ? "homogeneous" : "nonhomogeneous"},
                {"clipping", "node indicator"}};
  if (homogeneous) {
    double inner_int = 0.0, outer_int = 0.0;
    for (std::size_t n = 0; n < g.node_count(); ++n) {
      const Point x = g.position(n);
      if (!BR.contains(x, dim)) continue;
      const double U = big_u(n);
      if (Bt.contains(x, dim)) inner_int += w * std::pow(U, two_star / 2.0 * (2.0 * q + p));
      if (Bs.contains(x, dim)) outer_int += w * (std::pow(U, 2.0 * q + p) + 1.0);
    }
    rep.lhs = std::pow(inner_int, 2.0 / two_star);
    rep.add_term("leading", radius_factor * outer_int);
    rep.add_factor("radius_factor", radius_factor);
    rep.add_factor("outer_integral", outer_int);
  } else {
    if (!(h > two_star / (two_star - 2.0))) throw std::invalid_argument("reverse holder: h too small");
    const double hp = h / (h - 1.0);
    double inner_int = 0.0, outer_int = 0.0, fh = 0.0;
    for (std::size_t n = 0; n < g.node_count(); ++n) {
      const Point x = g.position(n);
      if (!BR.contains(x, dim)) continue;
      const double U = big_u(n);
      if (Bt.contains(x, dim))
        inner_int += w * std::pow(std::max(U - 0.5, 0.0), two_star / 2.0 * p) * std::pow(U, two_star * q);
      if (Bs.contains(x, dim)) outer_int += w * std::pow(U, (2.0 * q + 2.0) * hp);
      if (!dfield.jets.empty()) fh += w * std::pow(std::sqrt(norm2(dfield.jets[n].d, dim)), h);
    }
    const double grad_f = std::pow(fh, 1.0 / h);
    rep.lhs = std::pow(inner_int, 2.0 / two_star);
    const double power = (2.0 * q + p) / ((2.0 * q + 2.0) * hp);
    rep.add_term("leading", radius_factor * (1.0 + grad_f) * std::pow(outer_int + 1.0, power));
    rep.add_factor("radius_factor", radius_factor);
    rep.add_factor("grad_f_Lh", grad_f);
    rep.add_factor("outer_integral", outer_int);
    rep.params["h"] = h;
  }
  return rep.finalize(budget);
}

InequalityReport check_lipschitz_estimate(const ScalarField& U, const ScalarField& f,
                                          const std::optional<GradientField>& grad_f, double p,
                                          const Point& center, double R0, double h, double budget) {
  const Grid& g = U.grid;
  if (!f.grid.same_layout(g)) throw std::invalid_argument("lipschitz estimate: grids differ");
  if (!(p >= 2.0)) throw std::invalid_argument("lipschitz estimate: p must be >= 2");
  if (!(h >= 1.0)) throw std::invalid_argument("lipschitz estimate: h must be >= 1");
  const Ball B{center, R0};
  require_inside(g, B.scaled(2.0), "lipschitz estimate");
  const GradientField dU = gradient(U);
  const GradientField df = grad_f ? *grad_f : gradient(f);
  const double measure = region_measure(g, B);
  if (!(measure > 0.0)) throw GeometryError("lipschitz estimate: empty ball");

  InequalityReport rep;
  rep.name = "lipschitz_estimate";
  rep.lhs = linf_norm(dU, B.scaled(0.5));
  rep.add_term("gradient_average", std::pow(std::pow(lp_norm(dU, p, B), p) / measure, 1.0 / p));
  const double favg = std::pow(std::pow(lp_norm(df, h, B), h) / measure, 1.0 / h);
  rep.add_term("data_f", std::pow(R0 * R0 * favg, 1.0 / (p - 1.0)));
  rep.params = {{"spacing", g.min_spacing()}, {"R0", R0}, {"p", p}, {"h", h},
                {"clipping", "cell-center indicator"}};
  return rep.finalize(budget);
}

UniformSample uniform_sample(const SolveResult& solve, const ProblemSpec& spec, const Point& center, double r0,
                             double R0, double h) {
  if (!(r0 > 0.0 && r0 < R0 && R0 <= 1.0)) throw GeometryError("uniform estimate: need 0 < r0 < R0 <= 1");
  const Grid& g = spec.grid;
  const Ball BR{center, R0};
  require_inside(g, BR, "uniform estimate");
  const GradientField du = gradient(solve.u);
  UniformSample s;
  s.lhs = linf_norm(du, Ball{center, r0});
  s.grad_f = has_lower_order(spec.lower) ? lp_norm(gradient(lower_field(solve.u, spec)), h, BR) : 0.0;
  s.gap = R0 - r0;
  s.grad_u = lp_norm(du, spec.p, BR);
  return s;
}

InequalityReport check_uniform_estimate(const SolveResult& solve, const ProblemSpec& spec, const Point& center,
                                        double r0, double R0, double sigma1, double sigma2, double h, double budget) {
  const UniformSample s = uniform_sample(solve, spec, center, r0, R0, h);
  InequalityReport rep;
  rep.name = "uniform_estimate";
  rep.lhs = s.lhs;
  const double data = (1.0 + std::pow(s.grad_f, sigma2)) / std::pow(s.gap, sigma2);
  const double grad = std::pow(s.grad_u, sigma1) + 1.0;
  rep.add_term("product", data * grad);
  rep.add_factor("data_factor", data);
  rep.add_factor("gradient_factor", grad);
  rep.add_factor("grad_f_Lh", s.grad_f);
  rep.add_factor("grad_u_Lp", s.grad_u);
  rep.params = {{"spacing", spec.grid.min_spacing()}, {"r0", r0}, {"R0", R0}, {"sigma1", sigma1},
                {"sigma2", sigma2}, {"h", h}, {"eps", solve.eps}, {"clipping", "cell-center indicator"}};
  return rep.finalize(budget);
}

SigmaFit fit_uniform_exponents(const std::vector<UniformSample>& samples, double lo, double hi) {
  std::vector<UniformSample> use;
  for (const auto& s : samples)
    if (s.lhs > 0.0 && s.gap > 0.0) use.push_back(s);
  if (use.size() < 2) throw std::invalid_argument("sigma fit: need at least two instances with positive LHS");

  auto evaluate = [&](double s1, double s2, double* log_c) {
    double mean = 0.0;
    std::vector<double> r(use.size());
    for (std::size_t k = 0; k < use.size(); ++k) {
      const auto& x = use[k];
      r[k] = std::log(x.lhs) - std::log((1.0 + std::pow(x.grad_f, s2)) / std::pow(x.gap, s2)) -
             std::log(std::pow(x.grad_u, s1) + 1.0);
      mean += r[k];
    }
    mean /= static_cast<double>(r.size());
    double ss = 0.0;
    for (double v : r) ss += sq(v - mean);
    if (log_c) *log_c = mean;
    return std::sqrt(ss / static_cast<double>(r.size()));
  };

  SigmaFit best;
  best.rms = std::numeric_limits<double>::infinity();
  const int steps = 80;
  for (int a = 0; a <= steps; ++a)
    for (int b = 0; b <= steps; ++b) {
      const double s1 = lo + (hi - lo) * a / steps;
      const double s2 = lo + (hi - lo) * b / steps;
      const double rms = evaluate(s1, s2, nullptr);
      if (rms < best.rms) best = {s1, s2, 0.0, rms};
    }
  // pattern search refinement inside the box
  double step = (hi - lo) / steps;
  while (step > 1e-9) {
    bool moved = false;
    for (auto [d1, d2] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      const double s1 = std::clamp(best.sigma1 + d1 * step, lo, hi);
      const double s2 = std::clamp(best.sigma2 + d2 * step, lo, hi);
      const double rms = evaluate(s1, s2, nullptr);
      if (rms < best.rms) {
        best = {s1, s2, 0.0, rms};
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }
  best.rms = evaluate(best.sigma1, best.sigma2, &best.log_c);
  return best;
}

InequalityReport check_propagation(const ScalarField& u_limit, const ScalarField& U, const DegeneracyVector& deltas,
                                   double slack) {
  const Grid& g = U.grid;
  if (!u_limit.grid.same_layout(g)) throw std::invalid_argument("propagation: grids differ");
  if (deltas.size() != g.dim()) throw std::invalid_argument("propagation: one delta per axis required");
  if (!(slack >= 0.0)) throw std::invalid_argument("propagation: slack must be >= 0");
  const GradientField a = gradient(u_limit);
  const GradientField b = gradient(U);
  InequalityReport rep;
  rep.name = "propagation";
  double worst = 0.0;
  for (int i = 0; i < g.dim(); ++i) {
    double m = 0.0;
    for (std::size_t n = 0; n < g.node_count(); ++n)
      if (g.has_edge(i, n)) m = std::max(m, std::abs(a.components[i][n] - b.components[i][n]));
    const double bound = 2.0 * deltas[i] + slack;
    rep.add_factor("difference_" + std::to_string(i), m);
    rep.add_factor("bound_" + std::to_string(i), bound);
    const double ratio = m == 0.0 ? 0.0 : (bound == 0.0 ? std::numeric_limits<double>::infinity() : m / bound);
    worst = std::max(worst, ratio);
  }
  rep.lhs = worst;
  rep.add_term("unit", 1.0);
  rep.params = {{"spacing", g.min_spacing()}, {"slack", slack}, {"deltas", deltas.values()}};
  return rep.finalize(1.0);
}

}  // namespace ortholip

#include "ortholip/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ortholip {

Grid::Grid(std::vector<std::size_t> nodes_per_axis, std::vector<double> spacing,
           std::vector<double> origin) {
  const std::size_t dim = nodes_per_axis.size();
  if (dim != 2 && dim != 3) throw std::invalid_argument("grid dimension must be 2 or 3");
  if (spacing.size() != dim || origin.size() != dim)
    throw std::invalid_argument("grid spacing/origin length must match the dimension");
  dim_ = static_cast<int>(dim);
  for (std::size_t a = 0; a < dim; ++a) {
    if (nodes_per_axis[a] < 3)
      throw std::invalid_argument("grid needs at least 3 nodes per axis");
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
      throw std::invalid_argument("grid spacing must be positive and finite");
    if (!std::isfinite(origin[a])) throw std::invalid_argument("grid origin must be finite");
    n_[a] = nodes_per_axis[a];
    h_[a] = spacing[a];
    origin_[a] = origin[a];
  }
  stride_[0] = 1;
  stride_[1] = n_[0];
  stride_[2] = n_[0] * n_[1];
  count_ = n_[0] * n_[1] * n_[2];
}

Grid Grid::cube(int dim, std::size_t n, double lo, double hi) {
  const double h = (hi - lo) / static_cast<double>(n - 1);
  return Grid(std::vector<std::size_t>(dim, n), std::vector<double>(dim, h),
              std::vector<double>(dim, lo));
}

double Grid::min_spacing() const {
  double m = h_[0];
  for (int a = 1; a < dim_; ++a) m = std::min(m, h_[a]);
  return m;
}

Index Grid::multi_index(std::size_t node) const {
  Index idx{0, 0, 0};
  idx[0] = node % n_[0];
  idx[1] = (node / n_[0]) % n_[1];
  idx[2] = node / stride_[2];
  return idx;
}

Point Grid::position(const Index& idx) const {
  Point x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = origin_[a] + static_cast<double>(idx[a]) * h_[a];
  return x;
}

Point Grid::position(std::size_t node) const { return position(multi_index(node)); }

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= h_[a];
  return v;
}

bool Grid::on_boundary(std::size_t node) const {
  const Index idx = multi_index(node);
  for (int a = 0; a < dim_; ++a)
    if (idx[a] == 0 || idx[a] + 1 == n_[a]) return true;
  return false;
}

bool Grid::is_inner(std::size_t node, std::size_t layers) const {
  const Index idx = multi_index(node);
  for (int a = 0; a < dim_; ++a)
    if (idx[a] < layers || idx[a] + 1 + layers > n_[a]) return false;
  return true;
}

bool Grid::is_cell_base(std::size_t node) const {
  const Index idx = multi_index(node);
  for (int a = 0; a < dim_; ++a)
    if (idx[a] + 1 >= n_[a]) return false;
  return true;
}

Point Grid::cell_center(std::size_t base) const {
  Point x = position(base);
  for (int a = 0; a < dim_; ++a) x[a] += 0.5 * h_[a];
  return x;
}

double Grid::node_weight(std::size_t node) const {
  const Index idx = multi_index(node);
  double w = cell_volume();
  for (int a = 0; a < dim_; ++a)
    if (idx[a] == 0 || idx[a] + 1 == n_[a]) w *= 0.5;
  return w;
}

double Grid::edge_weight(int axis, std::size_t base) const {
  const Index idx = multi_index(base);
  double w = cell_volume();
  for (int a = 0; a < dim_; ++a) {
    if (a == axis) continue;
    if (idx[a] == 0 || idx[a] + 1 == n_[a]) w *= 0.5;
  }
  return w;
}

bool Grid::same_layout(const Grid& other) const {
  if (dim_ != other.dim_) return false;
  for (int a = 0; a < dim_; ++a)
    if (n_[a] != other.n_[a]) return false;
  return true;
}

bool fits_inside(const Grid& grid, const Ball& ball) {
  if (!(ball.radius > 0.0)) return false;
  for (int a = 0; a < grid.dim(); ++a) {
    const double slack = 1e-12 * (grid.upper(a) - grid.origin(a));
    if (ball.center[a] - ball.radius < grid.origin(a) - slack) return false;
    if (ball.center[a] + ball.radius > grid.upper(a) + slack) return false;
  }
  return true;
}

void require_inside(const Grid& grid, const Ball& ball, const std::string& what) {
  if (!(ball.radius > 0.0)) throw GeometryError(what + ": ball radius must be positive");
  if (!fits_inside(grid, ball)) throw GeometryError(what + ": ball escapes the grid");
}

ScalarField::ScalarField(Grid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.node_count())
    throw std::invalid_argument("field value count does not match the grid");
}

ScalarField ScalarField::sample(const Grid& g, const std::function<double(const Point&)>& fn) {
  ScalarField out(g);
  for (std::size_t n = 0; n < g.node_count(); ++n) out.values[n] = fn(g.position(n));
  return out;
}

ScalarField ScalarField::scaled(double factor) const {
  ScalarField out = *this;
  for (double& v : out.values) v *= factor;
  return out;
}

bool ScalarField::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

GradientField GradientField::scaled(double factor) const {
  GradientField out = *this;
  for (auto& comp : out.components)
    for (double& v : comp) v *= factor;
  return out;
}

GradientField gradient(const ScalarField& u) {
  const Grid& g = u.grid;
  GradientField out;
  out.grid = g;
  for (int a = 0; a < g.dim(); ++a) {
    if (g.nodes(a) < 2) throw std::invalid_argument("gradient: degenerate grid axis");
    auto& comp = out.components[a];
    comp.assign(g.node_count(), 0.0);
    const std::size_t s = g.stride(a);
    const double inv_h = 1.0 / g.spacing(a);
    for (std::size_t n = 0; n < g.node_count(); ++n) {
      if (!g.has_edge(a, n)) continue;
      comp[n] = (u.values[n + s] - u.values[n]) * inv_h;
    }
  }
  return out;
}

namespace {

// Visits the 2^(dim-1) edges along `axis` that bound the cell with base `base`.
template <typename Fn>
void for_cell_edges(const Grid& g, int axis, std::size_t base, Fn&& fn) {
  const int dim = g.dim();
  const int others = dim - 1;
  for (int mask = 0; mask < (1 << others); ++mask) {
    std::size_t n = base;
    int bit = 0;
    for (int a = 0; a < dim; ++a) {
      if (a == axis) continue;
      if (mask & (1 << bit)) n += g.stride(a);
      ++bit;
    }
    fn(n);
  }
}

template <typename Fn>
void for_cells(const Grid& g, const std::optional<Ball>& region, Fn&& fn) {
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    if (!g.is_cell_base(n)) continue;
    if (region && !region->contains(g.cell_center(n), g.dim())) continue;
    fn(n);
  }
}

double cell_mean(const ScalarField& u, std::size_t base) {
  const Grid& g = u.grid;
  double sum = 0.0;
  const int corners = 1 << g.dim();
  for (int mask = 0; mask < corners; ++mask) {
    std::size_t n = base;
    for (int a = 0; a < g.dim(); ++a)
      if (mask & (1 << a)) n += g.stride(a);
    sum += u.values[n];
  }
  return sum / corners;
}

double euclid(const Point& v, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += v[a] * v[a];
  return std::sqrt(s);
}

}  // namespace

Point cell_gradient(const GradientField& g, std::size_t base) {
  const Grid& grid = g.grid;
  Point out{0.0, 0.0, 0.0};
  const double inv = 1.0 / static_cast<double>(1 << (grid.dim() - 1));
  for (int a = 0; a < grid.dim(); ++a) {
    double s = 0.0;
    for_cell_edges(grid, a, base, [&](std::size_t e) { s += g.components[a][e]; });
    out[a] = s * inv;
  }
  return out;
}

Point cell_gradient(const ScalarField& u, std::size_t base) {
  const Grid& grid = u.grid;
  Point out{0.0, 0.0, 0.0};
  const double inv = 1.0 / static_cast<double>(1 << (grid.dim() - 1));
  for (int a = 0; a < grid.dim(); ++a) {
    const std::size_t s = grid.stride(a);
    double acc = 0.0;
    for_cell_edges(grid, a, base, [&](std::size_t e) { acc += u.values[e + s] - u.values[e]; });
    out[a] = acc * inv / grid.spacing(a);
  }
  return out;
}

double region_measure(const Grid& grid, const std::optional<Ball>& region) {
  double m = 0.0;
  const double vol = grid.cell_volume();
  for_cells(grid, region, [&](std::size_t) { m += vol; });
  return m;
}

double lp_norm(const GradientField& g, double p, const std::optional<Ball>& region) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  if (region) require_inside(g.grid, *region, "lp_norm");
  const double vol = g.grid.cell_volume();
  double sum = 0.0;
  for_cells(g.grid, region, [&](std::size_t c) {
    sum += std::pow(euclid(cell_gradient(g, c), g.grid.dim()), p) * vol;
  });
  return std::pow(sum, 1.0 / p);
}

double lp_norm(const ScalarField& u, double p, const std::optional<Ball>& region) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  if (region) require_inside(u.grid, *region, "lp_norm");
  const double vol = u.grid.cell_volume();
  double sum = 0.0;
  for_cells(u.grid, region, [&](std::size_t c) { sum += std::pow(std::abs(cell_mean(u, c)), p) * vol; });
  return std::pow(sum, 1.0 / p);
}

double linf_norm(const GradientField& g, const std::optional<Ball>& region) {
  if (region) require_inside(g.grid, *region, "linf_norm");
  double m = 0.0;
  bool any = false;
  for_cells(g.grid, region, [&](std::size_t c) {
    any = true;
    m = std::max(m, euclid(cell_gradient(g, c), g.grid.dim()));
  });
  if (!any) throw GeometryError("linf_norm: region contains no cell center");
  return m;
}

double linf_norm(const ScalarField& u, const std::optional<Ball>& region) {
  if (region) require_inside(u.grid, *region, "linf_norm");
  double m = 0.0;
  bool any = false;
  for (std::size_t n = 0; n < u.size(); ++n) {
    if (region && !region->contains(u.grid.position(n), u.grid.dim())) continue;
    any = true;
    m = std::max(m, std::abs(u.values[n]));
  }
  if (!any) throw GeometryError("linf_norm: region contains no node");
  return m;
}

double cutoff_profile(double rho, double inner_radius, double outer_radius) {
  if (rho <= inner_radius) return 1.0;
  if (rho >= outer_radius) return 0.0;
  const double sigma = (rho - inner_radius) / (outer_radius - inner_radius);
  return 1.0 - sigma * sigma * (3.0 - 2.0 * sigma);
}

ScalarField cutoff_eta(const Grid& grid, const Ball& inner, const Ball& outer) {
  for (int a = 0; a < grid.dim(); ++a)
    if (inner.center[a] != outer.center[a])
      throw GeometryError("cutoff_eta: balls must be concentric");
  if (!(inner.radius > 0.0) || !(inner.radius < outer.radius))
    throw GeometryError("cutoff_eta: need 0 < inner radius < outer radius");
  return ScalarField::sample(grid, [&](const Point& x) {
    double d2 = 0.0;
    for (int a = 0; a < grid.dim(); ++a) d2 += (x[a] - outer.center[a]) * (x[a] - outer.center[a]);
    return cutoff_profile(std::sqrt(d2), inner.radius, outer.radius);
  });
}

ScalarField mollify(const ScalarField& field, double eps, const std::optional<Ball>& region) {
  if (!(eps > 0.0)) throw std::invalid_argument("mollify: eps must be positive");
  const Grid& g = field.grid;
  const int dim = g.dim();

  struct Tap {
    std::array<long, kMaxDim> off;
    double w;
  };
  std::vector<Tap> taps;
  std::array<long, kMaxDim> reach{0, 0, 0};
  for (int a = 0; a < dim; ++a) reach[a] = static_cast<long>(std::floor(eps / g.spacing(a)));
  for (long k2 = -reach[2]; k2 <= reach[2]; ++k2)
    for (long k1 = -reach[1]; k1 <= reach[1]; ++k1)
      for (long k0 = -reach[0]; k0 <= reach[0]; ++k0) {
        const std::array<long, kMaxDim> off{k0, k1, k2};
        double r2 = 0.0;
        for (int a = 0; a < dim; ++a) {
          const double d = static_cast<double>(off[a]) * g.spacing(a) / eps;
          r2 += d * d;
        }
        if (r2 >= 1.0) continue;
        taps.push_back({off, std::exp(-1.0 / (1.0 - r2))});
      }
  double total = 0.0;
  for (const Tap& t : taps) total += t.w;
  long max_reach = 0;
  for (const Tap& t : taps)
    for (int a = 0; a < dim; ++a) max_reach = std::max(max_reach, std::labs(t.off[a]));

  ScalarField out = field;
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    if (region && !region->contains(g.position(n), dim)) continue;
    const Index idx = g.multi_index(n);
    for (int a = 0; a < dim; ++a) {
      const long i = static_cast<long>(idx[a]);
      if (i - max_reach < 0 || i + max_reach >= static_cast<long>(g.nodes(a)))
        throw GeometryError("mollify: kernel support exceeds the grid margin");
    }
    const double centre = field.values[n];
    double acc = 0.0;
    double lo = centre;
    double hi = centre;
    for (const Tap& t : taps) {
      long m = static_cast<long>(n);
      for (int a = 0; a < dim; ++a) m += t.off[a] * static_cast<long>(g.stride(a));
      const double v = field.values[static_cast<std::size_t>(m)];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      acc += t.w * (v - centre);
    }
    out.values[n] = std::clamp(centre + acc / total, lo, hi);
  }
  return out;
}

NodalDerivatives nodal_derivatives(const ScalarField& u) {
  const Grid& g = u.grid;
  const int dim = g.dim();
  NodalDerivatives out;
  out.grid = g;
  out.jets.assign(g.node_count(), NodalJet{});
  out.valid.assign(g.node_count(), 0);

  std::vector<Point> cg(g.node_count(), Point{0.0, 0.0, 0.0});
  for (std::size_t n = 0; n < g.node_count(); ++n)
    if (g.is_cell_base(n)) cg[n] = cell_gradient(u, n);

  const int cells = 1 << dim;
  const double inv_cells = 1.0 / cells;
  const double inv_pairs = 2.0 / cells;
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    if (!g.is_inner(n, 1)) continue;
    NodalJet jet;
    for (int mask = 0; mask < cells; ++mask) {
      // mask bit a set: the cell lies below the node along axis a
      std::size_t base = n;
      for (int a = 0; a < dim; ++a)
        if (mask & (1 << a)) base -= g.stride(a);
      const Point& G = cg[base];
      for (int i = 0; i < dim; ++i) {
        jet.d[i] += G[i] * inv_cells;
        for (int j = 0; j < dim; ++j) {
          const double sign = (mask & (1 << j)) ? -1.0 : 1.0;
          jet.dd[i][j] += sign * G[i] * inv_pairs / g.spacing(j);
        }
      }
    }
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j) {
        const double m = 0.5 * (jet.dd[i][j] + jet.dd[j][i]);
        jet.dd[i][j] = m;
        jet.dd[j][i] = m;
      }
    out.jets[n] = jet;
    out.valid[n] = 1;
  }
  return out;
}

}  // namespace ortholip

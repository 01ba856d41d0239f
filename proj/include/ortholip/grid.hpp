#pragma once

// Structured-grid geometry, staggered difference calculus, ball-restricted
// quadrature, cut-off functions and mollification.
//
// Layout conventions used throughout the library:
//   * nodes are numbered lexicographically, axis 0 fastest;
//   * the edge "along axis i with base node n" joins n and n + e_i, and holds
//     the forward difference (u[n + e_i] - u[n]) / h_i;
//   * the cell "with base node n" is the box spanned by n and n + (1,...,1);
//   * a point belongs to a ball when its squared distance to the center is
//     strictly smaller than the squared radius (open ball). Cells are clipped
//     to a ball by testing their center, nodes by testing their position.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ortholip {

inline constexpr int kMaxDim = 3;

using Index = std::array<std::size_t, kMaxDim>;
using Point = std::array<double, kMaxDim>;

/// Raised when a region escapes the grid or radii/centers are inconsistent.
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Grid {
 public:
  Grid() = default;
  Grid(std::vector<std::size_t> nodes_per_axis, std::vector<double> spacing,
       std::vector<double> origin);

  /// Uniform grid covering [lo, hi]^dim with n nodes per axis.
  static Grid cube(int dim, std::size_t n, double lo, double hi);

  int dim() const { return dim_; }
  std::size_t nodes(int axis) const { return n_[axis]; }
  double spacing(int axis) const { return h_[axis]; }
  double origin(int axis) const { return origin_[axis]; }
  double upper(int axis) const {
    return origin_[axis] + static_cast<double>(n_[axis] - 1) * h_[axis];
  }
  double min_spacing() const;

  std::size_t node_count() const { return count_; }
  std::size_t stride(int axis) const { return stride_[axis]; }

  std::size_t index(const Index& idx) const {
    return idx[0] + stride_[1] * idx[1] + stride_[2] * idx[2];
  }
  Index multi_index(std::size_t node) const;
  Point position(std::size_t node) const;
  Point position(const Index& idx) const;

  /// Product of spacings: the volume of one cell.
  double cell_volume() const;
  bool on_boundary(std::size_t node) const;
  /// True when every coordinate index lies in [layers, n - 1 - layers].
  bool is_inner(std::size_t node, std::size_t layers) const;
  /// True when the edge along `axis` starting at `node` exists.
  bool has_edge(int axis, std::size_t node) const {
    return multi_index(node)[axis] + 1 < n_[axis];
  }
  /// True when `node` is the lower corner of a cell.
  bool is_cell_base(std::size_t node) const;
  Point cell_center(std::size_t base) const;

  /// Trapezoidal weights: interior nodes carry a full cell volume, each
  /// boundary coordinate halves it. Edges are weighted the same way in the
  /// directions transverse to the edge.
  double node_weight(std::size_t node) const;
  double edge_weight(int axis, std::size_t base) const;

  bool same_layout(const Grid& other) const;
  bool operator==(const Grid& other) const = default;

 private:
  int dim_ = 0;
  std::array<std::size_t, kMaxDim> n_{1, 1, 1};
  std::array<double, kMaxDim> h_{1.0, 1.0, 1.0};
  std::array<double, kMaxDim> origin_{0.0, 0.0, 0.0};
  std::array<std::size_t, kMaxDim> stride_{1, 1, 1};
  std::size_t count_ = 0;
};

struct Ball {
  Point center{0.0, 0.0, 0.0};
  double radius = 0.0;

  bool contains(const Point& x, int dim) const {
    double d2 = 0.0;
    for (int a = 0; a < dim; ++a) d2 += (x[a] - center[a]) * (x[a] - center[a]);
    return d2 < radius * radius;
  }
  Ball scaled(double factor) const { return Ball{center, radius * factor}; }
};

/// Throws GeometryError unless the closed ball lies inside the grid's extent.
void require_inside(const Grid& grid, const Ball& ball, const std::string& what);
bool fits_inside(const Grid& grid, const Ball& ball);

struct ScalarField {
  Grid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(Grid g, double fill = 0.0)
      : grid(std::move(g)), values(grid.node_count(), fill) {}
  ScalarField(Grid g, std::vector<double> v);

  static ScalarField sample(const Grid& g, const std::function<double(const Point&)>& fn);

  double& operator[](std::size_t n) { return values[n]; }
  double operator[](std::size_t n) const { return values[n]; }
  std::size_t size() const { return values.size(); }

  ScalarField scaled(double factor) const;
  bool all_finite() const;
};

/// Staggered forward differences. Component `axis` is stored on a node-sized
/// array indexed by the edge's base node; entries on the last layer along
/// `axis` have no edge and stay zero.
struct GradientField {
  Grid grid;
  std::array<std::vector<double>, kMaxDim> components;

  double at(int axis, std::size_t base) const { return components[axis][base]; }
  GradientField scaled(double factor) const;
};

GradientField gradient(const ScalarField& u);

/// Bilinear/trilinear gradient at a cell center: the mean of the forward
/// differences over the 2^(dim-1) edges of the cell along each axis.
Point cell_gradient(const GradientField& g, std::size_t base);
Point cell_gradient(const ScalarField& u, std::size_t base);

/// Discrete measure of the cells whose centers lie in `region` (whole grid when
/// region is empty).
double region_measure(const Grid& grid, const std::optional<Ball>& region);

/// (sum over cells in region of |value|^p * cell volume)^(1/p). Gradient cells
/// use the Euclidean norm of the cell gradient; scalar cells use the mean of the
/// corner values.
double lp_norm(const GradientField& g, double p, const std::optional<Ball>& region = std::nullopt);
double lp_norm(const ScalarField& u, double p, const std::optional<Ball>& region = std::nullopt);

/// Max over cells (gradient) or nodes (scalar) inside the region.
double linf_norm(const GradientField& g, const std::optional<Ball>& region = std::nullopt);
double linf_norm(const ScalarField& u, const std::optional<Ball>& region = std::nullopt);

/// Bound on |eta'| for the radial cut-off profile: |grad eta| <= C / (s - t).
inline constexpr double kCutoffGradientBound = 1.5;

/// eta(x) = 1 for |x - c| <= t, 0 for |x - c| >= s, and the C^1 cubic ramp
/// 1 - 3 sigma^2 + 2 sigma^3, sigma = (|x - c| - t) / (s - t), in between.
double cutoff_profile(double rho, double inner_radius, double outer_radius);
ScalarField cutoff_eta(const Grid& grid, const Ball& inner, const Ball& outer);

/// Discrete convolution with the normalized bump exp(-1 / (1 - |x/eps|^2)).
/// When `region` is given only nodes inside it are mollified (the rest are
/// copied) and each mollified node must have its whole kernel support in the
/// grid; otherwise every node is mollified and the same requirement applies.
ScalarField mollify(const ScalarField& field, double eps,
                    const std::optional<Ball>& region = std::nullopt);

/// First and second derivatives at a node, built by nested first differences:
/// cell-center gradients first, then differences of those across the 2^dim
/// cells sharing the node. Defined on nodes with every surrounding cell
/// present (index in [1, n-2] on every axis).
struct NodalJet {
  Point d{0.0, 0.0, 0.0};
  std::array<Point, kMaxDim> dd{};
};

struct NodalDerivatives {
  Grid grid;
  std::vector<NodalJet> jets;
  std::vector<char> valid;

  const NodalJet& operator[](std::size_t n) const { return jets[n]; }
};

NodalDerivatives nodal_derivatives(const ScalarField& u);

}  // namespace ortholip

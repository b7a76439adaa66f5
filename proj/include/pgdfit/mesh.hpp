#pragma once

// Tensor-product grids and the nodal div-grad part of the finite integration
// technique: S = G^T M G with G the primal edge incidence and M the diagonal
// edge conductance built from cell materials.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "pgdfit/errors.hpp"
#include "pgdfit/linalg.hpp"

namespace pgdfit {

inline std::vector<double> linspace(double lo, double hi, std::size_t n_points) {
  require(n_points >= 2, "linspace needs at least two points");
  std::vector<double> x(n_points);
  const double n = static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double t = static_cast<double>(i) / n;
    x[i] = (1.0 - t) * lo + t * hi;
  }
  x.back() = hi;
  return x;
}

class TensorGrid {
public:
  struct Edge {
    std::size_t from;  // lower node
    std::size_t to;    // upper node, from + stride(direction)
    std::size_t direction;
    double length;
    double facet_area;  // area of the dual facet pierced by the edge
  };

  TensorGrid() = default;

  explicit TensorGrid(std::vector<std::vector<double>> axes) : axes_(std::move(axes)) {
    if (axes_.empty() || axes_.size() > 3) throw InvalidGrid("grid dimension must be 1, 2 or 3");
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      const auto& x = axes_[a];
      if (x.size() < 2)
        throw InvalidGrid("axis " + std::to_string(a) + " needs at least two points");
      for (std::size_t i = 0; i + 1 < x.size(); ++i)
        if (!(x[i] < x[i + 1]) || !std::isfinite(x[i]) || !std::isfinite(x[i + 1]))
          throw InvalidGrid("axis " + std::to_string(a) + " is not strictly increasing");
    }
    build();
  }

  std::size_t dim() const noexcept { return axes_.size(); }
  const std::vector<std::vector<double>>& axes() const noexcept { return axes_; }
  const std::vector<double>& axis(std::size_t a) const { return axes_.at(a); }
  std::size_t points(std::size_t a) const { return axes_.at(a).size(); }

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  std::size_t n_cells() const noexcept { return n_cells_; }
  std::size_t n_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// Lexicographic node index, x fastest.
  std::size_t node_index(std::array<std::size_t, 3> ijk) const {
    std::size_t idx = 0;
    for (std::size_t a = dim(); a-- > 0;) idx = idx * points(a) + ijk[a];
    return idx;
  }

  std::array<std::size_t, 3> node_ijk(std::size_t node) const {
    std::array<std::size_t, 3> ijk{0, 0, 0};
    for (std::size_t a = 0; a < dim(); ++a) {
      ijk[a] = node % points(a);
      node /= points(a);
    }
    return ijk;
  }

  std::array<double, 3> node_coords(std::size_t node) const {
    const auto ijk = node_ijk(node);
    std::array<double, 3> x{0, 0, 0};
    for (std::size_t a = 0; a < dim(); ++a) x[a] = axes_[a][ijk[a]];
    return x;
  }

  std::size_t cell_index(std::array<std::size_t, 3> ijk) const {
    std::size_t idx = 0;
    for (std::size_t a = dim(); a-- > 0;) idx = idx * (points(a) - 1) + ijk[a];
    return idx;
  }

  std::array<std::size_t, 3> cell_ijk(std::size_t cell) const {
    std::array<std::size_t, 3> ijk{0, 0, 0};
    for (std::size_t a = 0; a < dim(); ++a) {
      ijk[a] = cell % (points(a) - 1);
      cell /= points(a) - 1;
    }
    return ijk;
  }

  std::array<double, 3> cell_center(std::size_t cell) const {
    const auto ijk = cell_ijk(cell);
    std::array<double, 3> x{0, 0, 0};
    for (std::size_t a = 0; a < dim(); ++a)
      x[a] = 0.5 * (axes_[a][ijk[a]] + axes_[a][ijk[a] + 1]);
    return x;
  }

  double cell_volume(std::size_t cell) const {
    const auto ijk = cell_ijk(cell);
    double v = 1.0;
    for (std::size_t a = 0; a < dim(); ++a) v *= axes_[a][ijk[a] + 1] - axes_[a][ijk[a]];
    return v;
  }

  /// Length of the dual edge through node index i of axis a.
  double dual_length(std::size_t a, std::size_t i) const {
    const auto& x = axes_[a];
    double l = 0.0;
    if (i > 0) l += 0.5 * (x[i] - x[i - 1]);
    if (i + 1 < x.size()) l += 0.5 * (x[i + 1] - x[i]);
    return l;
  }

  /// Volume of the dual cell around a node.
  const std::vector<double>& node_volumes() const noexcept { return node_volumes_; }

  bool on_boundary(std::size_t node) const {
    const auto ijk = node_ijk(node);
    for (std::size_t a = 0; a < dim(); ++a)
      if (ijk[a] == 0 || ijk[a] + 1 == points(a)) return true;
    return false;
  }

private:
  void build() {
    n_nodes_ = 1;
    n_cells_ = 1;
    for (const auto& x : axes_) {
      n_nodes_ *= x.size();
      n_cells_ *= x.size() - 1;
    }
    node_volumes_.assign(n_nodes_, 1.0);
    for (std::size_t n = 0; n < n_nodes_; ++n) {
      const auto ijk = node_ijk(n);
      for (std::size_t a = 0; a < dim(); ++a) node_volumes_[n] *= dual_length(a, ijk[a]);
    }
    edges_.clear();
    for (std::size_t d = 0; d < dim(); ++d) {
      std::size_t stride = 1;
      for (std::size_t a = 0; a < d; ++a) stride *= points(a);
      for (std::size_t n = 0; n < n_nodes_; ++n) {
        const auto ijk = node_ijk(n);
        if (ijk[d] + 1 == points(d)) continue;
        double area = 1.0;
        for (std::size_t a = 0; a < dim(); ++a)
          if (a != d) area *= dual_length(a, ijk[a]);
        edges_.push_back({n, n + stride, d, axes_[d][ijk[d] + 1] - axes_[d][ijk[d]], area});
      }
    }
  }

  std::vector<std::vector<double>> axes_;
  std::size_t n_nodes_ = 0;
  std::size_t n_cells_ = 0;
  std::vector<double> node_volumes_;
  std::vector<Edge> edges_;
};

inline TensorGrid build_grid(std::vector<std::vector<double>> axes) {
  return TensorGrid(std::move(axes));
}

/// One material value per cell (S/m or W/(m K)); may be an indicator.
struct CellField {
  std::vector<double> values;

  static CellField constant(const TensorGrid& grid, double value) {
    return {std::vector<double>(grid.n_cells(), value)};
  }
};

inline void check_material(const TensorGrid& grid, const CellField& material) {
  if (material.values.size() != grid.n_cells())
    throw ContractViolation("material length does not match the grid cell count");
  for (double v : material.values)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ContractViolation("material values must be finite and non-negative");
}

/// Dirichlet data on a node subset; every other boundary node is homogeneous Neumann.
class BoundaryCondition {
public:
  BoundaryCondition() = default;

  /// Sets (or overrides) the value at one node.
  void set(std::size_t node, double value) {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), node);
    const auto pos = static_cast<std::size_t>(it - nodes_.begin());
    if (it != nodes_.end() && *it == node) {
      values_[pos] = value;
      return;
    }
    nodes_.insert(it, node);
    values_.insert(values_.begin() + static_cast<std::ptrdiff_t>(pos), value);
  }

  /// Fixes every node whose coordinates fall into the (closed) box.
  /// box[a] = {lo, hi} per grid axis.
  void set_box(const TensorGrid& grid, std::span<const std::array<double, 2>> box, double value) {
    require(box.size() == grid.dim(), "box dimension does not match grid");
    std::size_t hits = 0;
    for (std::size_t n = 0; n < grid.n_nodes(); ++n) {
      const auto x = grid.node_coords(n);
      bool inside = true;
      for (std::size_t a = 0; a < grid.dim(); ++a) {
        const double tol = 1e-12 * (1.0 + std::abs(box[a][0]) + std::abs(box[a][1]));
        inside = inside && x[a] >= box[a][0] - tol && x[a] <= box[a][1] + tol;
      }
      if (inside) {
        set(n, value);
        ++hits;
      }
    }
    if (hits == 0) throw ContractViolation("Dirichlet box contains no grid node");
  }

  /// Fixes one face of the bounding box: side 0 = lower, 1 = upper.
  void set_face(const TensorGrid& grid, std::size_t axis, int side, double value) {
    require(axis < grid.dim(), "face axis out of range");
    for (std::size_t n = 0; n < grid.n_nodes(); ++n) {
      const auto ijk = grid.node_ijk(n);
      const std::size_t target = side == 0 ? 0 : grid.points(axis) - 1;
      if (ijk[axis] == target) set(n, value);
    }
  }

  bool empty() const noexcept { return nodes_.empty(); }
  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<std::size_t>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Full nodal vector carrying the Dirichlet values and zero elsewhere.
  DenseVector dirichlet_vector(std::size_t n_nodes) const {
    DenseVector g(n_nodes, 0.0);
    for (std::size_t k = 0; k < nodes_.size(); ++k) g.at(nodes_[k]) = values_[k];
    return g;
  }

  std::vector<char> mask(std::size_t n_nodes) const {
    std::vector<char> m(n_nodes, 0);
    for (std::size_t n : nodes_) m.at(n) = 1;
    return m;
  }

private:
  std::vector<std::size_t> nodes_;
  std::vector<double> values_;
};

enum class Averaging { arithmetic, harmonic };

namespace detail {

/// Calls f(cell, weight) for each cell touching the edge, weight being the
/// part of the dual facet that lies inside that cell.
template <class F>
void for_each_edge_cell(const TensorGrid& grid, const TensorGrid::Edge& e, F&& f) {
  const auto base = grid.node_ijk(e.from);
  std::array<std::size_t, 2> transverse{};
  std::size_t n_t = 0;
  for (std::size_t a = 0; a < grid.dim(); ++a)
    if (a != e.direction) transverse[n_t++] = a;
  const std::size_t combos = std::size_t{1} << n_t;
  for (std::size_t c = 0; c < combos; ++c) {
    auto ijk = base;
    double weight = 1.0;
    bool valid = true;
    for (std::size_t t = 0; t < n_t; ++t) {
      const std::size_t a = transverse[t];
      const auto& x = grid.axis(a);
      if ((c >> t) & 1u) {
        if (base[a] + 1 >= x.size()) valid = false;
        else weight *= 0.5 * (x[base[a] + 1] - x[base[a]]);
      } else {
        if (base[a] == 0) valid = false;
        else {
          weight *= 0.5 * (x[base[a]] - x[base[a] - 1]);
          ijk[a] = base[a] - 1;
        }
      }
    }
    if (valid) f(grid.cell_index(ijk), weight);
  }
}

}  // namespace detail

/// Material averaged onto each primal edge over the cells sharing its dual facet.
inline std::vector<double> edge_material(const TensorGrid& grid, const CellField& material,
                                         Averaging averaging = Averaging::arithmetic) {
  check_material(grid, material);
  std::vector<double> out(grid.n_edges(), 0.0);
  for (std::size_t k = 0; k < grid.n_edges(); ++k) {
    double num = 0.0, den = 0.0;
    bool zero_cell = false;
    detail::for_each_edge_cell(grid, grid.edges()[k], [&](std::size_t cell, double w) {
      const double m = material.values[cell];
      den += w;
      if (averaging == Averaging::arithmetic) num += w * m;
      else if (m == 0.0) zero_cell = true;
      else num += w / m;
    });
    if (averaging == Averaging::arithmetic) out[k] = num / den;
    else out[k] = zero_cell ? 0.0 : den / num;
  }
  return out;
}

/// Diagonal FIT material matrix: averaged material * facet area / edge length.
inline std::vector<double> edge_conductance(const TensorGrid& grid, const CellField& material,
                                            Averaging averaging = Averaging::arithmetic) {
  auto g = edge_material(grid, material, averaging);
  for (std::size_t k = 0; k < g.size(); ++k)
    g[k] *= grid.edges()[k].facet_area / grid.edges()[k].length;
  return g;
}

/// y = G^T diag(g) G x on the full node set.
inline DenseVector apply_stiffness(const TensorGrid& grid, std::span<const double> conductance,
                                   std::span<const double> x) {
  require(conductance.size() == grid.n_edges(), "conductance length mismatch");
  require(x.size() == grid.n_nodes(), "nodal vector length mismatch");
  DenseVector y(grid.n_nodes(), 0.0);
  const auto& edges = grid.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const double flux = conductance[k] * (x[edges[k].to] - x[edges[k].from]);
    y[edges[k].from] -= flux;
    y[edges[k].to] += flux;
  }
  return y;
}

/// u^T G^T diag(g) G v
inline double stiffness_energy(const TensorGrid& grid, std::span<const double> conductance,
                               std::span<const double> u, std::span<const double> v) {
  require(conductance.size() == grid.n_edges(), "conductance length mismatch");
  require(u.size() == grid.n_nodes() && v.size() == grid.n_nodes(), "nodal vector length mismatch");
  double s = 0.0;
  const auto& edges = grid.edges();
  for (std::size_t k = 0; k < edges.size(); ++k)
    s += conductance[k] * ((u[edges[k].to] - u[edges[k].from]) * (v[edges[k].to] - v[edges[k].from]));
  return s;
}

/// Full (unreduced) nodal stiffness matrix.
inline SparseMatrix full_stiffness(const TensorGrid& grid, std::span<const double> conductance) {
  require(conductance.size() == grid.n_edges(), "conductance length mismatch");
  std::vector<Triplet> t;
  t.reserve(4 * grid.n_edges());
  for (std::size_t k = 0; k < grid.n_edges(); ++k) {
    const auto& e = grid.edges()[k];
    const double g = conductance[k];
    t.push_back({e.from, e.from, g});
    t.push_back({e.to, e.to, g});
    t.push_back({e.from, e.to, -g});
    t.push_back({e.to, e.from, -g});
  }
  return SparseMatrix::from_triplets(grid.n_nodes(), grid.n_nodes(), std::move(t));
}

/// Stiffness restricted to the free nodes after Dirichlet elimination.
struct ReducedSystem {
  SparseMatrix matrix;
  /// -K_fd g: the Dirichlet contribution moved to the right-hand side.
  DenseVector lifting;
  std::vector<std::size_t> free_nodes;
  /// node -> position in free_nodes, or npos for Dirichlet nodes.
  std::vector<std::size_t> free_index;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  DenseVector restrict(std::span<const double> full) const {
    DenseVector r(free_nodes.size());
    for (std::size_t i = 0; i < free_nodes.size(); ++i) r[i] = full[free_nodes[i]];
    return r;
  }

  /// Scatters a reduced solution into a full vector with the given Dirichlet values.
  DenseVector expand(std::span<const double> reduced, std::span<const double> dirichlet) const {
    DenseVector full(dirichlet.begin(), dirichlet.end());
    for (std::size_t i = 0; i < free_nodes.size(); ++i) full[free_nodes[i]] = reduced[i];
    return full;
  }
};

/// Throws SingularSystem if some free node cannot reach a Dirichlet node
/// through edges of positive conductance.
inline void check_connectivity(const TensorGrid& grid, std::span<const double> conductance,
                               const BoundaryCondition& bc) {
  std::vector<std::size_t> parent(grid.n_nodes());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t k = 0; k < grid.n_edges(); ++k)
    if (conductance[k] > 0.0) {
      const auto a = find(grid.edges()[k].from), b = find(grid.edges()[k].to);
      if (a != b) parent[a] = b;
    }
  std::vector<char> grounded(grid.n_nodes(), 0);
  for (std::size_t n : bc.nodes()) grounded[find(n)] = 1;
  for (std::size_t n = 0; n < grid.n_nodes(); ++n)
    if (!grounded[find(n)])
      throw SingularSystem("node " + std::to_string(n) +
                           " lies in a component without Dirichlet data");
}

/// Builds the reduced system from precomputed edge conductances.
inline ReducedSystem assemble_reduced(const TensorGrid& grid, std::span<const double> conductance,
                                      const BoundaryCondition& bc) {
  if (bc.empty()) throw SingularSystem("no Dirichlet node: reduced system would be singular");
  check_connectivity(grid, conductance, bc);
  ReducedSystem sys;
  const auto mask = bc.mask(grid.n_nodes());
  sys.free_index.assign(grid.n_nodes(), ReducedSystem::npos);
  for (std::size_t n = 0; n < grid.n_nodes(); ++n)
    if (!mask[n]) {
      sys.free_index[n] = sys.free_nodes.size();
      sys.free_nodes.push_back(n);
    }
  const DenseVector g = bc.dirichlet_vector(grid.n_nodes());
  sys.lifting.assign(sys.free_nodes.size(), 0.0);
  std::vector<Triplet> t;
  t.reserve(4 * grid.n_edges());
  for (std::size_t k = 0; k < grid.n_edges(); ++k) {
    const auto& e = grid.edges()[k];
    const double c = conductance[k];
    const std::size_t a = sys.free_index[e.from], b = sys.free_index[e.to];
    if (a != ReducedSystem::npos) t.push_back({a, a, c});
    if (b != ReducedSystem::npos) t.push_back({b, b, c});
    if (a != ReducedSystem::npos && b != ReducedSystem::npos) {
      t.push_back({a, b, -c});
      t.push_back({b, a, -c});
    } else if (a != ReducedSystem::npos) {
      sys.lifting[a] += c * g[e.to];
    } else if (b != ReducedSystem::npos) {
      sys.lifting[b] += c * g[e.from];
    }
  }
  const std::size_t n = sys.free_nodes.size();
  sys.matrix = SparseMatrix::from_triplets(n, n, std::move(t));
  return sys;
}

inline ReducedSystem assemble_stiffness(const TensorGrid& grid, const CellField& material,
                                        const BoundaryCondition& bc,
                                        Averaging averaging = Averaging::arithmetic) {
  const auto g = edge_conductance(grid, material, averaging);
  return assemble_reduced(grid, g, bc);
}

/// Nodal Joule-loss load sigma grad(u_i) . grad(u_j): the power of each edge
/// is split evenly between its two end nodes, so the entries sum to the total power.
inline DenseVector joule_rhs(const TensorGrid& grid, const CellField& material,
                             std::span<const double> u_i, std::span<const double> u_j,
                             Averaging averaging = Averaging::arithmetic) {
  require(u_i.size() == grid.n_nodes() && u_j.size() == grid.n_nodes(),
          "joule_rhs: nodal vector length mismatch");
  const auto g = edge_conductance(grid, material, averaging);
  DenseVector rhs(grid.n_nodes(), 0.0);
  const auto& edges = grid.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const double di = u_i[edges[k].to] - u_i[edges[k].from];
    const double dj = u_j[edges[k].to] - u_j[edges[k].from];
    const double half = 0.5 * (g[k] * (di * dj));
    rhs[edges[k].from] += half;
    rhs[edges[k].to] += half;
  }
  return rhs;
}

/// Solves the plain (non-parametric) problem -div(material grad u) = source
/// with Dirichlet data; returns the full nodal vector.
inline DenseVector solve_field(const TensorGrid& grid, const CellField& material,
                               const BoundaryCondition& bc, std::span<const double> source = {},
                               Averaging averaging = Averaging::arithmetic) {
  const auto sys = assemble_stiffness(grid, material, bc, averaging);
  DenseVector rhs = sys.lifting;
  if (!source.empty()) {
    require(source.size() == grid.n_nodes(), "source length mismatch");
    for (std::size_t i = 0; i < sys.free_nodes.size(); ++i) rhs[i] += source[sys.free_nodes[i]];
  }
  const auto x = direct_solve(sys.matrix, rhs);
  return sys.expand(x, bc.dirichlet_vector(grid.n_nodes()));
}

}  // namespace pgdfit

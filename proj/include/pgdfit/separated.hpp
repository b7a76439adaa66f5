#pragma once

// Sums of rank-one space x parameter products: material coefficients,
// right-hand sides and PGD solutions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pgdfit/errors.hpp"
#include "pgdfit/linalg.hpp"
#include "pgdfit/mesh.hpp"

namespace pgdfit {

/// A parameter interval discretized by collocation points with trapezoidal weights.
class ParameterAxis {
public:
  ParameterAxis() = default;

  ParameterAxis(std::string name, std::vector<double> points)
      : name_(std::move(name)), points_(std::move(points)) {
    if (points_.size() < 2) throw InvalidParameter("parameter axis needs at least two points");
    for (std::size_t i = 0; i + 1 < points_.size(); ++i)
      if (!(points_[i] < points_[i + 1]))
        throw InvalidParameter("parameter axis points must be strictly increasing");
    weights_.assign(points_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
      const double h = 0.5 * (points_[i + 1] - points_[i]);
      weights_[i] += h;
      weights_[i + 1] += h;
    }
  }

  static ParameterAxis uniform(std::string name, double lo, double hi, std::size_t n_points) {
    if (!(lo < hi)) throw InvalidParameter("parameter interval must satisfy lo < hi");
    return ParameterAxis(std::move(name), linspace(lo, hi, n_points));
  }

  const std::string& name() const noexcept { return name_; }
  double lo() const { return points_.front(); }
  double hi() const { return points_.back(); }
  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<double>& points() const noexcept { return points_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// Piecewise-linear interpolation of nodal values; exact at the points.
  double interpolate(std::span<const double> values, double mu) const {
    require(values.size() == points_.size(), "interpolate: length mismatch");
    if (!(mu >= lo() && mu <= hi()))
      throw OutOfRange("parameter " + name_ + " = " + std::to_string(mu) + " outside [" +
                       std::to_string(lo()) + ", " + std::to_string(hi()) + "]");
    auto it = std::lower_bound(points_.begin(), points_.end(), mu);
    const auto j = static_cast<std::size_t>(it - points_.begin());
    if (*it == mu) return values[j];
    const double t = (mu - points_[j - 1]) / (points_[j] - points_[j - 1]);
    return (1.0 - t) * values[j - 1] + t * values[j];
  }

private:
  std::string name_;
  std::vector<double> points_;
  std::vector<double> weights_;
};

/// sum_j w_j c_j a_j b_j; symmetric in (a, b) bit for bit.
inline double weighted_inner(const ParameterAxis& axis, std::span<const double> coeff,
                             std::span<const double> a, std::span<const double> b) {
  const auto& w = axis.weights();
  if (coeff.size() != w.size() || a.size() != w.size() || b.size() != w.size())
    throw ContractViolation("weighted_inner: length mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * coeff[j] * (a[j] * b[j]);
  return s;
}

/// Weighted L2 norm on a parameter axis.
inline double weighted_norm(const ParameterAxis& axis, std::span<const double> a) {
  const auto& w = axis.weights();
  require(a.size() == w.size(), "weighted_norm: length mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * (a[j] * a[j]);
  return std::sqrt(s);
}

/// Discrete L2 norm of a nodal vector, weighted by dual-cell volumes.
inline double spatial_norm(std::span<const double> node_volumes, std::span<const double> x) {
  require(node_volumes.size() == x.size(), "spatial_norm: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += node_volumes[i] * (x[i] * x[i]);
  return std::sqrt(s);
}

/// One rank-one term: a nodal spatial vector times one factor per parameter axis.
struct Mode {
  DenseVector spatial;
  std::vector<DenseVector> factors;
};

struct NormalizedMode {
  Mode mode;
  double magnitude;
};

/// Rescales every parametric factor to unit weighted norm and moves the
/// scales into the spatial factor. The magnitude is the product of all
/// factor norms (spatial in discrete L2).
inline NormalizedMode normalize_mode(Mode mode, std::span<const ParameterAxis> axes,
                                     std::span<const double> node_volumes) {
  require(mode.factors.size() == axes.size(), "normalize_mode: factor count != axis count");
  if (!all_finite(mode.spatial)) throw ContractViolation("normalize_mode: non-finite spatial factor");
  double scale = 1.0;
  for (std::size_t p = 0; p < axes.size(); ++p) {
    if (!all_finite(mode.factors[p]))
      throw ContractViolation("normalize_mode: non-finite parametric factor");
    const double n = weighted_norm(axes[p], mode.factors[p]);
    if (n == 0.0) throw ZeroMode("parametric factor " + std::to_string(p) + " has zero norm");
    for (double& v : mode.factors[p]) v /= n;
    scale *= n;
  }
  for (double& v : mode.spatial) v *= scale;
  const double magnitude = spatial_norm(node_volumes, mode.spatial);
  return {std::move(mode), magnitude};
}

/// Parametric solution lift + sum_s spatial_s * prod_p factor_{s,p}(mu_p).
class SeparatedSolution {
public:
  SeparatedSolution() = default;
  SeparatedSolution(std::vector<ParameterAxis> axes, DenseVector lift)
      : axes_(std::move(axes)), lift_(std::move(lift)) {}

  const std::vector<ParameterAxis>& axes() const noexcept { return axes_; }
  const DenseVector& lift() const noexcept { return lift_; }
  const std::vector<Mode>& modes() const noexcept { return modes_; }
  std::size_t size() const noexcept { return modes_.size(); }
  std::size_t n_nodes() const noexcept { return lift_.size(); }

  void add_mode(Mode mode) {
    require(mode.spatial.size() == lift_.size(), "add_mode: spatial length mismatch");
    require(mode.factors.size() == axes_.size(), "add_mode: factor count mismatch");
    for (std::size_t p = 0; p < axes_.size(); ++p)
      require(mode.factors[p].size() == axes_[p].size(), "add_mode: factor length mismatch");
    modes_.push_back(std::move(mode));
  }

  /// Reconstruction at a parameter tuple using only the first n_modes modes.
  DenseVector evaluate(std::span<const double> mu, std::size_t n_modes) const {
    if (mu.size() != axes_.size())
      throw ContractViolation("evaluate: expected " + std::to_string(axes_.size()) +
                              " parameter values");
    for (std::size_t p = 0; p < axes_.size(); ++p)
      if (!(mu[p] >= axes_[p].lo() && mu[p] <= axes_[p].hi()))
        throw OutOfRange("parameter " + axes_[p].name() + " = " + std::to_string(mu[p]) + " outside [" +
                         std::to_string(axes_[p].lo()) + ", " + std::to_string(axes_[p].hi()) + "]");
    n_modes = std::min(n_modes, modes_.size());
    DenseVector out = lift_;
    for (std::size_t s = 0; s < n_modes; ++s) {
      double c = 1.0;
      for (std::size_t p = 0; p < axes_.size(); ++p)
        c *= axes_[p].interpolate(modes_[s].factors[p], mu[p]);
      axpy(c, modes_[s].spatial, out);
    }
    return out;
  }

  DenseVector evaluate(std::span<const double> mu) const { return evaluate(mu, modes_.size()); }

  /// Reconstruction at a collocation multi-index (no interpolation).
  DenseVector evaluate_at(std::span<const std::size_t> index, std::size_t n_modes) const {
    require(index.size() == axes_.size(), "evaluate_at: index dimension mismatch");
    n_modes = std::min(n_modes, modes_.size());
    DenseVector out = lift_;
    for (std::size_t s = 0; s < n_modes; ++s) {
      double c = 1.0;
      for (std::size_t p = 0; p < axes_.size(); ++p) c *= modes_[s].factors[p].at(index[p]);
      axpy(c, modes_[s].spatial, out);
    }
    return out;
  }

private:
  std::vector<ParameterAxis> axes_;
  DenseVector lift_;
  std::vector<Mode> modes_;
};

/// sum_q spatial_q(x) * prod_p factor_{q,p}(mu_p) with a cellwise spatial part.
struct SeparatedCoefficient {
  struct Term {
    CellField spatial;
    std::vector<DenseVector> factors;
  };
  std::vector<Term> terms;

  std::size_t size() const noexcept { return terms.size(); }

  /// Plain cell field at a collocation multi-index.
  CellField evaluate_at(std::span<const std::size_t> index) const {
    require(!terms.empty(), "coefficient has no terms");
    CellField out{std::vector<double>(terms.front().spatial.values.size(), 0.0)};
    for (const auto& t : terms) {
      double c = 1.0;
      for (std::size_t p = 0; p < t.factors.size(); ++p) c *= t.factors[p].at(index[p]);
      axpy(c, t.spatial.values, out.values);
    }
    return out;
  }
};

/// Calls f(index) for every multi-index of the tensor collocation grid,
/// first axis fastest.
template <class F>
void for_each_collocation(std::span<const ParameterAxis> axes, F&& f) {
  std::vector<std::size_t> index(axes.size(), 0);
  for (;;) {
    f(std::span<const std::size_t>(index));
    std::size_t p = 0;
    for (; p < axes.size(); ++p) {
      if (++index[p] < axes[p].size()) break;
      index[p] = 0;
    }
    if (p == axes.size()) return;
  }
}

/// Throws unless factor lengths match the axes and the reconstructed
/// coefficient is positive in every cell for every collocation tuple.
inline void check_coefficient(const TensorGrid& grid, const SeparatedCoefficient& coeff,
                              std::span<const ParameterAxis> axes) {
  if (coeff.terms.empty()) throw ContractViolation("coefficient needs at least one term");
  for (const auto& t : coeff.terms) {
    check_material(grid, t.spatial);
    if (t.factors.size() != axes.size())
      throw ContractViolation("coefficient term factor count != axis count");
    for (std::size_t p = 0; p < axes.size(); ++p)
      if (t.factors[p].size() != axes[p].size())
        throw ContractViolation("coefficient factor length != axis size");
  }
  for_each_collocation(axes, [&](std::span<const std::size_t> index) {
    const auto field = coeff.evaluate_at(index);
    for (double v : field.values)
      if (!(v > 0.0))
        throw DegenerateCoefficient("coefficient is not positive on the full parameter grid");
  });
}

/// sum_r spatial_r (nodal load) * prod_p factor_{r,p}(mu_p).
struct SeparatedRhs {
  std::vector<Mode> terms;

  bool empty() const noexcept { return terms.empty(); }
  std::size_t size() const noexcept { return terms.size(); }

  DenseVector evaluate_at(std::span<const std::size_t> index, std::size_t n_nodes) const {
    DenseVector out(n_nodes, 0.0);
    for (const auto& t : terms) {
      double c = 1.0;
      for (std::size_t p = 0; p < t.factors.size(); ++p) c *= t.factors[p].at(index[p]);
      axpy(c, t.spatial, out);
    }
    return out;
  }
};

inline std::vector<double> collocation_values(std::span<const ParameterAxis> axes,
                                              std::span<const std::size_t> index) {
  std::vector<double> mu(axes.size());
  for (std::size_t p = 0; p < axes.size(); ++p) mu[p] = axes[p].points()[index[p]];
  return mu;
}

}  // namespace pgdfit

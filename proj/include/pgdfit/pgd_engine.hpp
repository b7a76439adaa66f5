#pragma once

// Greedy PGD enrichment with an alternating-direction fixed point.
//
// The unknown is u = lift + sum_s X_s (x) Y_{s,1} (x) ... (x) Y_{s,P}, with X_s a
// nodal vector (zero at Dirichlet nodes) and Y_{s,p} collocation values on
// parameter axis p. The operator is sum_q K_q (x) diag(w_p c_{q,p}) over the
// coefficient terms q; the load is sum_r f_r (x) diag(w_p) h_{r,p}.
//
// The spatial operators K_q live behind the SpatialSolver concept so an
// external field solver can be plugged in; it must report the spatial
// inner products X_i^T K_q X_j that the parametric steps consume.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pgdfit/errors.hpp"
#include "pgdfit/linalg.hpp"
#include "pgdfit/separated.hpp"

namespace pgdfit {

template <class S>
concept SpatialSolver = requires(S& s, const S& cs, std::span<const double> w,
                                 std::span<const double> v, std::size_t q) {
  /// number of spatial operators K_q
  { cs.num_terms() } -> std::convertible_to<std::size_t>;
  { cs.num_nodes() } -> std::convertible_to<std::size_t>;
  /// solves (sum_q w_q K_q) x = rhs on the free nodes; rhs and the result are
  /// full nodal vectors, the result is zero at Dirichlet nodes
  { s.solve(w, v) } -> std::same_as<DenseVector>;
  /// K_q v on the full node set
  { cs.apply(q, v) } -> std::same_as<DenseVector>;
  { cs.node_volumes() } -> std::convertible_to<std::span<const double>>;
};

struct PgdConfig {
  double tol_fp = 1e-7;
  double tol_pgd = 1e-2;
  std::size_t max_modes = 50;
  std::size_t max_fp_iters = 100;
  /// Modes whose magnitude falls below this fraction of the reference scale
  /// (first mode or lift) are treated as null.
  double zero_mode_tol = 1e-12;
  /// Order of the parameter axes within one sweep; empty = declaration order.
  /// The spatial direction is always solved first.
  std::vector<std::size_t> parameter_order;

  void validate(std::size_t n_axes) const {
    if (!(tol_fp > 0.0 && tol_fp < 1.0)) throw InvalidParameter("tol_fp must lie in (0, 1)");
    if (!(tol_pgd > 0.0)) throw InvalidParameter("tol_pgd must be positive");
    if (max_modes < 1) throw InvalidParameter("max_modes must be at least 1");
    if (max_fp_iters < 1) throw InvalidParameter("max_fp_iters must be at least 1");
    if (!parameter_order.empty()) {
      if (parameter_order.size() != n_axes)
        throw InvalidParameter("parameter_order must list every axis once");
      std::vector<char> seen(n_axes, 0);
      for (std::size_t p : parameter_order) {
        if (p >= n_axes || seen[p]) throw InvalidParameter("parameter_order is not a permutation");
        seen[p] = 1;
      }
    }
  }
};

struct ModeReport {
  /// Delta^(k) = prod_p ||u_p^k - u_p^(k-1)|| per fixed-point iteration
  std::vector<double> deltas;
  /// Delta^(k) / ||u^(m,k)||
  std::vector<double> relative_deltas;
  double magnitude = 0.0;
  std::size_t fp_iterations = 0;
  std::size_t spatial_calls = 0;
  bool converged = false;
  /// false for the null mode that ended the enrichment
  bool accepted = false;
};

enum class Termination { tolerance, max_modes, zero_mode, empty_problem };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::tolerance: return "tolerance";
    case Termination::max_modes: return "max_modes";
    case Termination::zero_mode: return "zero_mode";
    case Termination::empty_problem: return "empty_problem";
  }
  return "?";
}

struct PgdReport {
  std::vector<ModeReport> modes;
  std::size_t total_spatial_calls = 0;
  Termination termination = Termination::empty_problem;

  std::size_t accepted_modes() const {
    std::size_t n = 0;
    for (const auto& m : modes) n += m.accepted ? 1 : 0;
    return n;
  }
};

/// Parametric data of a separated linear problem. The spatial operators are
/// owned by the SpatialSolver; coeff_factors[q][p] pairs with its K_q.
struct PgdProblem {
  std::vector<ParameterAxis> axes;
  std::vector<std::vector<DenseVector>> coeff_factors;
  SeparatedRhs rhs;
  DenseVector lift;
};

struct PgdResult {
  SeparatedSolution solution;
  PgdReport report;
};

/// Scalar weights of the current mode m against itself, the frozen modes, the
/// lift and the load terms, per coefficient term q and direction.
class AlphaTable {
public:
  AlphaTable(std::size_t n_terms, std::size_t n_axes, std::size_t n_frozen, std::size_t n_rhs)
      : self_(n_terms, DenseVector(n_axes, 0.0)),
        lift_(n_terms, DenseVector(n_axes, 0.0)),
        frozen_(n_terms, std::vector<DenseVector>(n_axes, DenseVector(n_frozen, 0.0))),
        rhs_(n_rhs, DenseVector(n_axes, 0.0)),
        spatial_self_(n_terms, 0.0),
        spatial_lift_(n_terms, 0.0),
        spatial_frozen_(n_terms, DenseVector(n_frozen, 0.0)),
        spatial_rhs_(n_rhs, 0.0) {}

  std::size_t n_terms() const noexcept { return self_.size(); }
  std::size_t n_axes() const noexcept { return self_.empty() ? 0 : self_.front().size(); }
  std::size_t n_frozen() const noexcept {
    return frozen_.empty() || frozen_.front().empty() ? 0 : frozen_.front().front().size();
  }
  std::size_t n_rhs() const noexcept { return rhs_.size(); }

  /// alpha_{q,p}^{m,m}
  double self(std::size_t q, std::size_t p) const { return self_[q][p]; }
  /// alpha_{q,p}^{m,s}
  double frozen(std::size_t q, std::size_t p, std::size_t s) const { return frozen_[q][p][s]; }
  /// alpha_{q,p}^{m,lift}; the lift's factors are identically one
  double lift(std::size_t q, std::size_t p) const { return lift_[q][p]; }
  /// (Y_{m,p})^T W h_{r,p}
  double rhs(std::size_t r, std::size_t p) const { return rhs_[r][p]; }

  double spatial_self(std::size_t q) const { return spatial_self_[q]; }
  double spatial_frozen(std::size_t q, std::size_t s) const { return spatial_frozen_[q][s]; }
  double spatial_lift(std::size_t q) const { return spatial_lift_[q]; }
  double spatial_rhs(std::size_t r) const { return spatial_rhs_[r]; }

  /// Product over parameter directions of f(p), skipping `skip`.
  template <class F>
  static double product(std::size_t n_axes, std::size_t skip, F&& f) {
    double c = 1.0;
    for (std::size_t p = 0; p < n_axes; ++p)
      if (p != skip) c *= f(p);
    return c;
  }

private:
  template <class Solver>
  friend void update_spatial_alpha(AlphaTable&, const Solver&, std::span<const double>,
                                   const std::vector<std::vector<DenseVector>>&,
                                   const std::vector<DenseVector>&, const SeparatedRhs&);
  friend void update_alpha(AlphaTable&, const PgdProblem&, const std::vector<Mode>&, std::size_t,
                           std::span<const double>);

  std::vector<DenseVector> self_, lift_;
  std::vector<std::vector<DenseVector>> frozen_;
  std::vector<DenseVector> rhs_;
  DenseVector spatial_self_, spatial_lift_;
  std::vector<DenseVector> spatial_frozen_;
  DenseVector spatial_rhs_;
};

/// Recomputes the entries of direction p for a new factor of the current mode.
inline void update_alpha(AlphaTable& table, const PgdProblem& problem,
                         const std::vector<Mode>& frozen_modes, std::size_t p,
                         std::span<const double> factor) {
  const auto& axis = problem.axes.at(p);
  require(factor.size() == axis.size(), "update_alpha: factor length != axis size");
  const DenseVector ones(axis.size(), 1.0);
  for (std::size_t q = 0; q < problem.coeff_factors.size(); ++q) {
    const auto& c = problem.coeff_factors[q][p];
    table.self_[q][p] = weighted_inner(axis, c, factor, factor);
    table.lift_[q][p] = weighted_inner(axis, c, factor, ones);
    for (std::size_t s = 0; s < frozen_modes.size(); ++s)
      table.frozen_[q][p][s] = weighted_inner(axis, c, factor, frozen_modes[s].factors[p]);
  }
  for (std::size_t r = 0; r < problem.rhs.terms.size(); ++r)
    table.rhs_[r][p] = weighted_inner(axis, ones, factor, problem.rhs.terms[r].factors[p]);
}

/// Spatial inner products X^T K_q X, X^T K_q X_s, X^T K_q lift and X^T f_r.
/// `applied_frozen[q][s]` = K_q X_s and `applied_lift[q]` = K_q lift.
template <class Solver>
void update_spatial_alpha(AlphaTable& table, const Solver& solver, std::span<const double> spatial,
                          const std::vector<std::vector<DenseVector>>& applied_frozen,
                          const std::vector<DenseVector>& applied_lift, const SeparatedRhs& rhs) {
  for (std::size_t q = 0; q < table.n_terms(); ++q) {
    table.spatial_self_[q] = dot(spatial, solver.apply(q, spatial));
    table.spatial_lift_[q] = dot(spatial, applied_lift[q]);
    for (std::size_t s = 0; s < applied_frozen[q].size(); ++s)
      table.spatial_frozen_[q][s] = dot(spatial, applied_frozen[q][s]);
  }
  for (std::size_t r = 0; r < rhs.terms.size(); ++r)
    table.spatial_rhs_[r] = dot(spatial, rhs.terms[r].spatial);
}

/// Frozen state shared by all fixed-point iterations of one mode.
struct EnrichmentContext {
  const PgdProblem* problem = nullptr;
  std::vector<Mode> frozen;
  /// [q][s] = K_q X_s
  std::vector<std::vector<DenseVector>> applied_frozen;
  /// [q] = K_q lift
  std::vector<DenseVector> applied_lift;
  std::size_t spatial_calls = 0;
};

/// Spatial direction of the fixed point: solves
///   sum_q (prod_p a_{q,p}^{m,m}) K_q X = sum_r (prod_p g_{r,p}) f_r
///        - sum_q (prod_p a_{q,p}^{m,lift}) K_q lift - sum_q sum_s (prod_p a_{q,p}^{m,s}) K_q X_s
template <SpatialSolver Solver>
DenseVector spatial_step(EnrichmentContext& ctx, const AlphaTable& table, Solver& solver) {
  const auto& problem = *ctx.problem;
  const std::size_t n_axes = problem.axes.size();
  const std::size_t none = n_axes;
  DenseVector weights(table.n_terms());
  bool any = false;
  for (std::size_t q = 0; q < table.n_terms(); ++q) {
    weights[q] = AlphaTable::product(n_axes, none, [&](std::size_t p) { return table.self(q, p); });
    any = any || weights[q] != 0.0;
  }
  if (!any) throw ZeroMode("spatial step: all operator weights vanish");

  DenseVector rhs(solver.num_nodes(), 0.0);
  for (std::size_t r = 0; r < problem.rhs.terms.size(); ++r) {
    const double c = AlphaTable::product(n_axes, none, [&](std::size_t p) { return table.rhs(r, p); });
    axpy(c, problem.rhs.terms[r].spatial, rhs);
  }
  for (std::size_t q = 0; q < table.n_terms(); ++q) {
    const double cl = AlphaTable::product(n_axes, none, [&](std::size_t p) { return table.lift(q, p); });
    axpy(-cl, ctx.applied_lift[q], rhs);
    for (std::size_t s = 0; s < ctx.frozen.size(); ++s) {
      const double cs =
          AlphaTable::product(n_axes, none, [&](std::size_t p) { return table.frozen(q, p, s); });
      axpy(-cs, ctx.applied_frozen[q][s], rhs);
    }
  }
  ++ctx.spatial_calls;
  DenseVector x = solver.solve(weights, rhs);
  if (!all_finite(x)) throw SingularSystem("spatial step produced non-finite values");
  return x;
}

/// Parametric direction p* of the fixed point. The parametric mass matrices
/// are diagonal with a common weight per row, so the Galerkin system
/// decouples into one scalar equation per collocation point.
inline DenseVector parametric_step(const EnrichmentContext& ctx, const AlphaTable& table,
                                   std::size_t p_star) {
  const auto& problem = *ctx.problem;
  const std::size_t n_axes = problem.axes.size();
  const std::size_t n_terms = table.n_terms();
  const std::size_t n_frozen = ctx.frozen.size();
  const std::size_t n_points = problem.axes.at(p_star).size();

  DenseVector c_self(n_terms), c_lift(n_terms);
  std::vector<DenseVector> c_frozen(n_terms, DenseVector(n_frozen));
  for (std::size_t q = 0; q < n_terms; ++q) {
    c_self[q] = table.spatial_self(q) *
                AlphaTable::product(n_axes, p_star, [&](std::size_t p) { return table.self(q, p); });
    c_lift[q] = table.spatial_lift(q) *
                AlphaTable::product(n_axes, p_star, [&](std::size_t p) { return table.lift(q, p); });
    for (std::size_t s = 0; s < n_frozen; ++s)
      c_frozen[q][s] = table.spatial_frozen(q, s) * AlphaTable::product(n_axes, p_star, [&](std::size_t p) {
                         return table.frozen(q, p, s);
                       });
  }
  DenseVector c_rhs(problem.rhs.terms.size());
  for (std::size_t r = 0; r < c_rhs.size(); ++r)
    c_rhs[r] = table.spatial_rhs(r) *
               AlphaTable::product(n_axes, p_star, [&](std::size_t p) { return table.rhs(r, p); });

  DenseVector y(n_points);
  for (std::size_t j = 0; j < n_points; ++j) {
    double num = 0.0, den = 0.0;
    for (std::size_t r = 0; r < c_rhs.size(); ++r) num += c_rhs[r] * problem.rhs.terms[r].factors[p_star][j];
    for (std::size_t q = 0; q < n_terms; ++q) {
      const double coeff = problem.coeff_factors[q][p_star][j];
      double frozen_sum = c_lift[q];
      for (std::size_t s = 0; s < n_frozen; ++s) frozen_sum += c_frozen[q][s] * ctx.frozen[s].factors[p_star][j];
      num -= coeff * frozen_sum;
      den += coeff * c_self[q];
    }
    if (den == 0.0 || !std::isfinite(den))
      throw DegenerateCoefficient("parametric step: zero operator at collocation point " +
                                  std::to_string(j) + " of axis " + problem.axes[p_star].name());
    y[j] = num / den;
  }
  return y;
}

namespace detail {

inline double factor_change(const ParameterAxis& axis, std::span<const double> a,
                            std::span<const double> b) {
  DenseVector d(a.begin(), a.end());
  axpy(-1.0, b, d);
  return weighted_norm(axis, d);
}

}  // namespace detail

struct FixedPointResult {
  Mode mode;
  ModeReport report;
};

/// Computes mode m = ctx.frozen.size() by alternating directions until
/// Delta^(k) / ||u^(m,k)|| <= tol_fp or max_fp_iters sweeps.
template <SpatialSolver Solver>
FixedPointResult fixed_point(EnrichmentContext& ctx, const PgdConfig& config, Solver& solver) {
  const auto& problem = *ctx.problem;
  const auto& axes = problem.axes;
  const std::size_t n_axes = axes.size();
  const auto volumes = solver.node_volumes();
  const std::size_t calls_before = ctx.spatial_calls;

  std::vector<std::size_t> order = config.parameter_order;
  if (order.empty())
    for (std::size_t p = 0; p < n_axes; ++p) order.push_back(p);

  Mode mode;
  mode.spatial.assign(solver.num_nodes(), 0.0);
  for (const auto& axis : axes) {
    DenseVector ones(axis.size(), 1.0);
    const double n = weighted_norm(axis, ones);
    for (double& v : ones) v /= n;
    mode.factors.push_back(std::move(ones));
  }

  AlphaTable table(problem.coeff_factors.size(), n_axes, ctx.frozen.size(), problem.rhs.terms.size());
  for (std::size_t p = 0; p < n_axes; ++p) update_alpha(table, problem, ctx.frozen, p, mode.factors[p]);

  ModeReport report;
  Mode previous = mode;
  for (std::size_t k = 1; k <= config.max_fp_iters; ++k) {
    mode.spatial = spatial_step(ctx, table, solver);
    double magnitude = spatial_norm(volumes, mode.spatial);
    if (magnitude == 0.0) throw ZeroMode("spatial step returned a zero field");

    if (n_axes == 0) {
      // a single direction is solved exactly by one linear solve
      report.deltas.push_back(0.0);
      report.relative_deltas.push_back(0.0);
      report.fp_iterations = k;
      report.magnitude = magnitude;
      report.converged = true;
      break;
    }

    for (std::size_t p : order) {
      update_spatial_alpha(table, solver, mode.spatial, ctx.applied_frozen, ctx.applied_lift, problem.rhs);
      mode.factors[p] = parametric_step(ctx, table, p);
      auto normalized = normalize_mode(std::move(mode), axes, volumes);
      mode = std::move(normalized.mode);
      magnitude = normalized.magnitude;
      for (std::size_t pp = 0; pp < n_axes; ++pp)
        update_alpha(table, problem, ctx.frozen, pp, mode.factors[pp]);
    }

    DenseVector spatial_change = mode.spatial;
    axpy(-1.0, previous.spatial, spatial_change);
    double delta = spatial_norm(volumes, spatial_change);
    for (std::size_t p = 0; p < n_axes; ++p)
      delta *= detail::factor_change(axes[p], mode.factors[p], previous.factors[p]);
    const double relative = magnitude > 0.0 ? delta / magnitude : 0.0;
    report.deltas.push_back(delta);
    report.relative_deltas.push_back(relative);
    report.fp_iterations = k;
    report.magnitude = magnitude;
    previous = mode;
    if (relative <= config.tol_fp) {
      report.converged = true;
      break;
    }
  }
  report.spatial_calls = ctx.spatial_calls - calls_before;
  return {std::move(mode), std::move(report)};
}

/// Greedy enrichment: adds modes until ||u^m|| / ||u^1|| <= tol_pgd, a null
/// mode appears, or max_modes is reached. The mode that meets the tolerance
/// is kept; a null mode is discarded.
template <SpatialSolver Solver>
PgdResult enrich(Solver& solver, const PgdProblem& problem, const PgdConfig& config) {
  config.validate(problem.axes.size());
  const std::size_t n_terms = solver.num_terms();
  require(problem.coeff_factors.size() == n_terms, "enrich: coefficient term count != solver terms");
  require(problem.lift.size() == solver.num_nodes(), "enrich: lift length != node count");
  for (const auto& c : problem.coeff_factors) {
    require(c.size() == problem.axes.size(), "enrich: coefficient factor count != axis count");
    for (std::size_t p = 0; p < c.size(); ++p)
      require(c[p].size() == problem.axes[p].size(), "enrich: coefficient factor length mismatch");
  }
  for (const auto& t : problem.rhs.terms) {
    require(t.spatial.size() == solver.num_nodes(), "enrich: load length != node count");
    require(t.factors.size() == problem.axes.size(), "enrich: load factor count != axis count");
    for (std::size_t p = 0; p < t.factors.size(); ++p)
      require(t.factors[p].size() == problem.axes[p].size(), "enrich: load factor length mismatch");
  }

  PgdResult result{SeparatedSolution(problem.axes, problem.lift), {}};
  auto& report = result.report;
  const auto volumes = solver.node_volumes();

  const double lift_norm = spatial_norm(volumes, problem.lift);
  bool has_load = false;
  for (const auto& t : problem.rhs.terms) has_load = has_load || norm_inf(t.spatial) > 0.0;
  if (lift_norm == 0.0 && !has_load) {
    report.termination = Termination::empty_problem;
    return result;
  }

  EnrichmentContext ctx;
  ctx.problem = &problem;
  ctx.applied_frozen.assign(n_terms, {});
  for (std::size_t q = 0; q < n_terms; ++q) ctx.applied_lift.push_back(solver.apply(q, problem.lift));

  double first_magnitude = 0.0;
  report.termination = Termination::max_modes;
  for (std::size_t m = 0; m < config.max_modes; ++m) {
    FixedPointResult fp;
    const std::size_t calls_before = ctx.spatial_calls;
    try {
      fp = fixed_point(ctx, config, solver);
    } catch (const ZeroMode&) {
      ModeReport null_mode;
      null_mode.spatial_calls = ctx.spatial_calls - calls_before;
      report.total_spatial_calls += null_mode.spatial_calls;
      report.modes.push_back(std::move(null_mode));
      report.termination = Termination::zero_mode;
      break;
    }
    report.total_spatial_calls += fp.report.spatial_calls;
    const double magnitude = fp.report.magnitude;
    const double scale = std::max(first_magnitude, lift_norm);
    if (magnitude <= config.zero_mode_tol * scale) {
      report.modes.push_back(std::move(fp.report));
      report.termination = Termination::zero_mode;
      break;
    }
    fp.report.accepted = true;
    report.modes.push_back(std::move(fp.report));
    if (m == 0) first_magnitude = magnitude;

    for (std::size_t q = 0; q < n_terms; ++q)
      ctx.applied_frozen[q].push_back(solver.apply(q, fp.mode.spatial));
    ctx.frozen.push_back(fp.mode);
    result.solution.add_mode(std::move(fp.mode));

    if (magnitude / first_magnitude <= config.tol_pgd) {
      report.termination = Termination::tolerance;
      break;
    }
  }
  return result;
}

}  // namespace pgdfit

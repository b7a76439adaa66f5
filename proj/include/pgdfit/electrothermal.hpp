#pragma once

// Electrokinetic and stationary thermal problems over space x parameters,
// coupled one way through the Joule losses of the electric surrogate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pgdfit/errors.hpp"
#include "pgdfit/fit_solver.hpp"
#include "pgdfit/mesh.hpp"
#include "pgdfit/pgd_engine.hpp"
#include "pgdfit/separated.hpp"

namespace pgdfit {

/// How the Dirichlet data enter the separated solution.
enum class LiftKind {
  /// Dirichlet values at the Dirichlet nodes, zero elsewhere
  dirichlet,
  /// discrete harmonic extension using the parameter-averaged coefficient
  harmonic,
};

struct FieldOptions {
  Averaging averaging = Averaging::arithmetic;
  LinearSolver linear_solver = LinearSolver::direct;
  LiftKind electric_lift = LiftKind::dirichlet;
  /// uniform Dirichlet temperatures make the harmonic lift exactly constant
  LiftKind thermal_lift = LiftKind::harmonic;
};

struct ElectrokineticProblem {
  TensorGrid grid;
  SeparatedCoefficient sigma;
  BoundaryCondition bc;
  std::vector<ParameterAxis> axes;
};

struct ThermalProblem {
  TensorGrid grid;
  SeparatedCoefficient lambda;
  BoundaryCondition bc;
  std::vector<ParameterAxis> axes;
  SeparatedRhs source;
};

/// Coefficient with every parametric factor replaced by its mean over the axis.
inline CellField mean_coefficient(const SeparatedCoefficient& coeff, std::span<const ParameterAxis> axes) {
  require(!coeff.terms.empty(), "mean_coefficient: no terms");
  CellField out{std::vector<double>(coeff.terms.front().spatial.values.size(), 0.0)};
  for (const auto& t : coeff.terms) {
    double c = 1.0;
    for (std::size_t p = 0; p < axes.size(); ++p) {
      const DenseVector ones(axes[p].size(), 1.0);
      c *= weighted_inner(axes[p], ones, t.factors[p], ones) / (axes[p].hi() - axes[p].lo());
    }
    axpy(c, t.spatial.values, out.values);
  }
  return out;
}

inline DenseVector make_lift(const TensorGrid& grid, const SeparatedCoefficient& coeff,
                             const BoundaryCondition& bc, std::span<const ParameterAxis> axes,
                             LiftKind kind, Averaging averaging = Averaging::arithmetic) {
  if (kind == LiftKind::dirichlet) return bc.dirichlet_vector(grid.n_nodes());
  const auto& v = bc.values();
  if (!v.empty() && std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); }))
    return DenseVector(grid.n_nodes(), v.front());
  return solve_field(grid, mean_coefficient(coeff, axes), bc, {}, averaging);
}

namespace detail {

inline PgdResult solve_diffusion(const TensorGrid& grid, const SeparatedCoefficient& coeff,
                                 const BoundaryCondition& bc, const std::vector<ParameterAxis>& axes,
                                 const SeparatedRhs& source, const PgdConfig& config,
                                 const FieldOptions& options, LiftKind lift) {
  if (bc.empty()) throw SingularSystem("problem has no Dirichlet nodes");
  check_coefficient(grid, coeff, axes);
  std::vector<CellField> spatial;
  PgdProblem problem;
  problem.axes = axes;
  for (const auto& t : coeff.terms) {
    spatial.push_back(t.spatial);
    problem.coeff_factors.push_back(t.factors);
  }
  problem.rhs = source;
  problem.lift = make_lift(grid, coeff, bc, axes, lift, options.averaging);
  FitSpatialSolver solver(grid, spatial, bc, options.averaging, options.linear_solver);
  return enrich(solver, problem, config);
}

}  // namespace detail

inline PgdResult solve_electric(const ElectrokineticProblem& problem, const PgdConfig& config,
                                const FieldOptions& options = {}) {
  return detail::solve_diffusion(problem.grid, problem.sigma, problem.bc, problem.axes, SeparatedRhs{},
                                 config, options, options.electric_lift);
}

inline PgdResult solve_thermal(const ThermalProblem& problem, const PgdConfig& config,
                               const FieldOptions& options = {}) {
  for (const auto& t : problem.source.terms)
    require(t.spatial.size() == problem.grid.n_nodes(), "thermal source length != node count");
  return detail::solve_diffusion(problem.grid, problem.lambda, problem.bc, problem.axes, problem.source,
                                 config, options, options.thermal_lift);
}

/// Separated Joule load sum_q sum_{i<=j} sigma_q grad(u_i).grad(u_j) over the
/// electric modes with the lift as index 0 (factors identically one). Off-diagonal
/// pairs are merged with factor 2. Terms are ordered by (q, i, j).
///
/// With cutoff > 0, terms whose size (max nodal load times the product of
/// factor norms) is below cutoff times the largest such size are dropped.
inline SeparatedRhs build_joule_source(const TensorGrid& grid, const SeparatedSolution& electric,
                                       const SeparatedCoefficient& sigma,
                                       Averaging averaging = Averaging::arithmetic, double cutoff = 0.0) {
  const auto& axes = electric.axes();
  std::vector<const DenseVector*> spatial{&electric.lift()};
  std::vector<std::vector<DenseVector>> factors;
  {
    std::vector<DenseVector> ones;
    for (const auto& a : axes) ones.emplace_back(a.size(), 1.0);
    factors.push_back(std::move(ones));
  }
  for (const auto& m : electric.modes()) {
    spatial.push_back(&m.spatial);
    factors.push_back(m.factors);
  }

  SeparatedRhs rhs;
  std::vector<double> sizes;
  for (const auto& term : sigma.terms) {
    require(term.factors.size() == axes.size(), "build_joule_source: sigma factor count != axes");
    for (std::size_t i = 0; i < spatial.size(); ++i)
      for (std::size_t j = i; j < spatial.size(); ++j) {
        DenseVector load = joule_rhs(grid, term.spatial, *spatial[i], *spatial[j], averaging);
        if (i != j)
          for (double& v : load) v *= 2.0;
        if (norm_inf(load) == 0.0) continue;
        Mode t;
        t.spatial = std::move(load);
        double size = norm_inf(t.spatial);
        for (std::size_t p = 0; p < axes.size(); ++p) {
          DenseVector f(axes[p].size());
          for (std::size_t k = 0; k < f.size(); ++k)
            f[k] = term.factors[p][k] * (factors[i][p][k] * factors[j][p][k]);
          size *= weighted_norm(axes[p], f);
          t.factors.push_back(std::move(f));
        }
        sizes.push_back(size);
        rhs.terms.push_back(std::move(t));
      }
  }
  if (cutoff > 0.0 && !sizes.empty()) {
    const double largest = *std::max_element(sizes.begin(), sizes.end());
    SeparatedRhs kept;
    for (std::size_t k = 0; k < sizes.size(); ++k)
      if (sizes[k] >= cutoff * largest) kept.terms.push_back(std::move(rhs.terms[k]));
    rhs = std::move(kept);
  }
  return rhs;
}

struct ElectrothermalResult {
  PgdResult electric;
  PgdResult thermal;
};

/// Electric surrogate, Joule source from it, then the thermal surrogate.
inline ElectrothermalResult solve_electrothermal(const ElectrokineticProblem& electric,
                                                 const SeparatedCoefficient& lambda,
                                                 const BoundaryCondition& thermal_bc,
                                                 const PgdConfig& electric_config,
                                                 const PgdConfig& thermal_config,
                                                 const FieldOptions& options = {}) {
  ElectrothermalResult out;
  out.electric = solve_electric(electric, electric_config, options);
  ThermalProblem thermal{electric.grid, lambda, thermal_bc, electric.axes,
                         build_joule_source(electric.grid, out.electric.solution, electric.sigma,
                                            options.averaging)};
  out.thermal = solve_thermal(thermal, thermal_config, options);
  return out;
}

}  // namespace pgdfit

#pragma once

// Reference solutions: closed forms for the two-material rod and a brute-force
// sweep that runs one FIT solve per collocation tuple.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pgdfit/electrothermal.hpp"
#include "pgdfit/errors.hpp"
#include "pgdfit/mesh.hpp"
#include "pgdfit/separated.hpp"

namespace pgdfit {

/// Potential of the rod (0, 2L) with sigma = mu on (0, L), 1 on (L, 2L),
/// phi(0) = 0 and phi(2L) = 1. The flux sigma phi' is constant.
inline double analytic_1d_electric(double x, double mu, double half_length) {
  if (!(mu > 0.0)) throw InvalidParameter("analytic_1d_electric: mu must be positive");
  const double l = half_length;
  if (x <= l) return x / (l * (1.0 + mu));
  return mu / (l * (1.0 + mu)) * (x - l) + 1.0 / (1.0 + mu);
}

/// Temperature of the same rod with lambda = sigma, heated by sigma |phi'|^2
/// and held at `boundary` at both ends. With a = 1 / (L (1 + mu)):
///   T = T0 + c1 x - a^2 x^2 / 2                      on (0, L)
///   T = T0 + c2 (2L - x) - mu^2 a^2 (2L - x)^2 / 2   on (L, 2L)
/// where continuity of T and of lambda T' at x = L give
///   c1 = a^2 L (1 + mu) / 2,  c2 = mu a^2 L (1 + mu) / 2.
inline double analytic_1d_thermal(double x, double mu, double half_length, double boundary = 20.0) {
  if (!(mu > 0.0)) throw InvalidParameter("analytic_1d_thermal: mu must be positive");
  const double l = half_length;
  const double a2 = 1.0 / (l * l * (1.0 + mu) * (1.0 + mu));
  if (x <= l) {
    const double c1 = 0.5 * a2 * l * (1.0 + mu);
    return boundary + c1 * x - 0.5 * a2 * x * x;
  }
  const double c2 = 0.5 * mu * a2 * l * (1.0 + mu);
  const double y = 2.0 * l - x;
  return boundary + c2 * y - 0.5 * mu * mu * a2 * y * y;
}

/// ||u_h - f||_L2 / ||f||_L2 on a 1D grid, u_h interpolated linearly between
/// nodes; three-point Gauss rule per cell.
inline double relative_l2_error_1d(const TensorGrid& grid, std::span<const double> nodal,
                                   const std::function<double(double)>& exact) {
  require(grid.dim() == 1, "relative_l2_error_1d: grid must be 1D");
  require(nodal.size() == grid.n_nodes(), "relative_l2_error_1d: length mismatch");
  static constexpr std::array<double, 3> gx{-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr std::array<double, 3> gw{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const auto& x = grid.axis(0);
  double err = 0.0, ref = 0.0;
  for (std::size_t c = 0; c + 1 < x.size(); ++c) {
    const double h = x[c + 1] - x[c];
    for (std::size_t g = 0; g < 3; ++g) {
      const double t = 0.5 * (1.0 + gx[g]);
      const double xq = x[c] + t * h;
      const double uh = (1.0 - t) * nodal[c] + t * nodal[c + 1];
      const double f = exact(xq);
      err += 0.5 * h * gw[g] * (uh - f) * (uh - f);
      ref += 0.5 * h * gw[g] * f * f;
    }
  }
  return std::sqrt(err / ref);
}

/// One full FIT solution per collocation tuple, first axis fastest.
struct FullSweepSolution {
  std::vector<ParameterAxis> axes;
  std::vector<std::vector<std::size_t>> indices;
  std::vector<DenseVector> fields;
  std::size_t solves = 0;

  std::size_t size() const noexcept { return fields.size(); }
};

inline std::size_t collocation_count(std::span<const ParameterAxis> axes) {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.size();
  return n;
}

inline void check_budget(std::span<const ParameterAxis> axes, std::size_t budget) {
  const std::size_t n = collocation_count(axes);
  if (n > budget)
    throw BudgetExceeded("full sweep needs " + std::to_string(n) + " solves, budget is " +
                         std::to_string(budget));
}

/// Brute-force reference for a diffusion problem whose load may depend on the
/// parameters (empty source = electrokinetic).
inline FullSweepSolution full_sweep(const TensorGrid& grid, const SeparatedCoefficient& coeff,
                                    const BoundaryCondition& bc, const std::vector<ParameterAxis>& axes,
                                    const SeparatedRhs& source, std::size_t budget,
                                    Averaging averaging = Averaging::arithmetic) {
  check_budget(axes, budget);
  FullSweepSolution out;
  out.axes = axes;
  for_each_collocation(axes, [&](std::span<const std::size_t> index) {
    const CellField material = coeff.evaluate_at(index);
    const DenseVector load = source.evaluate_at(index, grid.n_nodes());
    out.fields.push_back(solve_field(grid, material, bc, load, averaging));
    out.indices.emplace_back(index.begin(), index.end());
    ++out.solves;
  });
  return out;
}

inline FullSweepSolution full_sweep(const ElectrokineticProblem& problem, std::size_t budget,
                                    Averaging averaging = Averaging::arithmetic) {
  return full_sweep(problem.grid, problem.sigma, problem.bc, problem.axes, SeparatedRhs{}, budget,
                    averaging);
}

inline FullSweepSolution full_sweep(const ThermalProblem& problem, std::size_t budget,
                                    Averaging averaging = Averaging::arithmetic) {
  return full_sweep(problem.grid, problem.lambda, problem.bc, problem.axes, problem.source, budget,
                    averaging);
}

struct ElectrothermalSweep {
  FullSweepSolution electric;
  FullSweepSolution thermal;
};

/// Per tuple: electric solve, Joule load of that exact field, thermal solve.
inline ElectrothermalSweep full_sweep_electrothermal(const ElectrokineticProblem& electric,
                                                     const SeparatedCoefficient& lambda,
                                                     const BoundaryCondition& thermal_bc,
                                                     std::size_t budget,
                                                     Averaging averaging = Averaging::arithmetic) {
  check_budget(electric.axes, budget);
  ElectrothermalSweep out;
  out.electric.axes = electric.axes;
  out.thermal.axes = electric.axes;
  const auto& grid = electric.grid;
  for_each_collocation(electric.axes, [&](std::span<const std::size_t> index) {
    const CellField sigma = electric.sigma.evaluate_at(index);
    DenseVector phi = solve_field(grid, sigma, electric.bc, {}, averaging);
    const DenseVector load = joule_rhs(grid, sigma, phi, phi, averaging);
    out.thermal.fields.push_back(solve_field(grid, lambda.evaluate_at(index), thermal_bc, load, averaging));
    out.electric.fields.push_back(std::move(phi));
    out.electric.indices.emplace_back(index.begin(), index.end());
    out.thermal.indices.emplace_back(index.begin(), index.end());
    ++out.electric.solves;
    out.thermal.solves += 1;
  });
  return out;
}

/// max over the sweep of ||surrogate(m modes) - sweep||_2 / ||sweep||_2.
inline double max_relative_error(const SeparatedSolution& surrogate, const FullSweepSolution& sweep,
                                 std::size_t n_modes) {
  double worst = 0.0;
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    DenseVector d = surrogate.evaluate_at(sweep.indices[k], n_modes);
    axpy(-1.0, sweep.fields[k], d);
    const double ref = norm2(sweep.fields[k]);
    worst = std::max(worst, ref > 0.0 ? norm2(d) / ref : norm2(d));
  }
  return worst;
}

inline double max_relative_error(const SeparatedSolution& surrogate, const FullSweepSolution& sweep) {
  return max_relative_error(surrogate, sweep, surrogate.size());
}

inline double collocation_weight(std::span<const ParameterAxis> axes, std::span<const std::size_t> index) {
  double w = 1.0;
  for (std::size_t p = 0; p < axes.size(); ++p) w *= axes[p].weights()[index[p]];
  return w;
}

/// Quadrature-weighted relative error over space x parameters in discrete L2.
inline double global_relative_error(const TensorGrid& grid, const SeparatedSolution& surrogate,
                                    const FullSweepSolution& sweep, std::size_t n_modes) {
  const auto vol = grid.node_volumes();
  double err = 0.0, ref = 0.0;
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    const double w = collocation_weight(sweep.axes, sweep.indices[k]);
    DenseVector d = surrogate.evaluate_at(sweep.indices[k], n_modes);
    axpy(-1.0, sweep.fields[k], d);
    err += w * std::pow(spatial_norm(vol, d), 2);
    ref += w * std::pow(spatial_norm(vol, sweep.fields[k]), 2);
  }
  return ref > 0.0 ? std::sqrt(err / ref) : std::sqrt(err);
}

/// Quadrature-weighted relative error in the parameter-dependent energy norm
/// u' K(mu) u. For a Galerkin greedy expansion this never increases with m.
inline double energy_relative_error(const TensorGrid& grid, const SeparatedCoefficient& coeff,
                                    const SeparatedSolution& surrogate, const FullSweepSolution& sweep,
                                    std::size_t n_modes, Averaging averaging = Averaging::arithmetic) {
  double err = 0.0, ref = 0.0;
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    const double w = collocation_weight(sweep.axes, sweep.indices[k]);
    const auto g = edge_conductance(grid, coeff.evaluate_at(sweep.indices[k]), averaging);
    DenseVector d = surrogate.evaluate_at(sweep.indices[k], n_modes);
    axpy(-1.0, sweep.fields[k], d);
    err += w * stiffness_energy(grid, g, d, d);
    ref += w * stiffness_energy(grid, g, sweep.fields[k], sweep.fields[k]);
  }
  return ref > 0.0 ? std::sqrt(err / ref) : std::sqrt(err);
}

}  // namespace pgdfit

#pragma once

// Ready-made benchmark problems: the 1D two-material rod and a small 3D
// block with two parameterized conductive bridges.

#include <array>
#include <cstddef>
#include <vector>

#include "pgdfit/electrothermal.hpp"
#include "pgdfit/mesh.hpp"
#include "pgdfit/separated.hpp"

namespace pgdfit {

struct ElectrothermalSetup {
  ElectrokineticProblem electric;
  SeparatedCoefficient lambda;
  BoundaryCondition thermal_bc;
};

/// Cell indicator of an axis-aligned box (cell centers inside).
inline CellField box_indicator(const TensorGrid& grid, std::span<const std::array<double, 2>> box) {
  require(box.size() == grid.dim(), "box dimension does not match grid");
  CellField f = CellField::constant(grid, 0.0);
  for (std::size_t c = 0; c < grid.n_cells(); ++c) {
    const auto x = grid.cell_center(c);
    bool inside = true;
    for (std::size_t a = 0; a < grid.dim(); ++a) inside = inside && x[a] > box[a][0] && x[a] < box[a][1];
    if (inside) f.values[c] = 1.0;
  }
  return f;
}

struct ModelRodOptions {
  std::size_t cells = 200;
  std::size_t mu_points = 100;
  double half_length = 1.0;
  double mu_lo = 0.2;
  double mu_hi = 1.0;
  double potential = 1.0;
  double temperature = 20.0;
};

/// Rod (0, 2L): sigma = lambda = mu on (0, L) and 1 on (L, 2L);
/// phi(0) = 0, phi(2L) = potential, T = temperature at both ends.
inline ElectrothermalSetup model_problem_1d(const ModelRodOptions& o = {}) {
  const double l = o.half_length;
  TensorGrid grid({linspace(0.0, 2.0 * l, o.cells + 1)});
  std::vector<ParameterAxis> axes{ParameterAxis::uniform("mu_1", o.mu_lo, o.mu_hi, o.mu_points)};
  const std::array<std::array<double, 2>, 1> left{{{0.0, l}}}, right{{{l, 2.0 * l}}};

  SeparatedCoefficient coeff;
  coeff.terms.push_back({box_indicator(grid, left), {axes[0].points()}});
  coeff.terms.push_back({box_indicator(grid, right), {DenseVector(axes[0].size(), 1.0)}});

  BoundaryCondition bc_e, bc_t;
  bc_e.set_face(grid, 0, 0, 0.0);
  bc_e.set_face(grid, 0, 1, o.potential);
  bc_t.set_face(grid, 0, 0, o.temperature);
  bc_t.set_face(grid, 0, 1, o.temperature);

  return {{grid, coeff, bc_e, axes}, coeff, bc_t};
}

struct BridgeBlockOptions {
  std::size_t cells = 8;
  std::size_t points = 10;
  double mu_lo = 1.0;
  double mu_hi = 10.0;
  double substrate = 1.0;
  double temperature = 20.0;
};

/// Unit cube of substrate with two bar-shaped bridges along x whose
/// conductivities are the parameters mu_1 and mu_2. Electrodes on the
/// x = 0 (0 V) and x = 1 (1 V) faces; heat sink at z = 0.
inline ElectrothermalSetup block_problem_3d(const BridgeBlockOptions& o = {}) {
  const auto x = linspace(0.0, 1.0, o.cells + 1);
  TensorGrid grid({x, x, x});
  std::vector<ParameterAxis> axes{ParameterAxis::uniform("mu_1", o.mu_lo, o.mu_hi, o.points),
                                  ParameterAxis::uniform("mu_2", o.mu_lo, o.mu_hi, o.points)};
  const std::array<std::array<double, 2>, 3> bridge_a{{{0.0, 1.0}, {0.125, 0.375}, {0.5, 0.75}}};
  const std::array<std::array<double, 2>, 3> bridge_b{{{0.25, 1.0}, {0.625, 0.875}, {0.25, 0.5}}};
  const CellField a = box_indicator(grid, bridge_a);
  const CellField b = box_indicator(grid, bridge_b);
  CellField substrate = CellField::constant(grid, o.substrate);
  for (std::size_t c = 0; c < grid.n_cells(); ++c)
    if (a.values[c] > 0.0 || b.values[c] > 0.0) substrate.values[c] = 0.0;

  const DenseVector ones(o.points, 1.0);
  SeparatedCoefficient sigma;
  sigma.terms.push_back({substrate, {ones, ones}});
  sigma.terms.push_back({a, {axes[0].points(), ones}});
  sigma.terms.push_back({b, {ones, axes[1].points()}});

  SeparatedCoefficient lambda;
  CellField lam = CellField::constant(grid, 1.0);
  for (std::size_t c = 0; c < grid.n_cells(); ++c)
    if (a.values[c] > 0.0 || b.values[c] > 0.0) lam.values[c] = 10.0;
  lambda.terms.push_back({lam, {ones, ones}});

  BoundaryCondition bc_e, bc_t;
  bc_e.set_face(grid, 0, 0, 0.0);
  bc_e.set_face(grid, 0, 1, 1.0);
  bc_t.set_face(grid, 2, 0, o.temperature);
  return {{grid, sigma, bc_e, axes}, lambda, bc_t};
}

}  // namespace pgdfit

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pgdfit/errors.hpp"
#include "pgdfit/linalg.hpp"
#include "pgdfit/mesh.hpp"

namespace pgdfit {

enum class LinearSolver { direct, cg };

/// SpatialSolver backed by the FIT stiffness of each coefficient term.
/// Each solve assembles sum_q w_q K_q on the free nodes of the Dirichlet set.
class FitSpatialSolver {
public:
  FitSpatialSolver(TensorGrid grid, const std::vector<CellField>& term_materials,
                   const BoundaryCondition& bc, Averaging averaging = Averaging::arithmetic,
                   LinearSolver linear_solver = LinearSolver::direct, double cg_tol = default_cg_tolerance)
      : grid_(std::move(grid)), linear_solver_(linear_solver), cg_tol_(cg_tol) {
    if (bc.empty()) throw SingularSystem("FitSpatialSolver: no Dirichlet nodes");
    require(!term_materials.empty(), "FitSpatialSolver: no coefficient terms");
    for (const auto& m : term_materials) conductances_.push_back(edge_conductance(grid_, m, averaging));
    for (std::size_t n : bc.nodes()) homogeneous_bc_.set(n, 0.0);
  }

  std::size_t num_terms() const noexcept { return conductances_.size(); }
  std::size_t num_nodes() const noexcept { return grid_.n_nodes(); }
  std::span<const double> node_volumes() const noexcept { return grid_.node_volumes(); }
  const TensorGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& conductance(std::size_t q) const { return conductances_.at(q); }

  DenseVector solve(std::span<const double> weights, std::span<const double> rhs) {
    require(weights.size() == num_terms(), "solve: one weight per term expected");
    require(rhs.size() == num_nodes(), "solve: rhs length mismatch");
    std::vector<double> g(grid_.n_edges(), 0.0);
    for (std::size_t q = 0; q < num_terms(); ++q) axpy(weights[q], conductances_[q], g);
    const auto sys = assemble_reduced(grid_, g, homogeneous_bc_);
    const auto b = sys.restrict(rhs);
    DenseVector x = linear_solver_ == LinearSolver::direct ? direct_solve(sys.matrix, b)
                                                           : cg_solve(sys.matrix, b, cg_tol_);
    ++solves_;
    return sys.expand(x, DenseVector(num_nodes(), 0.0));
  }

  DenseVector apply(std::size_t q, std::span<const double> v) const {
    return apply_stiffness(grid_, conductances_.at(q), v);
  }

  /// Number of linear solves performed so far.
  std::size_t solves() const noexcept { return solves_; }

private:
  TensorGrid grid_;
  std::vector<std::vector<double>> conductances_;
  BoundaryCondition homogeneous_bc_;
  LinearSolver linear_solver_;
  double cg_tol_;
  std::size_t solves_ = 0;
};

}  // namespace pgdfit

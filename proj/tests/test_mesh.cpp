#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "pgdfit/mesh.hpp"
#include "support.hpp"

using namespace pgdfit;

namespace {

CellField two_cell_rod(double left, double right) { return CellField{{left, right}}; }

BoundaryCondition rod_ends(const TensorGrid& g, double lo, double hi) {
  BoundaryCondition bc;
  bc.set_face(g, 0, 0, lo);
  bc.set_face(g, 0, 1, hi);
  return bc;
}

/// u^T S u with S assembled as a full sparse matrix.
double quadratic_form(const TensorGrid& g, const CellField& m, const DenseVector& u) {
  const auto s = full_stiffness(g, edge_conductance(g, m));
  return dot(u, spmv(s, u));
}

TensorGrid random_grid(testing_support::Gen& gen) {
  const std::size_t dim = gen.index(1, 3);
  std::vector<std::vector<double>> axes;
  for (std::size_t a = 0; a < dim; ++a) axes.push_back(gen.increasing(gen.index(2, dim == 3 ? 5 : 9), gen.uniform(-1, 1), 0.7));
  return TensorGrid(axes);
}

}  // namespace

TEST(TensorGrid, OneDimensional) {
  const TensorGrid g({{0.0, 1.0, 2.0}});
  EXPECT_EQ(g.dim(), 1u);
  EXPECT_EQ(g.n_nodes(), 3u);
  EXPECT_EQ(g.n_cells(), 2u);
  ASSERT_EQ(g.n_edges(), 2u);
  EXPECT_EQ(g.edges()[0].length, 1.0);
  EXPECT_EQ(g.edges()[1].length, 1.0);
}

TEST(TensorGrid, TwoDimensionalSingleCell) {
  const TensorGrid g({{0.0, 1.0}, {0.0, 2.0}});
  EXPECT_EQ(g.dim(), 2u);
  EXPECT_EQ(g.n_nodes(), 4u);
  EXPECT_EQ(g.n_cells(), 1u);
  EXPECT_EQ(g.cell_volume(0), 2.0);
}

TEST(TensorGrid, PaperRodResolution) {
  const TensorGrid g({linspace(0.0, 2.0, 201)});
  EXPECT_EQ(g.n_cells(), 200u);
  for (std::size_t c = 0; c < g.n_cells(); ++c) EXPECT_NEAR(g.cell_volume(c), 0.01, 1e-15);
}

TEST(TensorGrid, LexicographicNumbering) {
  const TensorGrid g({{0, 1, 2}, {0, 1}, {0, 1}});
  EXPECT_EQ(g.node_index({1, 0, 0}), 1u);
  EXPECT_EQ(g.node_index({0, 1, 0}), 3u);
  EXPECT_EQ(g.node_index({0, 0, 1}), 6u);
  for (std::size_t n = 0; n < g.n_nodes(); ++n) EXPECT_EQ(g.node_index(g.node_ijk(n)), n);
}

TEST(TensorGrid, InvalidAxesThrow) {
  EXPECT_THROW(TensorGrid({{0.0, 0.0}}), InvalidGrid);
  EXPECT_THROW(TensorGrid(std::vector<std::vector<double>>{{0.0}}), InvalidGrid);
  EXPECT_THROW(TensorGrid(std::vector<std::vector<double>>{}), InvalidGrid);
  EXPECT_THROW(TensorGrid({{0, 1}, {0, 1}, {0, 1}, {0, 1}}), InvalidGrid);
  EXPECT_THROW(TensorGrid({{0.0, 2.0, 1.0}}), InvalidGrid);
}

TEST(TensorGrid, DualVolumesTileTheDomain) {
  testing_support::Gen gen(3);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = random_grid(gen);
    double total = 0.0, cells = 0.0;
    for (double v : g.node_volumes()) total += v;
    for (std::size_t c = 0; c < g.n_cells(); ++c) cells += g.cell_volume(c);
    EXPECT_NEAR(total, cells, 1e-12 * cells);
  }
}

TEST(AssembleStiffness, HomogeneousRodMidpoint) {
  const TensorGrid g({{0.0, 1.0, 2.0}});
  const auto u = solve_field(g, two_cell_rod(1, 1), rod_ends(g, 0, 1));
  EXPECT_DOUBLE_EQ(u[1], 0.5);
}

TEST(AssembleStiffness, TwoMaterialRod) {
  const TensorGrid g({{0.0, 1.0, 2.0}});
  const auto u = solve_field(g, two_cell_rod(0.2, 1), rod_ends(g, 0, 1));
  EXPECT_NEAR(u[1], 1.0 / 1.2, 1e-15);
}

TEST(AssembleStiffness, ScalesWithMaterial) {
  const TensorGrid g({{0, 0.5, 1.5}, {0, 1, 2}});
  BoundaryCondition bc;
  bc.set_face(g, 0, 0, 0.0);
  CellField m{{1.0, 2.0, 3.0, 4.0}};
  CellField m3 = m;
  for (double& v : m3.values) v *= 3.0;
  const auto a = assemble_stiffness(g, m, bc), b = assemble_stiffness(g, m3, bc);
  ASSERT_EQ(a.matrix.nnz(), b.matrix.nnz());
  for (std::size_t k = 0; k < a.matrix.nnz(); ++k)
    EXPECT_NEAR(b.matrix.values()[k], 3.0 * a.matrix.values()[k], 1e-15 * std::abs(b.matrix.values()[k]));
}

TEST(AssembleStiffness, SymmetricWithNonNegativeDiagonal) {
  testing_support::Gen gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = random_grid(gen);
    CellField m{gen.vector(g.n_cells(), 0.1, 10.0)};
    BoundaryCondition bc;
    bc.set_face(g, 0, 0, 1.0);
    const auto sys = assemble_stiffness(g, m, bc);
    EXPECT_TRUE(sys.matrix.is_symmetric());
    for (double d : sys.matrix.diagonal()) EXPECT_GE(d, 0.0);
  }
}

TEST(AssembleStiffness, LinearDataIsReproducedExactly) {
  testing_support::Gen gen(9);
  for (int trial = 0; trial < 20; ++trial) {
    const TensorGrid g({gen.increasing(gen.index(3, 40), 0.0, 0.3)});
    const double lo = gen.uniform(-2, 2), hi = gen.uniform(-2, 2);
    const auto u = solve_field(g, CellField::constant(g, gen.uniform(0.1, 5)), rod_ends(g, lo, hi));
    const auto& x = g.axis(0);
    for (std::size_t i = 0; i < x.size(); ++i)
      EXPECT_NEAR(u[i], lo + (hi - lo) * (x[i] - x.front()) / (x.back() - x.front()), 1e-12);
  }
}

TEST(AssembleStiffness, FloatingComponentIsSingular) {
  const TensorGrid g({{0.0, 1.0, 2.0}});
  BoundaryCondition bc;
  bc.set_face(g, 0, 0, 0.0);
  EXPECT_THROW(assemble_stiffness(g, two_cell_rod(1.0, 0.0), bc), SingularSystem);
  EXPECT_THROW(assemble_stiffness(g, two_cell_rod(1.0, 1.0), BoundaryCondition{}), SingularSystem);
}

TEST(AssembleStiffness, NegativeMaterialRejected) {
  const TensorGrid g({{0.0, 1.0, 2.0}});
  EXPECT_THROW(assemble_stiffness(g, two_cell_rod(1.0, -1.0), rod_ends(g, 0, 1)), ContractViolation);
}

TEST(EdgeMaterial, UniformRod) {
  const TensorGrid g({linspace(0.0, 1.0, 11)});
  const auto m = edge_material(g, CellField::constant(g, 2.5));
  for (double v : m) EXPECT_DOUBLE_EQ(v, 2.5);
}

TEST(EdgeMaterial, RodEdgesLieInOneCell) {
  const TensorGrid g({{0.0, 1.0, 2.0}});
  const auto m = edge_material(g, two_cell_rod(0.2, 1.0));
  EXPECT_EQ(m[0], 0.2);
  EXPECT_EQ(m[1], 1.0);
}

TEST(EdgeConductance, UniformCube) {
  const double h = 0.25, c = 3.0;
  const auto x = linspace(0.0, 1.0, 5);
  const TensorGrid g({x, x, x});
  const auto cond = edge_conductance(g, CellField::constant(g, c));
  for (std::size_t k = 0; k < g.n_edges(); ++k) {
    const auto& e = g.edges()[k];
    double expected = c * h;
    // boundary edges see only part of the dual facet
    for (std::size_t a = 0; a < 3; ++a)
      if (a != e.direction && g.on_boundary(e.from)) {
        const auto ijk = g.node_ijk(e.from);
        if (ijk[a] == 0 || ijk[a] == 4) expected *= 0.5;
      }
    EXPECT_NEAR(cond[k], expected, 1e-15);
  }
}

TEST(EdgeConductance, HarmonicAveraging) {
  const TensorGrid g({{0.0, 1.0, 2.0}, {0.0, 1.0}});
  CellField m{{1.0, 4.0}};
  const auto arith = edge_material(g, m, Averaging::arithmetic);
  const auto harm = edge_material(g, m, Averaging::harmonic);
  for (std::size_t k = 0; k < g.n_edges(); ++k) {
    const auto& e = g.edges()[k];
    if (e.direction == 1 && g.node_ijk(e.from)[0] == 1) {
      EXPECT_DOUBLE_EQ(arith[k], 2.5);
      EXPECT_DOUBLE_EQ(harm[k], 1.6);
    }
  }
}

TEST(JouleRhs, ConstantFieldsGiveZero) {
  const TensorGrid g({{0, 1, 2}, {0, 1}});
  const DenseVector u(g.n_nodes(), 3.0);
  EXPECT_EQ(joule_rhs(g, CellField::constant(g, 1.0), u, u), DenseVector(g.n_nodes(), 0.0));
}

TEST(JouleRhs, HandEvaluatedRod) {
  const TensorGrid g({{0.0, 1.0, 2.0}});
  const DenseVector u{0.0, 0.5, 1.0};
  const auto r = joule_rhs(g, two_cell_rod(1, 1), u, u);
  EXPECT_DOUBLE_EQ(r[0], 0.125);
  EXPECT_DOUBLE_EQ(r[1], 0.25);
  EXPECT_DOUBLE_EQ(r[2], 0.125);
}

TEST(JouleRhs, SymmetricInArguments) {
  testing_support::Gen gen(13);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = random_grid(gen);
    CellField m{gen.vector(g.n_cells(), 0.1, 10.0)};
    const auto u = gen.vector(g.n_nodes()), v = gen.vector(g.n_nodes());
    EXPECT_EQ(joule_rhs(g, m, u, v), joule_rhs(g, m, v, u));
  }
}

TEST(JouleRhs, PowerConservation) {
  testing_support::Gen gen(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = random_grid(gen);
    CellField m{gen.vector(g.n_cells(), 0.1, 10.0)};
    const auto u = gen.vector(g.n_nodes());
    double total = 0.0;
    for (double v : joule_rhs(g, m, u, u)) total += v;
    const double reference = quadratic_form(g, m, u);
    EXPECT_NEAR(total, reference, 1e-12 * std::abs(reference));
  }
}

TEST(BoundaryCondition, BoxSelectsFaceNodes) {
  const auto x = linspace(0.0, 1.0, 3);
  const TensorGrid g({x, x});
  BoundaryCondition bc;
  const std::array<std::array<double, 2>, 2> left{{{0.0, 0.0}, {0.0, 1.0}}};
  bc.set_box(g, left, 2.0);
  EXPECT_EQ(bc.nodes(), (std::vector<std::size_t>{0, 3, 6}));
  const std::array<std::array<double, 2>, 2> outside{{{5.0, 6.0}, {0.0, 1.0}}};
  EXPECT_THROW(bc.set_box(g, outside, 1.0), ContractViolation);
}

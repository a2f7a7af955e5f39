#include "evosylv/errors.hpp"
#include "evosylv/oracles.hpp"
#include "evosylv/presets.hpp"
#include "evosylv/solver.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace evosylv;
using evosylv::testing::rel;

TEST(Analytic, Example1Values) {
  EXPECT_DOUBLE_EQ(analytic_example1(std::numbers::pi / 2, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(analytic_example1(0.0, 0.7), 0.0);
  EXPECT_NEAR(analytic_example1(std::numbers::pi / 2, 1.0), 0.367879441171442, 1e-15);
}

TEST(Timestep, ZeroData) {
  ProblemSpec spec = evosylv::testing::heat_1d(8, 6);
  spec.u0 = {};
  const SpaceOperator op = assemble_space_operator(spec);
  EXPECT_EQ(timestep_solve(spec, op).U.norm(), 0.0);
}

TEST(Timestep, ScalarGeometricDecay) {
  SpaceOperator op;
  op.d = 1;
  op.tau_beta = 0.1;
  op.assembled = speye(1);
  op.system = speye(1) * 1.1;
  LowRankRhs rhs;
  rhs.left = Matrix::Ones(1, 1);
  rhs.right = Matrix::Zero(5, 1);
  rhs.right(0, 0) = 1.0;
  const TimeOperator top = build_time_operator(1, 5);
  const OracleSolution o = timestep_solve(op, rhs, top);
  for (Eigen::Index k = 1; k <= 5; ++k) EXPECT_NEAR(o.U(0, k - 1), std::pow(1.1, -static_cast<double>(k)), 1e-15);
  const OracleSolution d = dense_kron_solve(op, rhs, top);
  EXPECT_LE(rel(d.U, o.U), 1e-15);
}

TEST(Timestep, TinyAllAtOnce) {
  SpaceOperator op;
  op.assembled = speye(1);
  op.system = speye(1) * 2.0;
  LowRankRhs rhs;
  rhs.left = Matrix::Ones(1, 1);
  rhs.right = Matrix::Ones(3, 1);
  const TimeOperator top = build_time_operator(1, 3);
  EXPECT_LE(rel(dense_kron_solve(op, rhs, top).U, timestep_solve(op, rhs, top).U), 1e-15);
}

TEST(CrossOracle, AgreeForAllOrders) {
  for (int s = 1; s <= 6; ++s) {
    PresetOptions po;
    po.n = 8;
    po.ell = 24;
    po.s = s;
    const ProblemSpec spec = make_preset("example1", po);
    const SpaceOperator op = assemble_space_operator(spec);
    const LowRankRhs rhs = assemble_rhs(spec, op);
    const TimeOperator top = build_time_operator(s, rhs.steps());
    const Matrix a = timestep_solve(op, rhs, top).U;
    const Matrix b = dense_kron_solve(op, rhs, top).U;
    const Matrix c = timestep_solve(spec, op).U;
    EXPECT_LE(rel(a, b), 1e-12) << "s=" << s;
    EXPECT_LE(rel(c, b), 1e-12) << "s=" << s;
  }
}

TEST(CrossOracle, BoundaryDataAndConvection) {
  const ProblemSpec spec = evosylv::testing::convdiff_2d(6, 20, 0.2);
  const SpaceOperator op = assemble_space_operator(spec);
  const LowRankRhs rhs = assemble_rhs(spec, op);
  const TimeOperator top = build_time_operator(1, rhs.steps());
  const Matrix a = timestep_solve(spec, op).U;
  const Matrix b = dense_kron_solve(op, rhs, top).U;
  EXPECT_LE(rel(a, b), 1e-12);
  // boundary rows carry g exactly
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    for (Eigen::Index i : op.boundary_indices) {
      const double x = spec.grid.nodes(0)(i % 6);
      EXPECT_NEAR(a(i, c), x == 0.0 ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(CrossOracle, AgreesWithEksm) {
  const ProblemSpec spec = evosylv::testing::heat_1d(8, 16);
  const SpaceOperator op = assemble_space_operator(spec);
  const LowRankRhs rhs = assemble_rhs(spec, op);
  const TimeOperator top = build_time_operator(1, rhs.steps());
  SolveOptions o;
  o.tol = 1e-10;
  const SolveResult r = solve_eksm(op, rhs, top, o);
  EXPECT_LE(rel(r.solution.materialize(), dense_kron_solve(op, rhs, top).U), 1e-8);
}

TEST(DenseKron, TooLarge) {
  const ProblemSpec spec = evosylv::testing::heat_1d(200, 200);
  const SpaceOperator op = assemble_space_operator(spec);
  const LowRankRhs rhs = assemble_rhs(spec, op);
  const TimeOperator top = build_time_operator(1, rhs.steps());
  try {
    (void)dense_kron_solve(op, rhs, top);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
}

TEST(Timestep, Example1DiscretisationError) {
  PresetOptions po;
  po.n = 256;
  po.ell = 1024;
  const ProblemSpec spec = make_preset("example1", po);
  const SpaceOperator op = assemble_space_operator(spec);
  const Matrix U = timestep_solve(spec, op).U;
  const Vector exact = example1_exact(spec.grid, 1024);
  const double err = (U.col(U.cols() - 1) - exact).norm() / exact.norm();
  const double h = spec.grid.h(0);
  EXPECT_LE(err, h * h + spec.grid.tau());
  EXPECT_GT(err, 0.0);
}

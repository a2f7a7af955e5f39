#include "evosylv/errors.hpp"
#include "evosylv/inner_solve.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace evosylv;
using evosylv::testing::random_projected_problem;

namespace {

ProjectedProblem scalar_problem(double a, Eigen::Index L) {
  ProjectedProblem p;
  p.A_small = Matrix::Constant(1, 1, a);
  p.rhs_left = Matrix::Ones(1, 1);
  p.rhs_right = Matrix::Zero(L, 1);
  p.rhs_right(0, 0) = 1.0;
  p.timeop = build_time_operator(1, L);
  return p;
}

// Dense Kronecker solve of A Y - Y Sigma^T = G.
Matrix kron_reference(const ProjectedProblem& p) {
  const Eigen::Index r = p.A_small.rows();
  const Eigen::Index L = p.rhs_right.rows();
  const Matrix S = Matrix(p.timeop.sigma);
  Matrix big = Matrix::Zero(r * L, r * L);
  for (Eigen::Index c = 0; c < L; ++c) big.block(c * r, c * r, r, r) = p.A_small;
  for (Eigen::Index c = 0; c < L; ++c) {
    for (Eigen::Index j = 0; j < L; ++j) {
      if (S(c, j) != 0.0) big.block(c * r, j * r, r, r) -= S(c, j) * Matrix::Identity(r, r);
    }
  }
  const Matrix G = p.rhs_left * p.rhs_right.transpose();
  const Vector y = big.partialPivLu().solve(G.reshaped());
  return y.reshaped(r, L);
}

}  // namespace

TEST(Sequential, ScalarRecursion) {
  const Matrix Y = inner_solve_sequential(scalar_problem(2.0, 3));
  EXPECT_DOUBLE_EQ(Y(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(Y(0, 1), 0.25);
  EXPECT_DOUBLE_EQ(Y(0, 2), 0.125);
}

TEST(Sequential, ZeroRhs) {
  ProjectedProblem p = scalar_problem(2.0, 5);
  p.rhs_right.setZero();
  EXPECT_EQ(inner_solve_sequential(p).norm(), 0.0);
  EXPECT_EQ(inner_solve_fft_smw(p).norm(), 0.0);
}

TEST(Sequential, MatchesKroneckerSystem) {
  std::mt19937_64 rng(21);
  const ProjectedProblem p = random_projected_problem(rng, 5, 40, 3, true);
  const Matrix Y = inner_solve_sequential(p);
  const Matrix G = p.rhs_left * p.rhs_right.transpose();
  EXPECT_LE(projected_residual(p, Y), 1e-12 * G.norm());
  EXPECT_LE(evosylv::testing::rel(Y, kron_reference(p)), 1e-11);
}

TEST(Sequential, SingularMatrix) {
  ProjectedProblem p = scalar_problem(0.0, 4);
  try {
    (void)inner_solve_sequential(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularProjectedMatrix);
  }
}

TEST(FftSmw, ScalarRecursion) {
  const Matrix Y = inner_solve_fft_smw(scalar_problem(2.0, 4));
  EXPECT_NEAR(Y(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(Y(0, 1), 0.25, 1e-15);
  EXPECT_NEAR(Y(0, 2), 0.125, 1e-15);
  EXPECT_NEAR(Y(0, 3), 0.0625, 1e-15);
}

TEST(FftSmw, MatchesSequentialAllOrders) {
  std::mt19937_64 rng(22);
  for (int s = 1; s <= 6; ++s) {
    for (Eigen::Index L : {17, 64, 100}) {
      for (bool ns : {false, true}) {
        const ProjectedProblem p = random_projected_problem(rng, 7, L, s, ns);
        const Matrix Ys = inner_solve_sequential(p);
        const Matrix Yf = inner_solve_fft_smw(p);
        EXPECT_LE(evosylv::testing::rel(Yf, Ys), 1e-10) << "s=" << s << " L=" << L << " ns=" << ns;
        const Matrix G = p.rhs_left * p.rhs_right.transpose();
        EXPECT_LE(projected_residual(p, Yf), 1e-8 * G.norm());
      }
    }
  }
}

TEST(FftSmw, ResonanceIsDetected) {
  // lambda = 1 coincides with the circulant eigenvalue fft(e_2)_0 = 1
  ProjectedProblem p = scalar_problem(1.0, 8);
  try {
    (void)inner_solve_fft_smw(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ResonantEigenvalue);
  }
  const InnerResult res = inner_solve(p, InnerSolver::FftSmw);
  EXPECT_EQ(res.used, InnerSolver::Sequential);
  EXPECT_NEAR(res.Y(0, 7), 1.0, 1e-15);
}

TEST(FftSmw, DefectiveMatrixFallsBack) {
  ProjectedProblem p = scalar_problem(2.0, 10);
  p.A_small = Matrix::Identity(2, 2) * 2.0;
  p.A_small(0, 1) = 1.0;
  p.rhs_left = Matrix::Ones(2, 1);
  const InnerResult res = inner_solve(p, InnerSolver::FftSmw);
  EXPECT_EQ(res.used, InnerSolver::Sequential);
  EXPECT_LE(evosylv::testing::rel(res.Y, inner_solve_sequential(p)), 1e-15);
}

TEST(FftSmw, UnstableRecursionFallsBack) {
  // eigenvalues far outside the BDF(6) stability sector: Y grows by orders of
  // magnitude over the window and the transformed solve is not trusted
  const Eigen::Index L = 256;
  ProjectedProblem p = scalar_problem(1.0, L);
  p.A_small.resize(2, 2);
  p.A_small << 1.0 + 0.5 * std::cos(std::numbers::pi / 4), 0.5 * std::sin(std::numbers::pi / 4),
      -0.5 * std::sin(std::numbers::pi / 4), 1.0 + 0.5 * std::cos(std::numbers::pi / 4);
  p.rhs_left = Matrix::Ones(2, 1);
  p.timeop = build_time_operator(6, L);
  const Matrix Ys = inner_solve_sequential(p);
  ASSERT_GT(Ys.norm(), 1e6);
  const InnerResult res = inner_solve(p, InnerSolver::FftSmw);
  EXPECT_LE(evosylv::testing::rel(res.Y, Ys), 1e-10);
}

TEST(FftSmw, UsesSuppliedEigendecomposition) {
  std::mt19937_64 rng(23);
  ProjectedProblem p = random_projected_problem(rng, 6, 33, 2, false);
  const Matrix Ys = inner_solve_sequential(p);
  p.eig = kernels::dense_eig(p.A_small);
  p.A_small = Matrix();
  EXPECT_LE(evosylv::testing::rel(inner_solve_fft_smw(p), Ys), 1e-10);
}

TEST(Capacitance, DiagonalStructureForFirstOrder) {
  std::mt19937_64 rng(24);
  const Eigen::Index L = 16;
  const TimeOperator top = build_time_operator(1, L);
  CVector lam(4);
  for (int i = 0; i < 4; ++i) lam(i) = Complex(1.5 + i, 0.3 * i);
  const CMatrix C = smw_capacitance(lam, top);
  ASSERT_EQ(C.rows(), 4);
  EXPECT_LE((C - CMatrix(C.diagonal().asDiagonal())).norm(), 1e-15);
  // diag(H (F^{-T} e_l . F e_1))
  CVector el = CVector::Zero(L);
  el(L - 1) = 1.0;
  CVector e1 = CVector::Zero(L);
  e1(0) = 1.0;
  const CVector w = kernels::ifft(el).cwiseProduct(kernels::fft(e1));
  for (int i = 0; i < 4; ++i) {
    Complex v = 0.0;
    for (Eigen::Index j = 0; j < L; ++j) v += w(j) / (lam(i) - top.circ_eigs(j));
    EXPECT_LE(std::abs(C(i, i) - v), 1e-13);
  }
}

#include "evosylv/errors.hpp"
#include "evosylv/timeops.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace evosylv;

TEST(Bdf, TableValues) {
  const BdfScheme b1 = bdf_coefficients(1);
  EXPECT_EQ(b1.beta, (Rational{1, 1}));
  ASSERT_EQ(b1.alphas.size(), 1u);
  EXPECT_EQ(b1.alphas[0], (Rational{1, 1}));

  const BdfScheme b2 = bdf_coefficients(2);
  EXPECT_EQ(b2.beta, (Rational{2, 3}));
  EXPECT_EQ(b2.alphas[0], (Rational{4, 3}));
  EXPECT_EQ(b2.alphas[1], (Rational{-1, 3}));

  const BdfScheme b6 = bdf_coefficients(6);
  EXPECT_EQ(b6.beta, (Rational{60, 147}));
  const std::vector<Rational> a6 = {{360, 147}, {-450, 147}, {400, 147}, {-225, 147}, {72, 147}, {-10, 147}};
  EXPECT_EQ(b6.alphas, a6);
}

TEST(Bdf, AlphasSumToOne) {
  for (int s = 1; s <= 6; ++s) EXPECT_NEAR(bdf_coefficients(s).alpha_values().sum(), 1.0, 1e-14) << s;
}

TEST(Bdf, OrderOfAccuracy) {
  // (u_k - sum alpha_j u_{k-j}) / (tau beta) is exact for polynomials of degree s
  for (int s = 1; s <= 6; ++s) {
    const BdfScheme b = bdf_coefficients(s);
    const Vector a = b.alpha_values();
    for (int deg = 0; deg <= s; ++deg) {
      auto p = [deg](double t) { return std::pow(t, deg); };
      double lhs = p(0.0);
      for (int j = 1; j <= s; ++j) lhs -= a(j - 1) * p(-static_cast<double>(j));
      const double dp = deg == 0 ? 0.0 : (deg == 1 ? 1.0 : 0.0);
      EXPECT_NEAR(lhs / b.beta_value(), dp, 1e-11) << "s=" << s << " deg=" << deg;
    }
  }
}

TEST(Bdf, UnsupportedOrders) {
  for (int s : {0, 7, -1}) {
    try {
      (void)bdf_coefficients(s);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::UnsupportedOrder);
    }
  }
}

TEST(TimeOperator, ShiftStructure) {
  const TimeOperator top = build_time_operator(1, 3);
  const Vector x = Vector::LinSpaced(3, 1.0, 3.0);
  const Vector y = top.sigma.transpose() * x;
  EXPECT_EQ(y(0), 2.0);
  EXPECT_EQ(y(1), 3.0);
  EXPECT_EQ(y(2), 0.0);
}

TEST(TimeOperator, CirculantSplitting) {
  for (int s = 1; s <= 6; ++s) {
    for (Eigen::Index l : {Eigen::Index(2 * s + 1), Eigen::Index(17), Eigen::Index(40)}) {
      const TimeOperator top = build_time_operator(s, l);
      const Matrix C = top.circulant_dense();
      const Matrix recon = C - top.corr_left * top.corr_alpha * top.corr_right.transpose();
      EXPECT_LE((recon - Matrix(top.sigma)).norm(), 1e-14) << "s=" << s << " l=" << l;
      // low-rank correction has rank s
      Eigen::FullPivLU<Matrix> lu(C - Matrix(top.sigma));
      EXPECT_EQ(lu.rank(), s);
      // C is circulant
      for (Eigen::Index j = 1; j < l; ++j) {
        for (Eigen::Index i = 0; i < l; ++i) EXPECT_EQ(C(i, j), C((i + l - 1) % l, j - 1));
      }
    }
  }
}

TEST(TimeOperator, SecondOrderFirstColumn) {
  const TimeOperator top = build_time_operator(2, 6);
  const Matrix C = Matrix(top.sigma) + top.corr_left * top.corr_alpha * top.corr_right.transpose();
  Vector expected = Vector::Zero(6);
  expected(1) = 4.0 / 3.0;
  expected(2) = -1.0 / 3.0;
  EXPECT_LE((C.col(0) - expected).norm(), 1e-15);
}

TEST(TimeOperator, AlphaToeplitz) {
  const TimeOperator top = build_time_operator(4, 20);
  const Vector a = top.scheme.alpha_values();
  for (int i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(top.corr_alpha(i, i), a(3));
    for (int j = 0; j < i; ++j) EXPECT_EQ(top.corr_alpha(i, j), 0.0);
    for (int j = i; j < 4; ++j) EXPECT_DOUBLE_EQ(top.corr_alpha(i, j), top.corr_alpha(0, j - i));
  }
}

TEST(TimeOperator, FftDiagonalisesCirculant) {
  std::mt19937_64 rng(11);
  for (int s = 1; s <= 6; ++s) {
    const TimeOperator top = build_time_operator(s, 37);
    const Vector x = evosylv::testing::random_matrix(rng, 37, 1).col(0);
    const CVector viaFft = top.apply_circulant(x.cast<Complex>());
    const Vector direct = top.circulant_dense() * x;
    EXPECT_LE((viaFft.real() - direct).norm(), 1e-12 * x.norm());
    EXPECT_LE(viaFft.imag().norm(), 1e-12 * x.norm());
  }
}

TEST(TimeOperator, TooFewSteps) {
  try {
    (void)build_time_operator(3, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewSteps);
  }
}

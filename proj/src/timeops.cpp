#include "evosylv/timeops.hpp"

#include "evosylv/errors.hpp"

#include <array>
#include <string>

namespace evosylv {

Vector BdfScheme::alpha_values() const {
  Vector a(static_cast<Eigen::Index>(alphas.size()));
  for (std::size_t i = 0; i < alphas.size(); ++i) a(static_cast<Eigen::Index>(i)) = alphas[i].value();
  return a;
}

BdfScheme bdf_coefficients(int s) {
  // Signs follow the convention u_k - sum_j alpha_j u_{k-j}.
  struct Row {
    std::int64_t den;
    std::int64_t beta;
    std::array<std::int64_t, 6> alpha;
  };
  static constexpr std::array<Row, 6> table{{
      {1, 1, {1, 0, 0, 0, 0, 0}},
      {3, 2, {4, -1, 0, 0, 0, 0}},
      {11, 6, {18, -9, 2, 0, 0, 0}},
      {25, 12, {48, -36, 16, -3, 0, 0}},
      {137, 60, {300, -300, 200, -75, 12, 0}},
      {147, 60, {360, -450, 400, -225, 72, -10}},
  }};
  if (s < 1 || s > 6) {
    throw Error(ErrorCode::UnsupportedOrder, "BDF order must be in 1..6, got " + std::to_string(s));
  }
  const Row& row = table[static_cast<std::size_t>(s - 1)];
  BdfScheme scheme;
  scheme.s = s;
  scheme.beta = {row.beta, row.den};
  for (int j = 0; j < s; ++j) scheme.alphas.push_back({row.alpha[static_cast<std::size_t>(j)], row.den});
  return scheme;
}

Matrix TimeOperator::circulant_dense() const {
  Matrix C = Matrix::Zero(ell, ell);
  for (Eigen::Index j = 0; j < ell; ++j) {
    for (Eigen::Index i = 0; i < ell; ++i) {
      C(i, j) = circ_first_col((i - j + ell) % ell);
    }
  }
  return C;
}

CVector TimeOperator::apply_circulant(const CVector& x) const {
  CVector fx = kernels::fft(x);
  return kernels::ifft(circ_eigs.cwiseProduct(fx));
}

TimeOperator build_time_operator(int s, Eigen::Index ell) {
  TimeOperator op;
  op.scheme = bdf_coefficients(s);
  if (ell <= s) {
    throw Error(ErrorCode::TooFewSteps, "need ell > s");
  }
  op.ell = ell;
  const Vector alpha = op.scheme.alpha_values();

  std::vector<Eigen::Triplet<double>> trips;
  for (int j = 1; j <= s; ++j) {
    for (Eigen::Index i = j; i < ell; ++i) trips.emplace_back(i, i - j, alpha(j - 1));
  }
  op.sigma.resize(ell, ell);
  op.sigma.setFromTriplets(trips.begin(), trips.end());
  op.sigma.makeCompressed();

  op.circ_first_col = Vector::Zero(ell);
  for (int j = 1; j <= s; ++j) op.circ_first_col(j) = alpha(j - 1);
  op.circ_eigs = kernels::fft(op.circ_first_col.cast<Complex>());

  op.corr_left = Matrix::Zero(ell, s);
  op.corr_right = Matrix::Zero(ell, s);
  op.corr_alpha = Matrix::Zero(s, s);
  for (int i = 0; i < s; ++i) {
    op.corr_left(i, i) = 1.0;
    op.corr_right(ell - s + i, i) = 1.0;
    for (int j = i; j < s; ++j) {
      // diagonal alpha_s, then alpha_{s-1}, ... alpha_1 in the top-right corner
      op.corr_alpha(i, j) = alpha(s - 1 - (j - i));
    }
  }
  return op;
}

}  // namespace evosylv

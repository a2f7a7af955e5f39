#pragma once

#include "evosylv/kernels.hpp"

#include <cstdint>
#include <vector>

namespace evosylv {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Backward differentiation formula of order s, written as
///   (u_k - sum_j alpha_j u_{k-j}) / (tau * beta) + K u_k = f_k.
struct BdfScheme {
  int s = 1;
  Rational beta{1, 1};
  std::vector<Rational> alphas;  // alpha_1 .. alpha_s

  [[nodiscard]] double beta_value() const { return beta.value(); }
  [[nodiscard]] Vector alpha_values() const;
};

/// Exact coefficient table for 1 <= s <= 6; throws UnsupportedOrder otherwise.
BdfScheme bdf_coefficients(int s);

/// The l x l time-stepping matrix Sigma = sum_j alpha_j Sigma_j, split as a
/// circulant minus a rank-s corner correction:
///   Sigma = C_s - corr_left * corr_alpha * corr_right^T.
struct TimeOperator {
  Eigen::Index ell = 0;
  BdfScheme scheme;
  SparseMatrix sigma;
  Vector circ_first_col;  // C_s e_1
  CVector circ_eigs;      // fft(C_s e_1)
  Matrix corr_left;       // l x s, [e_1 .. e_s]
  Matrix corr_alpha;      // s x s upper-triangular Toeplitz
  Matrix corr_right;      // l x s, [e_{l-s+1} .. e_l]

  [[nodiscard]] int order() const { return scheme.s; }
  /// Dense C_s, for checks on small l.
  [[nodiscard]] Matrix circulant_dense() const;
  /// C_s x computed through the FFT diagonalisation.
  [[nodiscard]] CVector apply_circulant(const CVector& x) const;
};

/// Throws TooFewSteps unless ell > s.
TimeOperator build_time_operator(int s, Eigen::Index ell);

}  // namespace evosylv

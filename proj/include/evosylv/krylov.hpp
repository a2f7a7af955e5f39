#pragma once

#include "evosylv/discretization.hpp"
#include "evosylv/kernels.hpp"

#include <memory>
#include <vector>

namespace evosylv {

/// The operator a basis is built for: Kbar plus its boundary rows.
struct KrylovOperator {
  SparseMatrix K;
  std::vector<Eigen::Index> boundary;

  /// Factorisation of K, built on first use.
  [[nodiscard]] const kernels::SparseFactorization& inverse() const;
  /// Factorisation of K - xi I.
  [[nodiscard]] kernels::SparseFactorization shifted_inverse(double xi) const;

  static KrylovOperator from_space(const SpaceOperator& op);
  /// A 1D factor whose boundary nodes are 0 and n-1.
  static KrylovOperator from_factor(const SparseMatrix& factor);

 private:
  mutable std::shared_ptr<kernels::SparseFactorization> inv_;
};

enum class BasisKind { Extended, Rational };
enum class StepStatus { Ok, Breakdown };

inline constexpr double kDeflationTol = 1e-12;

struct KrylovBasis {
  BasisKind kind = BasisKind::Extended;
  std::vector<Eigen::Index> offsets;  // block j occupies columns offsets[j] .. offsets[j+1]-1
  std::vector<Eigen::Index> first_half;  // extended: width of the K-half of each block
  Matrix V;       // n x r
  Matrix KV;      // Kbar V
  Matrix T_proj;  // V^T Kbar V
  Matrix I_proj;  // V^T (I - P) V
  Matrix Vb;      // rows of V at boundary nodes
  Matrix gamma;   // V_1^T B
  Matrix H;       // rational: block Hessenberg coefficients, r x r
  std::vector<double> poles;  // rational: xi_2, xi_3, ...

  [[nodiscard]] int blocks() const { return static_cast<int>(offsets.size()) - 1; }
  [[nodiscard]] Eigen::Index dim() const { return V.cols(); }
  /// Columns spanned by the first m blocks.
  [[nodiscard]] Eigen::Index dim(int m) const { return offsets[static_cast<std::size_t>(m)]; }
  [[nodiscard]] Eigen::Index width(int j) const {
    return offsets[static_cast<std::size_t>(j + 1)] - offsets[static_cast<std::size_t>(j)];
  }
};

/// V_1 = orth([B, Kbar^{-1} B]) with deflation.
KrylovBasis extended_arnoldi_init(const KrylovOperator& op, const Matrix& B);
/// Appends the next block built from [Kbar * first half, Kbar^{-1} * second half].
StepStatus extended_arnoldi_step(KrylovBasis& basis, const KrylovOperator& op);

/// V_1 = orth(B).
KrylovBasis rational_arnoldi_init(const KrylovOperator& op, const Matrix& B);
/// Appends orth((Kbar - xi I)^{-1} * last block).
StepStatus rational_arnoldi_step(KrylovBasis& basis, const KrylovOperator& op, double xi);

/// Recomputes T_proj, I_proj and Vb from scratch.
void project_operator(KrylovBasis& basis, const KrylovOperator& op);

struct ShiftState {
  double s_min = 0.0;
  double s_max = 0.0;
  std::vector<double> used;  // values returned by next_shift so far
  CVector ritz;
};

/// s_max from Gershgorin discs, s_min from a few inverse iterations.
ShiftState spectral_bounds(const KrylovOperator& op, int inverse_iterations = 8);

/// Greedy choice on a 1000-point geometric grid of [s_min, s_max]. The value
/// returned is sigma; the resolvent pole is xi = -sigma.
double next_shift(const ShiftState& state);

}  // namespace evosylv

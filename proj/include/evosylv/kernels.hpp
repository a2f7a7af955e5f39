#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <complex>
#include <memory>

namespace evosylv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Compressed sparse row storage, sorted column indices per row.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

namespace kernels {

struct QrResult {
  Matrix Q;  // n x k, orthonormal columns
  Matrix R;  // k x k, upper triangular with nonnegative diagonal
};

/// Thin Householder QR of an n x k matrix (k <= n).
QrResult qr_economy(const Matrix& A);

struct DeflatedBasis {
  Matrix Q;         // n x rank
  Eigen::Index rank = 0;
};

/// Rank-revealing orthonormalisation of a block: directions whose pivoted
/// R-diagonal falls below rel_tol * ||block||_F are dropped.
DeflatedBasis orthonormalize_deflate(const Matrix& block, double rel_tol);

struct EigDecomposition {
  CMatrix S;
  CVector lambdas;
  CMatrix S_inv;
  double cond_estimate = 0.0;  // ||S||_F * ||S_inv||_F
};

inline constexpr Eigen::Index kDenseEigMaxDim = 4096;
inline constexpr double kDefaultCondLimit = 1e12;

/// Eigendecomposition A = S diag(lambdas) S^{-1} of a small real matrix.
/// Symmetric input goes through the self-adjoint solver; everything else
/// through Hessenberg reduction + shifted QR. Throws NonDiagonalizable when
/// cond_estimate exceeds cond_limit.
EigDecomposition dense_eig(const Matrix& A, double cond_limit = kDefaultCondLimit);

/// Unnormalised forward DFT, X_k = sum_j x_j exp(-2 pi i jk / l), any length.
CVector fft(const CVector& v);
/// Inverse of fft (carries the 1/l factor).
CVector ifft(const CVector& v);

/// Column-wise transforms of an l x k matrix.
CMatrix fft_columns(const CMatrix& A);
CMatrix ifft_columns(const CMatrix& A);
/// Row-wise transforms of a k x l matrix.
CMatrix fft_rows(const CMatrix& A);
CMatrix ifft_rows(const CMatrix& A);

/// Sparse LU factorisation reusable across right-hand sides.
class SparseFactorization {
 public:
  explicit SparseFactorization(const SparseMatrix& A);

  [[nodiscard]] Matrix solve(const Matrix& B) const;
  [[nodiscard]] Eigen::Index size() const noexcept { return n_; }

 private:
  using ColMajor = Eigen::SparseMatrix<double, Eigen::ColMajor>;
  Eigen::Index n_ = 0;
  std::shared_ptr<Eigen::SparseLU<ColMajor, Eigen::COLAMDOrdering<int>>> lu_;
};

inline SparseFactorization sparse_factorize(const SparseMatrix& A) { return SparseFactorization(A); }
inline Matrix sparse_solve(const SparseFactorization& fact, const Matrix& B) { return fact.solve(B); }

}  // namespace kernels
}  // namespace evosylv

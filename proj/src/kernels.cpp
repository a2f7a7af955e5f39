#include "evosylv/kernels.hpp"

#include "evosylv/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>

namespace evosylv::kernels {

QrResult qr_economy(const Matrix& A) {
  const Eigen::Index n = A.rows();
  const Eigen::Index k = A.cols();
  if (k > n) {
    throw Error(ErrorCode::InvalidArgument, "qr_economy needs k <= n");
  }
  Eigen::HouseholderQR<Matrix> qr(A);
  QrResult out;
  out.Q = qr.householderQ() * Matrix::Identity(n, k);
  out.R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (out.R(j, j) < 0.0) {
      out.R.row(j) *= -1.0;
      out.Q.col(j) *= -1.0;
    }
  }
  return out;
}

DeflatedBasis orthonormalize_deflate(const Matrix& block, double rel_tol) {
  DeflatedBasis out;
  const double scale = block.norm();
  if (block.cols() == 0 || scale == 0.0 || !std::isfinite(scale)) {
    out.Q.resize(block.rows(), 0);
    return out;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(block);
  const auto& R = qr.matrixQR();
  const Eigen::Index kmax = std::min(block.rows(), block.cols());
  Eigen::Index rank = 0;
  while (rank < kmax && std::abs(R(rank, rank)) > rel_tol * scale) {
    ++rank;
  }
  out.rank = rank;
  out.Q = qr.householderQ() * Matrix::Identity(block.rows(), rank);
  return out;
}

namespace {

bool exactly_symmetric(const Matrix& A) {
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < A.rows(); ++i) {
      if (A(i, j) != A(j, i)) return false;
    }
  }
  return true;
}

}  // namespace

EigDecomposition dense_eig(const Matrix& A, double cond_limit) {
  if (A.rows() != A.cols()) {
    throw Error(ErrorCode::InvalidArgument, "dense_eig needs a square matrix");
  }
  if (A.rows() > kDenseEigMaxDim) {
    throw Error(ErrorCode::TooLarge, "dense_eig bound exceeded");
  }
  EigDecomposition out;
  const Eigen::Index k = A.rows();
  if (k == 0) {
    out.S.resize(0, 0);
    out.S_inv.resize(0, 0);
    out.lambdas.resize(0);
    return out;
  }
  if (exactly_symmetric(A)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    if (es.info() != Eigen::Success) {
      throw Error(ErrorCode::NonDiagonalizable, "symmetric eigensolver failed");
    }
    out.S = es.eigenvectors().cast<Complex>();
    out.lambdas = es.eigenvalues().cast<Complex>();
    out.S_inv = out.S.transpose();
  } else {
    Eigen::EigenSolver<Matrix> es(A, true);
    if (es.info() != Eigen::Success) {
      throw Error(ErrorCode::NonDiagonalizable, "nonsymmetric eigensolver failed");
    }
    out.S = es.eigenvectors();
    out.lambdas = es.eigenvalues();
    Eigen::PartialPivLU<CMatrix> lu(out.S);
    out.S_inv = lu.inverse();
  }
  out.cond_estimate = out.S.norm() * out.S_inv.norm();
  if (!std::isfinite(out.cond_estimate) || out.cond_estimate > cond_limit) {
    throw Error(ErrorCode::NonDiagonalizable,
                "eigenvector condition estimate " + std::to_string(out.cond_estimate));
  }
  return out;
}

CVector fft(const CVector& v) {
  // the engine cannot handle length 1, where the transform is the identity
  if (v.size() <= 1) return v;
  CVector out(v.size());
  Eigen::FFT<double> engine;
  engine.fwd(out, v);
  return out;
}

CVector ifft(const CVector& v) {
  if (v.size() <= 1) return v;
  CVector out(v.size());
  Eigen::FFT<double> engine;
  engine.inv(out, v);
  return out;
}

CMatrix fft_columns(const CMatrix& A) {
  if (A.rows() <= 1) return A;
  CMatrix out(A.rows(), A.cols());
  Eigen::FFT<double> engine;
  CVector tmp(A.rows());
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    CVector col = A.col(j);
    engine.fwd(tmp, col);
    out.col(j) = tmp;
  }
  return out;
}

CMatrix ifft_columns(const CMatrix& A) {
  if (A.rows() <= 1) return A;
  CMatrix out(A.rows(), A.cols());
  Eigen::FFT<double> engine;
  CVector tmp(A.rows());
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    CVector col = A.col(j);
    engine.inv(tmp, col);
    out.col(j) = tmp;
  }
  return out;
}

CMatrix fft_rows(const CMatrix& A) { return fft_columns(A.transpose()).transpose(); }

CMatrix ifft_rows(const CMatrix& A) { return ifft_columns(A.transpose()).transpose(); }

SparseFactorization::SparseFactorization(const SparseMatrix& A) : n_(A.rows()) {
  if (A.rows() != A.cols()) {
    throw Error(ErrorCode::InvalidArgument, "sparse_factorize needs a square matrix");
  }
  ColMajor colmajor(A);
  colmajor.makeCompressed();
  lu_ = std::make_shared<Eigen::SparseLU<ColMajor, Eigen::COLAMDOrdering<int>>>();
  lu_->analyzePattern(colmajor);
  lu_->factorize(colmajor);
  if (lu_->info() != Eigen::Success) {
    throw Error(ErrorCode::SingularMatrix, lu_->lastErrorMessage());
  }
  // SparseLU accepts exactly zero pivots on some structurally singular inputs.
  const double logdet = lu_->logAbsDeterminant();
  if (n_ > 0 && !std::isfinite(logdet)) {
    throw Error(ErrorCode::SingularMatrix, "zero pivot in sparse LU");
  }
}

Matrix SparseFactorization::solve(const Matrix& B) const {
  if (B.rows() != n_) {
    throw Error(ErrorCode::InvalidArgument, "sparse_solve dimension mismatch");
  }
  Matrix X = lu_->solve(B);
  return X;
}

}  // namespace evosylv::kernels

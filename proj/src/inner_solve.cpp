#include "evosylv/inner_solve.hpp"

#include "evosylv/errors.hpp"

#include <cmath>
#include <limits>

namespace evosylv {

const char* to_string(InnerSolver s) { return s == InnerSolver::Sequential ? "sequential" : "fft_smw"; }

Matrix inner_solve_sequential(const ProjectedProblem& prob) {
  const Eigen::Index r = prob.A_small.rows();
  const Eigen::Index L = prob.rhs_right.rows();
  const int s = prob.timeop.order();
  const Vector alpha = prob.timeop.scheme.alpha_values();
  Matrix Y = Matrix::Zero(r, L);
  if (r == 0 || L == 0) return Y;

  Eigen::PartialPivLU<Matrix> lu(prob.A_small);
  const double rc = lu.rcond();
  if (!(rc > std::numeric_limits<double>::epsilon())) {
    throw Error(ErrorCode::SingularProjectedMatrix, "reciprocal condition " + std::to_string(rc));
  }
  const Matrix G = prob.rhs_left * prob.rhs_right.transpose();
  for (Eigen::Index c = 0; c < L; ++c) {
    Vector b = G.col(c);
    for (int i = 1; i <= s && i <= c; ++i) b += alpha(i - 1) * Y.col(c - i);
    Y.col(c) = lu.solve(b);
  }
  return Y;
}

namespace {

struct Resolvent {
  CMatrix H;   // r x L, 1/(lambda_i - pi_j)
  CMatrix FP;  // s x L, row h = (F e_h)^T
  CMatrix Xa;  // L x s, F^{-1} Q alpha^T
};

Resolvent build_resolvent(const CVector& lambdas, const TimeOperator& top) {
  const Eigen::Index r = lambdas.size();
  const Eigen::Index L = top.ell;
  const int s = top.order();
  Resolvent out;
  out.H.resize(r, L);
  for (Eigen::Index j = 0; j < L; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) {
      const Complex diff = lambdas(i) - top.circ_eigs(j);
      const double scale = std::max({std::abs(lambdas(i)), std::abs(top.circ_eigs(j)), 1.0});
      if (std::abs(diff) <= 1e-14 * scale) {
        throw Error(ErrorCode::ResonantEigenvalue, "eigenvalue coincides with a circulant eigenvalue");
      }
      out.H(i, j) = 1.0 / diff;
    }
  }
  out.FP.resize(s, L);
  CMatrix X(L, s);
  for (int h = 0; h < s; ++h) {
    CVector e = CVector::Zero(L);
    e(h) = 1.0;
    out.FP.row(h) = kernels::fft(e).transpose();
    CVector eq = CVector::Zero(L);
    eq(L - s + h) = 1.0;
    X.col(h) = kernels::ifft(eq);
  }
  out.Xa = X * top.corr_alpha.transpose().cast<Complex>();
  return out;
}

// M[h + s*q] holds the r-vector (M_i(h, q))_i.
std::vector<CVector> correction_blocks(const Resolvent& R, int s) {
  std::vector<CVector> M(static_cast<std::size_t>(s * s));
  for (int q = 0; q < s; ++q) {
    for (int h = 0; h < s; ++h) {
      CVector w = R.FP.row(h).transpose().cwiseProduct(R.Xa.col(q));
      M[static_cast<std::size_t>(h + s * q)] = R.H * w;
    }
  }
  return M;
}

}  // namespace

CMatrix smw_capacitance(const CVector& lambdas, const TimeOperator& timeop) {
  const Resolvent R = build_resolvent(lambdas, timeop);
  const int s = timeop.order();
  const Eigen::Index r = lambdas.size();
  const auto M = correction_blocks(R, s);
  CMatrix C = CMatrix::Zero(s * r, s * r);
  for (int q = 0; q < s; ++q) {
    for (int h = 0; h < s; ++h) {
      const CVector& m = M[static_cast<std::size_t>(h + s * q)];
      for (Eigen::Index i = 0; i < r; ++i) C(q * r + i, h * r + i) = m(i);
    }
  }
  return C;
}

Matrix inner_solve_fft_smw(const ProjectedProblem& prob) {
  const Eigen::Index r = prob.eig ? prob.eig->lambdas.size() : prob.A_small.rows();
  const Eigen::Index L = prob.rhs_right.rows();
  const TimeOperator& top = prob.timeop;
  const int s = top.order();
  if (top.ell != L) throw Error(ErrorCode::InvalidArgument, "time operator length mismatch");
  if (r == 0 || L == 0 || prob.rhs_left.cols() == 0) return Matrix::Zero(r, L);

  kernels::EigDecomposition eig;
  if (prob.eig) {
    eig = *prob.eig;
  } else {
    try {
      eig = kernels::dense_eig(prob.A_small);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NonDiagonalizable) throw Error(ErrorCode::EigFallback, e.what());
      throw;
    }
  }
  const Resolvent R = build_resolvent(eig.lambdas, top);

  // G_hat = S^{-1} G F with G = left right^T
  const CMatrix left_hat = eig.S_inv * prob.rhs_left.cast<Complex>();
  const CMatrix right_hat = kernels::fft_columns(prob.rhs_right.cast<Complex>());
  const CMatrix Z = R.H.cwiseProduct(left_hat * right_hat.transpose());

  // P_i (I + M_i) = (Z X alpha^T)_i, one s x s system per eigenvalue
  const auto M = correction_blocks(R, s);
  const CMatrix ZXa = Z * R.Xa;
  CMatrix P(r, s);
  for (Eigen::Index i = 0; i < r; ++i) {
    CMatrix Mi = CMatrix::Identity(s, s);
    for (int q = 0; q < s; ++q) {
      for (int h = 0; h < s; ++h) Mi(h, q) += M[static_cast<std::size_t>(h + s * q)](i);
    }
    Eigen::PartialPivLU<CMatrix> lu(Mi.transpose());
    if (!(lu.rcond() > 1e-14)) throw Error(ErrorCode::EigFallback, "singular correction block");
    P.row(i) = lu.solve(ZXa.row(i).transpose()).transpose();
  }
  const CMatrix Yhat = Z - R.H.cwiseProduct(P * R.FP);
  const CMatrix Yc = eig.S * kernels::ifft_rows(Yhat);
  Matrix Y = Yc.real();
  const double imag = Yc.imag().norm();
  const double ynorm = Y.norm();
  if (!std::isfinite(imag) || !std::isfinite(ynorm) || imag > 1e-10 * ynorm) {
    throw Error(ErrorCode::EigFallback, "imaginary residue " + std::to_string(imag));
  }
  return Y;
}

InnerResult inner_solve(const ProjectedProblem& prob, InnerSolver choice) {
  if (choice == InnerSolver::FftSmw) {
    try {
      return {inner_solve_fft_smw(prob), InnerSolver::FftSmw};
    } catch (const Error& e) {
      const auto c = e.code();
      if (c != ErrorCode::EigFallback && c != ErrorCode::ResonantEigenvalue && c != ErrorCode::TooLarge) throw;
    }
  }
  return {inner_solve_sequential(prob), InnerSolver::Sequential};
}

double projected_residual(const ProjectedProblem& prob, const Matrix& Y) {
  const Matrix G = prob.rhs_left * prob.rhs_right.transpose();
  const Matrix R = prob.A_small * Y - Y * prob.timeop.sigma.transpose() - G;
  return R.norm();
}

}  // namespace evosylv

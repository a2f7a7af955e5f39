#pragma once

#include "evosylv/kernels.hpp"
#include "evosylv/timeops.hpp"

#include <optional>

namespace evosylv {

/// Reduced equation A_small Y - Y Sigma^T = rhs_left rhs_right^T.
struct ProjectedProblem {
  Matrix A_small;     // r x r
  Matrix rhs_left;    // r x q
  Matrix rhs_right;   // L x q
  TimeOperator timeop;  // built for L columns
  // Eigendecomposition of A_small when already known (tensorised path).
  std::optional<kernels::EigDecomposition> eig;
};

enum class InnerSolver { Sequential, FftSmw };

const char* to_string(InnerSolver s);

/// Column recursion with one LU of A_small.
Matrix inner_solve_sequential(const ProjectedProblem& prob);

/// Eigendecomposition of A_small, FFT in time, and a Sherman-Morrison-Woodbury
/// correction for the non-circulant corner of Sigma.
Matrix inner_solve_fft_smw(const ProjectedProblem& prob);

struct InnerResult {
  Matrix Y;
  InnerSolver used = InnerSolver::FftSmw;
};

/// Runs the requested solver; FftSmw falls back to Sequential on an
/// ill-conditioned eigenbasis, a resonant eigenvalue or a complex residue.
InnerResult inner_solve(const ProjectedProblem& prob, InnerSolver choice);

/// The s r x s r matrix N^T L^{-1} M of the correction, assembled from its
/// diagonal blocks: block (q, h) is diag_i sum_j H_ij (F e_h)_j (F^{-1} Q alpha^T)_{jq}.
CMatrix smw_capacitance(const CVector& lambdas, const TimeOperator& timeop);

/// Residual ||A Y - Y Sigma^T - rhs||_F.
double projected_residual(const ProjectedProblem& prob, const Matrix& Y);

}  // namespace evosylv

#pragma once

#include "evosylv/discretization.hpp"
#include "evosylv/inner_solve.hpp"
#include "evosylv/krylov.hpp"
#include "evosylv/timeops.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace evosylv {

enum class Layout { Full, Tensor };

/// U = V Y (full) or U = (V_{d-1} (x) ... (x) V_0) Y (tensor, first factor fastest).
/// Column c of Y is the solution at time index first_step + c.
struct FactoredSolution {
  Layout layout = Layout::Full;
  Matrix V;
  std::vector<Matrix> bases;
  Matrix Y;
  int first_step = 1;

  [[nodiscard]] Eigen::Index steps() const { return Y.cols(); }
  [[nodiscard]] Eigen::Index space_size() const;
  /// All snapshots, n^d x L. Only for small problems.
  [[nodiscard]] Matrix materialize() const;
};

/// Column k (1-based) of U without forming U.
Vector extract_snapshot(const FactoredSolution& sol, Eigen::Index k);

/// (M_{d-1} (x) ... (x) M_0) applied to every column of Y.
Matrix apply_kron(const std::vector<Matrix>& mats, const Matrix& Y);
/// Multiplies mode k of each column of Y (viewed as an r_0 x ... x r_{d-1} tensor) by M.
Matrix mode_product(const Matrix& Y, const std::vector<Eigen::Index>& dims, int k, const Matrix& M);

struct SolveReport {
  int iterations = 0;
  std::vector<double> residual_history;  // relative residual per iteration
  double delta = 0.0;
  bool converged = false;
  bool breakdown = false;
  std::vector<Eigen::Index> basis_dims;
  std::int64_t memory_units = 0;
  double wall_time = 0.0;
  InnerSolver inner_solver = InnerSolver::FftSmw;
  std::string method;
};

struct IterationInfo {
  int m = 0;
  const FactoredSolution* solution = nullptr;  // current approximation
  double residual = 0.0;                       // absolute, from the cheap formula
  double delta = 0.0;
};

struct SolveOptions {
  double tol = 1e-8;
  int m_max = 50;
  InnerSolver inner = InnerSolver::FftSmw;
  bool parallel = true;  // tensorised path: build per-direction bases concurrently
  std::function<void(const IterationInfo&)> on_iteration;
};

struct SolveResult {
  FactoredSolution solution;
  SolveReport report;
};

std::int64_t memory_units_extended(int m, Eigen::Index q, Eigen::Index N, Eigen::Index ell);
std::int64_t memory_units_rational(int m, Eigen::Index q, Eigen::Index N, Eigen::Index ell);
std::int64_t memory_units_tensor(int m, const std::vector<Eigen::Index>& q, Eigen::Index n, Eigen::Index ell);

/// Extended Krylov projection on the full space.
SolveResult solve_eksm(const SpaceOperator& op, const LowRankRhs& rhs, const TimeOperator& timeop,
                       const SolveOptions& opts);
/// Per-direction extended Krylov bases for separable data and a Kronecker-sum operator.
SolveResult solve_eksm_separable(const SpaceOperator& op, const LowRankRhs& rhs, const TimeOperator& timeop,
                                 const SolveOptions& opts);
/// Rational Krylov projection with adaptive real poles.
SolveResult solve_rksm(const SpaceOperator& op, const LowRankRhs& rhs, const TimeOperator& timeop,
                       const SolveOptions& opts);

/// ||((I - P) + tau_beta Kbar) U - U Sigma^T - rhs||_F with U materialised.
double explicit_residual(const SpaceOperator& op, const LowRankRhs& rhs, const TimeOperator& timeop,
                         const Matrix& U);

}  // namespace evosylv

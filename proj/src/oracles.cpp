#include "evosylv/oracles.hpp"

#include "evosylv/errors.hpp"

#include <cmath>

namespace evosylv {

namespace {

kernels::SparseFactorization factor_system(const SparseMatrix& A) {
  try {
    return kernels::SparseFactorization(A);
  } catch (const Error& e) {
    throw Error(ErrorCode::SingularOperator, e.what());
  }
}

}  // namespace

OracleSolution timestep_solve(const SpaceOperator& op, const LowRankRhs& rhs, const TimeOperator& timeop) {
  const Eigen::Index N = op.size();
  const Eigen::Index L = rhs.steps();
  if (timeop.ell != L) throw Error(ErrorCode::InvalidArgument, "time operator and rhs disagree on L");
  const auto lu = factor_system(op.system);
  const Vector alpha = timeop.scheme.alpha_values();
  const int s = timeop.order();
  OracleSolution out;
  out.method = OracleMethod::Timestep;
  out.first_step = rhs.first_step;
  out.U = Matrix::Zero(N, L);
  for (Eigen::Index c = 0; c < L; ++c) {
    Vector b = rhs.left * rhs.right.row(c).transpose();
    for (int i = 1; i <= s && i <= c; ++i) b += alpha(i - 1) * out.U.col(c - i);
    out.U.col(c) = lu.solve(b);
  }
  return out;
}

OracleSolution timestep_solve(const ProblemSpec& spec, const SpaceOperator& op) {
  const int s = spec.scheme.s;
  const Eigen::Index ell = spec.grid.ell;
  const Vector alpha = spec.scheme.alpha_values();
  const double tb = op.tau_beta;
  const auto lu = factor_system(op.system);
  std::vector<Vector> u = initial_history(spec);
  for (Eigen::Index k = s; k <= ell; ++k) {
    Vector b = tb * forcing_column(spec, op, k);
    for (int i = 1; i <= s; ++i) b += alpha(i - 1) * u[static_cast<std::size_t>(k - i)];
    u.push_back(lu.solve(b));
  }
  OracleSolution out;
  out.method = OracleMethod::Timestep;
  out.first_step = s;
  out.U.resize(op.size(), ell - s + 1);
  for (Eigen::Index k = s; k <= ell; ++k) out.U.col(k - s) = u[static_cast<std::size_t>(k)];
  return out;
}

OracleSolution dense_kron_solve(const SpaceOperator& op, const LowRankRhs& rhs, const TimeOperator& timeop) {
  const Eigen::Index N = op.size();
  const Eigen::Index L = rhs.steps();
  if (timeop.ell != L) throw Error(ErrorCode::InvalidArgument, "time operator and rhs disagree on L");
  if (N * L > kDenseKronMaxSize) {
    throw Error(ErrorCode::TooLarge, "n^d * L = " + std::to_string(N * L) + " exceeds the dense bound");
  }
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index c = 0; c < L; ++c) {
    for (Eigen::Index i = 0; i < N; ++i) {
      for (SparseMatrix::InnerIterator it(op.system, i); it; ++it) t.emplace_back(c * N + i, c * N + it.col(), it.value());
    }
  }
  for (Eigen::Index c = 0; c < L; ++c) {
    for (SparseMatrix::InnerIterator it(timeop.sigma, c); it; ++it) {
      for (Eigen::Index i = 0; i < N; ++i) t.emplace_back(c * N + i, it.col() * N + i, -it.value());
    }
  }
  SparseMatrix A(N * L, N * L);
  A.setFromTriplets(t.begin(), t.end());
  const auto lu = factor_system(A);
  const Matrix G = rhs.left * rhs.right.transpose();
  const Vector x = lu.solve(Eigen::Map<const Vector>(G.data(), G.size()));
  OracleSolution out;
  out.method = OracleMethod::DenseKron;
  out.first_step = rhs.first_step;
  out.U = Eigen::Map<const Matrix>(x.data(), N, L);
  return out;
}

double analytic_example1(double x, double t) { return std::sin(x) * std::exp(-t); }

}  // namespace evosylv

#pragma once

#include "evosylv/discretization.hpp"
#include "evosylv/timeops.hpp"

namespace evosylv {

enum class OracleMethod { Timestep, DenseKron, Analytic };

struct OracleSolution {
  Matrix U;  // N x L, column c is the solution at time index first_step + c
  OracleMethod method = OracleMethod::Timestep;
  int first_step = 1;
};

inline constexpr Eigen::Index kDenseKronMaxSize = 20000;

/// Sequential BDF stepping on the right-hand side of the Sylvester form.
OracleSolution timestep_solve(const SpaceOperator& op, const LowRankRhs& rhs, const TimeOperator& timeop);

/// Sequential BDF stepping straight from the problem data (sampled f and g,
/// nodal history), bypassing the low-rank right-hand side.
OracleSolution timestep_solve(const ProblemSpec& spec, const SpaceOperator& op);

/// Direct sparse solve of (I_L (x) A - Sigma (x) I_N) vec(U) = vec(rhs).
OracleSolution dense_kron_solve(const SpaceOperator& op, const LowRankRhs& rhs, const TimeOperator& timeop);

/// sin(x) exp(-t)
double analytic_example1(double x, double t);

}  // namespace evosylv

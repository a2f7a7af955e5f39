#pragma once

#include "evosylv/discretization.hpp"
#include "evosylv/inner_solve.hpp"
#include "evosylv/timeops.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace evosylv::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = g(rng);
  }
  return M;
}

/// A_small shaped like a projected operator I + tau T: the spectrum of T is
/// log-uniform in [1, 1e4]. The nonsymmetric variant pairs eigenvalues into
/// a +- ib with b <= a tan(15 deg), inside the stability sector of BDF(6), and
/// applies a mildly non-orthogonal change of basis.
inline Matrix random_projected_matrix(std::mt19937_64& rng, Eigen::Index r, bool nonsymmetric, double tau) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix B = Matrix::Zero(r, r);
  for (Eigen::Index i = 0; i < r; ++i) B(i, i) = std::pow(10.0, 4.0 * u(rng));
  if (nonsymmetric) {
    const double tmax = std::tan(15.0 * std::numbers::pi / 180.0);
    for (Eigen::Index i = 0; i + 1 < r; i += 2) {
      const double a = B(i, i);
      B(i + 1, i + 1) = a;
      const double b = a * tmax * u(rng);
      B(i, i + 1) = b;
      B(i + 1, i) = -b;
    }
  }
  const Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, r, r));
  Matrix X = qr.householderQ();
  if (nonsymmetric) {
    Matrix P = Matrix::Identity(r, r) + 0.1 / std::sqrt(static_cast<double>(r)) * random_matrix(rng, r, r);
    X = X * P;
  }
  return Matrix::Identity(r, r) + tau * X * B * X.inverse();
}

inline ProjectedProblem random_projected_problem(std::mt19937_64& rng, Eigen::Index r, Eigen::Index L, int s,
                                                 bool nonsymmetric) {
  std::uniform_int_distribution<int> qd(1, 3);
  const Eigen::Index q = qd(rng);
  ProjectedProblem p;
  p.A_small = random_projected_matrix(rng, r, nonsymmetric, 1.0 / static_cast<double>(L));
  p.rhs_left = random_matrix(rng, r, q);
  p.rhs_right = random_matrix(rng, L, q);
  p.timeop = build_time_operator(s, L);
  return p;
}

inline ProblemSpec heat_1d(Eigen::Index n, Eigen::Index ell, bool boundary_data = false) {
  ProblemSpec spec;
  spec.grid = make_grid(1, n, 0.0, std::numbers::pi, 1.0, ell);
  spec.u0 = [](std::span<const double> x) { return x[0] * (std::numbers::pi - x[0]) * std::exp(x[0]); };
  if (boundary_data) spec.g = [](std::span<const double> x, double t) { return x[0] == 0.0 ? 1.0 + t : 0.0; };
  return spec;
}

/// Heat on the unit square, non-separable u0 and a rank-two source.
inline ProblemSpec heat_2d(Eigen::Index n, Eigen::Index ell) {
  ProblemSpec spec;
  spec.grid = make_grid(2, n, 0.0, 1.0, 1.0, ell);
  spec.u0 = [](std::span<const double> x) {
    return std::sin(std::numbers::pi * x[0]) * std::sin(std::numbers::pi * x[1]) * (1.0 + x[0] * x[1]);
  };
  spec.f = [](std::span<const double> x, double t) { return (1.0 + t) * x[0] * (1.0 - x[0]) + t * t * x[1]; };
  return spec;
}

/// 1D convection-diffusion with a variable wind and boundary data at x = 0.
inline ProblemSpec convdiff_1d(Eigen::Index n, Eigen::Index ell, double eps) {
  ProblemSpec spec;
  spec.kind = ProblemKind::ConvectionDiffusion;
  spec.epsilon = eps;
  spec.grid = make_grid(1, n, 0.0, 1.0, 1.0, ell);
  spec.wind = {{[](double x) { return 1.0 + x; }}};
  spec.u0 = [](std::span<const double> x) { return x[0] == 0.0 ? 1.0 : std::sin(3.0 * x[0]); };
  spec.g = [](std::span<const double> x, double) { return x[0] == 0.0 ? 1.0 : 0.0; };
  return spec;
}

/// Example-3 style cavity with a smaller grid.
inline ProblemSpec convdiff_2d(Eigen::Index n, Eigen::Index ell, double eps) {
  ProblemSpec spec;
  spec.kind = ProblemKind::ConvectionDiffusion;
  spec.epsilon = eps;
  spec.grid = make_grid(2, n, 0.0, 1.0, 1.0, ell);
  spec.wind = {{[](double x) { return 1.0 - x * x; }, [](double y) { return 2.0 * y; }},
               {[](double x) { return -2.0 * x; }, [](double y) { return 1.0 - y * y; }}};
  spec.g = [](std::span<const double> x, double) { return x[0] == 0.0 ? 1.0 : 0.0; };
  spec.u0 = [](std::span<const double> x) { return x[0] == 0.0 ? 1.0 : 0.0; };
  return spec;
}

inline double rel(const Matrix& a, const Matrix& b) {
  const double nb = b.norm();
  return nb > 0.0 ? (a - b).norm() / nb : (a - b).norm();
}

}  // namespace evosylv::testing

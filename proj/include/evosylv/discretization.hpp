#pragma once

#include "evosylv/kernels.hpp"
#include "evosylv/timeops.hpp"

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace evosylv {

struct Grid {
  int d = 1;
  Eigen::Index n = 3;
  std::vector<std::pair<double, double>> domain;  // one interval per direction
  double T = 1.0;
  Eigen::Index ell = 1;

  [[nodiscard]] double h(int dim) const;
  [[nodiscard]] double tau() const { return T / static_cast<double>(ell); }
  [[nodiscard]] double time(Eigen::Index k) const { return static_cast<double>(k) * tau(); }
  [[nodiscard]] Vector nodes(int dim) const;
  [[nodiscard]] Eigen::Index total_nodes() const;
  /// Throws InvalidArgument / UnsupportedDimension on a malformed grid.
  void validate() const;
};

/// Same interval in every direction.
Grid make_grid(int d, Eigen::Index n, double a, double b, double T, Eigen::Index ell);

using ScalarFn = std::function<double(double)>;
using SpaceFn = std::function<double(std::span<const double>)>;
using SpaceTimeFn = std::function<double(std::span<const double>, double)>;

enum class ProblemKind { Heat, ConvectionDiffusion };

/// time(t) * prod_k space[k](x_k)
struct SeparableTerm {
  std::vector<ScalarFn> space;
  ScalarFn time;
};

/// u0 = prod_k u0[k](x_k) (empty u0 means u0 = 0), f = sum of terms, g = 0.
struct SeparableData {
  std::vector<ScalarFn> u0;
  std::vector<SeparableTerm> f;
};

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Heat;
  double epsilon = 1.0;
  // wind[i][k] is the x_k factor of component w_i; an empty function means 1.
  // An empty outer vector means no convection.
  std::vector<std::vector<ScalarFn>> wind;
  SpaceFn u0;                          // empty: zero
  std::optional<Vector> u0_values;     // nodal values, overrides u0
  SpaceTimeFn f;                       // empty: zero
  SpaceTimeFn g;                       // Dirichlet data, empty: zero
  std::vector<Vector> extra_initial;   // u_1 .. u_{s-1} for BDF(s)
  std::optional<SeparableData> separable;
  Grid grid;
  BdfScheme scheme = bdf_coefficients(1);
  double compress_tol = 1e-12;

  [[nodiscard]] double tau_beta() const { return grid.tau() * scheme.beta_value(); }
  [[nodiscard]] bool wind_aligned() const;
};

struct SpaceOperator {
  int d = 1;
  Eigen::Index n = 0;
  double tau_beta = 1.0;
  std::vector<SparseMatrix> factors;  // 1D factors when assembled is their Kronecker sum
  bool kronecker_sum = false;
  SparseMatrix assembled;             // Kbar_d
  SparseMatrix system;                // (I - P_d) + tau_beta * Kbar_d
  std::vector<Eigen::Index> boundary_indices;

  [[nodiscard]] Eigen::Index size() const { return assembled.rows(); }
  /// 1 on interior nodes, 0 on boundary nodes.
  [[nodiscard]] Vector interior_indicator() const;
};

struct LowRankRhs {
  Matrix left;   // N x q, [history, F1]
  Matrix right;  // L x q, [e_1..e_s, tau_beta F2]
  std::optional<std::vector<Matrix>> separable;  // X_k with kron(X_{d-1},..,X_0) = left
  int first_step = 1;   // time index of the first unknown column (s)
  Eigen::Index history_columns = 0;

  [[nodiscard]] Eigen::Index steps() const { return right.rows(); }
  /// ||left * right^T||_F without forming the product.
  [[nodiscard]] double norm() const;
  [[nodiscard]] Matrix dense() const { return left * right.transpose(); }
  /// Drops columns whose right factor is exactly zero, and the separable factors.
  [[nodiscard]] LowRankRhs compact() const;
};

/// Negative Laplacian stencil (-1, 2, -1)/h^2; rows 0 and n-1 truncated.
SparseMatrix laplacian_1d(Eigen::Index n, double h);
/// Centred difference (-1, 0, 1)/(2h); rows 0 and n-1 truncated.
SparseMatrix first_derivative_1d(Eigen::Index n, double h);
/// Replaces rows 0 and n-1 with e_1^T/(tau beta) and e_n^T/(tau beta).
SparseMatrix modify_for_boundary(const SparseMatrix& K, double tau_beta);
SparseMatrix zero_boundary_rows(const SparseMatrix& B);

SparseMatrix kron(const SparseMatrix& A, const SparseMatrix& B);
SparseMatrix speye(Eigen::Index n);
SparseMatrix spdiag(const Vector& v);
/// Kronecker sum kron(I,..,F_0) + ... + kron(F_{d-1},..,I), first factor fastest.
SparseMatrix kronecker_sum(const std::vector<SparseMatrix>& factors);
/// Kronecker product with the first factor fastest: kron(M[d-1], ..., M[0]).
Matrix kron_fastest_first(const std::vector<Matrix>& mats);

std::vector<Eigen::Index> boundary_indices(int d, Eigen::Index n);

/// Grid sampling with the first coordinate fastest.
Vector sample(const Grid& grid, const SpaceFn& fn);
Vector sample(const Grid& grid, const SpaceTimeFn& fn, double t);

SpaceOperator assemble_space_operator(const ProblemSpec& spec);
LowRankRhs assemble_rhs(const ProblemSpec& spec, const SpaceOperator& op);

/// Nodal history u_0 .. u_{s-1}; throws MissingInitialValues.
std::vector<Vector> initial_history(const ProblemSpec& spec);

/// Forcing f_k at time index k: interior rows sample f, boundary rows carry
/// the Dirichlet data so that the boundary equations reproduce g(t_k).
Vector forcing_column(const ProblemSpec& spec, const SpaceOperator& op, Eigen::Index k);

/// Truncated SVD: minimal rank with ||F - F1 F2^T||_F <= tol ||F||_F.
std::pair<Matrix, Matrix> compress_snapshots(const Matrix& F, double tol);

}  // namespace evosylv

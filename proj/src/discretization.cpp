#include "evosylv/discretization.hpp"

#include "evosylv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <string>
#include <unordered_map>

namespace evosylv {

double Grid::h(int dim) const {
  const auto& [a, b] = domain.at(static_cast<std::size_t>(dim));
  return (b - a) / static_cast<double>(n - 1);
}

Vector Grid::nodes(int dim) const {
  const double a = domain.at(static_cast<std::size_t>(dim)).first;
  const double step = h(dim);
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = a + static_cast<double>(i) * step;
  return x;
}

Eigen::Index Grid::total_nodes() const {
  Eigen::Index total = 1;
  for (int k = 0; k < d; ++k) total *= n;
  return total;
}

void Grid::validate() const {
  if (d < 1 || d > 3) {
    throw Error(ErrorCode::UnsupportedDimension, "d must be 1, 2 or 3, got " + std::to_string(d));
  }
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "need n >= 3");
  if (ell < 1) throw Error(ErrorCode::InvalidArgument, "need ell >= 1");
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "need T > 0");
  if (domain.size() != static_cast<std::size_t>(d)) {
    throw Error(ErrorCode::InvalidArgument, "domain must have one interval per direction");
  }
  for (const auto& [a, b] : domain) {
    if (!(b > a)) throw Error(ErrorCode::InvalidArgument, "empty interval in domain");
  }
}

Grid make_grid(int d, Eigen::Index n, double a, double b, double T, Eigen::Index ell) {
  Grid g;
  g.d = d;
  g.n = n;
  g.domain.assign(static_cast<std::size_t>(std::max(d, 0)), {a, b});
  g.T = T;
  g.ell = ell;
  g.validate();
  return g;
}

bool ProblemSpec::wind_aligned() const {
  for (std::size_t i = 0; i < wind.size(); ++i) {
    for (std::size_t k = 0; k < wind[i].size(); ++k) {
      if (k != i && wind[i][k]) return false;
    }
  }
  return true;
}

Vector SpaceOperator::interior_indicator() const {
  Vector v = Vector::Ones(size());
  for (Eigen::Index j : boundary_indices) v(j) = 0.0;
  return v;
}

double LowRankRhs::norm() const {
  if (left.cols() == 0) return 0.0;
  const Matrix LL = left.transpose() * left;
  const Matrix RR = right.transpose() * right;
  return std::sqrt(std::max(0.0, LL.cwiseProduct(RR).sum()));
}

LowRankRhs LowRankRhs::compact() const {
  std::vector<Eigen::Index> keep;
  Eigen::Index kept_history = 0;
  for (Eigen::Index c = 0; c < right.cols(); ++c) {
    if (right.col(c).squaredNorm() > 0.0 && left.col(c).squaredNorm() > 0.0) {
      keep.push_back(c);
      if (c < history_columns) ++kept_history;
    }
  }
  LowRankRhs out;
  out.first_step = first_step;
  out.history_columns = kept_history;
  out.left.resize(left.rows(), static_cast<Eigen::Index>(keep.size()));
  out.right.resize(right.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.left.col(static_cast<Eigen::Index>(i)) = left.col(keep[i]);
    out.right.col(static_cast<Eigen::Index>(i)) = right.col(keep[i]);
  }
  return out;
}

SparseMatrix laplacian_1d(Eigen::Index n, double h) {
  const double c = 1.0 / (h * h);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(3 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i > 0) t.emplace_back(i, i - 1, -c);
    t.emplace_back(i, i, 2.0 * c);
    if (i + 1 < n) t.emplace_back(i, i + 1, -c);
  }
  SparseMatrix K(n, n);
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

SparseMatrix first_derivative_1d(Eigen::Index n, double h) {
  const double c = 1.0 / (2.0 * h);
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i > 0) t.emplace_back(i, i - 1, -c);
    if (i + 1 < n) t.emplace_back(i, i + 1, c);
  }
  SparseMatrix B(n, n);
  B.setFromTriplets(t.begin(), t.end());
  return B;
}

SparseMatrix modify_for_boundary(const SparseMatrix& K, double tau_beta) {
  if (!(tau_beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau_beta must be positive");
  const Eigen::Index n = K.rows();
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    for (SparseMatrix::InnerIterator it(K, i); it; ++it) t.emplace_back(i, it.col(), it.value());
  }
  t.emplace_back(0, 0, 1.0 / tau_beta);
  t.emplace_back(n - 1, n - 1, 1.0 / tau_beta);
  SparseMatrix out(n, K.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SparseMatrix zero_boundary_rows(const SparseMatrix& B) {
  const Eigen::Index n = B.rows();
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    for (SparseMatrix::InnerIterator it(B, i); it; ++it) t.emplace_back(i, it.col(), it.value());
  }
  SparseMatrix out(n, B.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SparseMatrix kron(const SparseMatrix& A, const SparseMatrix& B) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(A.nonZeros() * B.nonZeros()));
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (SparseMatrix::InnerIterator a(A, i); a; ++a) {
      for (Eigen::Index k = 0; k < B.rows(); ++k) {
        for (SparseMatrix::InnerIterator b(B, k); b; ++b) {
          t.emplace_back(i * B.rows() + k, a.col() * B.cols() + b.col(), a.value() * b.value());
        }
      }
    }
  }
  SparseMatrix out(A.rows() * B.rows(), A.cols() * B.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SparseMatrix speye(Eigen::Index n) {
  SparseMatrix I(n, n);
  I.setIdentity();
  return I;
}

SparseMatrix spdiag(const Vector& v) {
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index i = 0; i < v.size(); ++i) t.emplace_back(i, i, v(i));
  SparseMatrix D(v.size(), v.size());
  D.setFromTriplets(t.begin(), t.end());
  return D;
}

SparseMatrix kronecker_sum(const std::vector<SparseMatrix>& factors) {
  const std::size_t d = factors.size();
  Eigen::Index total = 1;
  for (const auto& F : factors) total *= F.rows();
  SparseMatrix sum(total, total);
  Eigen::Index inner = 1;
  for (std::size_t i = 0; i < d; ++i) {
    const Eigen::Index outer = total / (inner * factors[i].rows());
    SparseMatrix term = kron(speye(outer), kron(factors[i], speye(inner)));
    sum += term;
    inner *= factors[i].rows();
  }
  sum.makeCompressed();
  return sum;
}

Matrix kron_fastest_first(const std::vector<Matrix>& mats) {
  Matrix acc = Matrix::Ones(1, 1);
  for (const Matrix& M : mats) {
    Matrix next(M.rows() * acc.rows(), M.cols() * acc.cols());
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      for (Eigen::Index i = 0; i < M.rows(); ++i) {
        next.block(i * acc.rows(), j * acc.cols(), acc.rows(), acc.cols()) = M(i, j) * acc;
      }
    }
    acc = std::move(next);
  }
  return acc;
}

std::vector<Eigen::Index> boundary_indices(int d, Eigen::Index n) {
  Eigen::Index total = 1;
  for (int k = 0; k < d; ++k) total *= n;
  std::vector<Eigen::Index> out;
  for (Eigen::Index idx = 0; idx < total; ++idx) {
    Eigen::Index rem = idx;
    bool on_boundary = false;
    for (int k = 0; k < d; ++k) {
      const Eigen::Index i = rem % n;
      rem /= n;
      if (i == 0 || i == n - 1) on_boundary = true;
    }
    if (on_boundary) out.push_back(idx);
  }
  return out;
}

namespace {

template <class Fn>
Vector sample_impl(const Grid& grid, Fn&& fn) {
  std::vector<Vector> nodes;
  for (int k = 0; k < grid.d; ++k) nodes.push_back(grid.nodes(k));
  const Eigen::Index total = grid.total_nodes();
  Vector out(total);
  std::vector<double> x(static_cast<std::size_t>(grid.d));
  for (Eigen::Index idx = 0; idx < total; ++idx) {
    Eigen::Index rem = idx;
    for (int k = 0; k < grid.d; ++k) {
      x[static_cast<std::size_t>(k)] = nodes[static_cast<std::size_t>(k)](rem % grid.n);
      rem /= grid.n;
    }
    out(idx) = fn(std::span<const double>(x));
  }
  return out;
}

Vector sample_factor(const Grid& grid, int dim, const ScalarFn& fn) {
  Vector x = grid.nodes(dim);
  if (!fn) return Vector::Ones(x.size());
  return x.unaryExpr([&](double v) { return fn(v); });
}

// g at time t on boundary nodes, zero elsewhere.
Vector boundary_sample(const ProblemSpec& spec, const SpaceOperator& op, double t) {
  Vector G = Vector::Zero(op.size());
  if (!spec.g) return G;
  std::vector<Vector> nodes;
  for (int k = 0; k < spec.grid.d; ++k) nodes.push_back(spec.grid.nodes(k));
  std::vector<double> x(static_cast<std::size_t>(spec.grid.d));
  for (Eigen::Index idx : op.boundary_indices) {
    Eigen::Index rem = idx;
    for (int k = 0; k < spec.grid.d; ++k) {
      x[static_cast<std::size_t>(k)] = nodes[static_cast<std::size_t>(k)](rem % spec.grid.n);
      rem /= spec.grid.n;
    }
    G(idx) = spec.g(std::span<const double>(x), t);
  }
  return G;
}

}  // namespace

Vector sample(const Grid& grid, const SpaceFn& fn) {
  if (!fn) return Vector::Zero(grid.total_nodes());
  return sample_impl(grid, fn);
}

Vector sample(const Grid& grid, const SpaceTimeFn& fn, double t) {
  if (!fn) return Vector::Zero(grid.total_nodes());
  return sample_impl(grid, [&](std::span<const double> x) { return fn(x, t); });
}

SpaceOperator assemble_space_operator(const ProblemSpec& spec) {
  const Grid& grid = spec.grid;
  grid.validate();
  const int d = grid.d;
  const Eigen::Index n = grid.n;
  const double tb = spec.tau_beta();
  const bool convection = spec.kind == ProblemKind::ConvectionDiffusion;
  if (convection && !(spec.epsilon > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  }
  const double eps = convection ? spec.epsilon : 1.0;

  SpaceOperator op;
  op.d = d;
  op.n = n;
  op.tau_beta = tb;
  op.boundary_indices = boundary_indices(d, n);

  std::vector<SparseMatrix> diffusion;
  for (int k = 0; k < d; ++k) {
    SparseMatrix K = laplacian_1d(n, grid.h(k));
    K *= eps;
    diffusion.push_back(modify_for_boundary(K, tb));
  }

  const bool has_wind = convection && !spec.wind.empty();
  if (has_wind) {
    if (spec.wind.size() != static_cast<std::size_t>(d)) {
      throw Error(ErrorCode::NonSeparableWind, "wind needs one component per direction");
    }
    for (const auto& comp : spec.wind) {
      if (comp.size() != static_cast<std::size_t>(d)) {
        throw Error(ErrorCode::NonSeparableWind, "each wind component needs one factor per direction");
      }
    }
  }

  if (!has_wind || spec.wind_aligned()) {
    op.factors = diffusion;
    if (has_wind) {
      for (int i = 0; i < d; ++i) {
        const auto& w = spec.wind[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
        if (!w) {
          op.factors[static_cast<std::size_t>(i)] += zero_boundary_rows(first_derivative_1d(n, grid.h(i)));
        } else {
          op.factors[static_cast<std::size_t>(i)] +=
              SparseMatrix(spdiag(sample_factor(grid, i, w)) * zero_boundary_rows(first_derivative_1d(n, grid.h(i))));
        }
      }
    }
    op.kronecker_sum = true;
    op.assembled = kronecker_sum(op.factors);
  } else {
    op.factors = diffusion;
    op.kronecker_sum = false;
    op.assembled = kronecker_sum(diffusion);
    for (int i = 0; i < d; ++i) {
      SparseMatrix term = speye(1);
      for (int k = 0; k < d; ++k) {
        const auto& w = spec.wind[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        SparseMatrix M = spdiag(sample_factor(grid, k, w));
        if (k == i) M = M * zero_boundary_rows(first_derivative_1d(n, grid.h(k)));
        term = kron(M, term);
      }
      op.assembled += term;
    }
  }
  op.assembled.prune(0.0);
  op.assembled.makeCompressed();
  op.system = spdiag(op.interior_indicator());
  op.system += tb * op.assembled;
  op.system.makeCompressed();
  return op;
}

std::vector<Vector> initial_history(const ProblemSpec& spec) {
  const int s = spec.scheme.s;
  const Eigen::Index N = spec.grid.total_nodes();
  std::vector<Vector> hist;
  if (spec.u0_values) {
    if (spec.u0_values->size() != N) throw Error(ErrorCode::InvalidArgument, "u0_values has wrong length");
    hist.push_back(*spec.u0_values);
  } else {
    hist.push_back(sample(spec.grid, spec.u0));
  }
  if (s > 1) {
    if (spec.extra_initial.size() < static_cast<std::size_t>(s - 1)) {
      throw Error(ErrorCode::MissingInitialValues,
                  "BDF(" + std::to_string(s) + ") needs " + std::to_string(s - 1) + " extra initial values");
    }
    for (int i = 0; i < s - 1; ++i) {
      const Vector& v = spec.extra_initial[static_cast<std::size_t>(i)];
      if (v.size() != N) throw Error(ErrorCode::InvalidArgument, "extra initial value has wrong length");
      hist.push_back(v);
    }
  }
  return hist;
}

Vector forcing_column(const ProblemSpec& spec, const SpaceOperator& op, Eigen::Index k) {
  const double tk = spec.grid.time(k);
  Vector fk = sample(spec.grid, spec.f, tk);
  if (!spec.g) {
    for (Eigen::Index j : op.boundary_indices) fk(j) = 0.0;
    return fk;
  }
  const Vector Gk = boundary_sample(spec, op, tk);
  Vector b = op.system * Gk;
  const Vector alpha = spec.scheme.alpha_values();
  for (int i = 1; i <= spec.scheme.s; ++i) {
    b -= alpha(i - 1) * boundary_sample(spec, op, spec.grid.time(k - i));
  }
  for (Eigen::Index j : op.boundary_indices) fk(j) = b(j) / op.tau_beta;
  return fk;
}

std::pair<Matrix, Matrix> compress_snapshots(const Matrix& F, double tol) {
  const Eigen::Index N = F.rows();
  const Eigen::Index L = F.cols();
  const double total = F.norm();
  if (L == 0 || total == 0.0) return {Matrix(N, 0), Matrix(L, 0)};

  // Collapse exactly repeated columns first: F = U * Sel with Sel a 0/1 selector.
  std::unordered_map<std::size_t, std::vector<Eigen::Index>> buckets;
  std::vector<Eigen::Index> owner(static_cast<std::size_t>(L));
  std::vector<Eigen::Index> unique_cols;
  for (Eigen::Index j = 0; j < L; ++j) {
    std::size_t hash = 1469598103934665603ULL;
    for (Eigen::Index i = 0; i < N; ++i) {
      std::uint64_t bits;
      const double v = F(i, j) == 0.0 ? 0.0 : F(i, j);
      std::memcpy(&bits, &v, sizeof bits);
      hash = (hash ^ bits) * 1099511628211ULL;
    }
    auto& bucket = buckets[hash];
    Eigen::Index found = -1;
    for (Eigen::Index u : bucket) {
      if (F.col(unique_cols[static_cast<std::size_t>(u)]) == F.col(j)) {
        found = u;
        break;
      }
    }
    if (found < 0) {
      found = static_cast<Eigen::Index>(unique_cols.size());
      unique_cols.push_back(j);
      bucket.push_back(found);
    }
    owner[static_cast<std::size_t>(j)] = found;
  }
  const Eigen::Index nu = static_cast<Eigen::Index>(unique_cols.size());
  Vector counts = Vector::Zero(nu);
  for (Eigen::Index j = 0; j < L; ++j) counts(owner[static_cast<std::size_t>(j)]) += 1.0;
  Matrix U(N, nu);
  for (Eigen::Index u = 0; u < nu; ++u) U.col(u) = F.col(unique_cols[static_cast<std::size_t>(u)]) * std::sqrt(counts(u));

  Eigen::BDCSVD<Matrix> svd(U, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  const Eigen::Index kmax = sigma.size();
  // smallest k whose discarded tail is within tol
  Eigen::Index rank = kmax;
  double tail = 0.0;
  for (Eigen::Index k = kmax; k > 0; --k) {
    tail += sigma(k - 1) * sigma(k - 1);
    if (std::sqrt(tail) > tol * total) break;
    rank = k - 1;
  }
  Matrix F1 = svd.matrixU().leftCols(rank) * sigma.head(rank).asDiagonal();
  Matrix F2(L, rank);
  const Matrix Vt = svd.matrixV().leftCols(rank);
  for (Eigen::Index j = 0; j < L; ++j) {
    const Eigen::Index u = owner[static_cast<std::size_t>(j)];
    F2.row(j) = Vt.row(u) / std::sqrt(counts(u));
  }
  return {F1, F2};
}

namespace {

LowRankRhs assemble_separable(const ProblemSpec& spec, const SpaceOperator& op) {
  const SeparableData& sep = *spec.separable;
  const Grid& grid = spec.grid;
  const int d = grid.d;
  if (spec.scheme.s != 1) throw Error(ErrorCode::NotSeparable, "separable data supported for s = 1");
  if (spec.g) throw Error(ErrorCode::NotSeparable, "separable data need homogeneous boundary values");
  if (!sep.u0.empty() && sep.u0.size() != static_cast<std::size_t>(d)) {
    throw Error(ErrorCode::NotSeparable, "u0 needs one factor per direction");
  }
  const bool has_u0 = !sep.u0.empty();
  const Eigen::Index nterms = static_cast<Eigen::Index>(sep.f.size());
  const Eigen::Index q = (has_u0 ? 1 : 0) + nterms;

  LowRankRhs rhs;
  rhs.first_step = 1;
  rhs.history_columns = has_u0 ? 1 : 0;
  const Eigen::Index L = grid.ell;
  if (q == 0) {
    rhs.left.resize(op.size(), 0);
    rhs.right.resize(L, 0);
    rhs.separable = std::vector<Matrix>(static_cast<std::size_t>(d), Matrix(grid.n, 0));
    return rhs;
  }
  std::vector<Matrix> X;
  for (int k = 0; k < d; ++k) {
    Matrix Xk(grid.n, q);
    Eigen::Index c = 0;
    if (has_u0) {
      Vector v = sample_factor(grid, k, sep.u0[static_cast<std::size_t>(k)]);
      const double scale = std::max(v.cwiseAbs().maxCoeff(), 1.0);
      if (std::abs(v(0)) > 1e-13 * scale || std::abs(v(grid.n - 1)) > 1e-13 * scale) {
        throw Error(ErrorCode::NotSeparable, "separable u0 must vanish on the boundary");
      }
      v(0) = 0.0;
      v(grid.n - 1) = 0.0;
      Xk.col(c++) = v;
    }
    for (const SeparableTerm& term : sep.f) {
      if (term.space.size() != static_cast<std::size_t>(d)) {
        throw Error(ErrorCode::NotSeparable, "forcing term needs one factor per direction");
      }
      Vector v = sample_factor(grid, k, term.space[static_cast<std::size_t>(k)]);
      v(0) = 0.0;
      v(grid.n - 1) = 0.0;
      Xk.col(c++) = v;
    }
    X.push_back(std::move(Xk));
  }
  Eigen::Index total_cols = 1;
  for (int k = 0; k < d; ++k) total_cols *= q;
  rhs.right = Matrix::Zero(L, total_cols);
  if (has_u0) rhs.right(0, 0) = 1.0;
  const double tb = spec.tau_beta();
  for (Eigen::Index t = 0; t < nterms; ++t) {
    const Eigen::Index c = (has_u0 ? 1 : 0) + t;
    Eigen::Index idx = 0;
    Eigen::Index stride = 1;
    for (int k = 0; k < d; ++k) {
      idx += c * stride;
      stride *= q;
    }
    const ScalarFn& time = sep.f[static_cast<std::size_t>(t)].time;
    for (Eigen::Index row = 0; row < L; ++row) {
      const double tk = grid.time(row + 1);
      rhs.right(row, idx) = tb * (time ? time(tk) : 1.0);
    }
  }
  rhs.left = kron_fastest_first(X);
  rhs.separable = std::move(X);
  return rhs;
}

}  // namespace

LowRankRhs assemble_rhs(const ProblemSpec& spec, const SpaceOperator& op) {
  if (spec.separable) return assemble_separable(spec, op);

  const int s = spec.scheme.s;
  const Eigen::Index ell = spec.grid.ell;
  if (ell <= s - 1) throw Error(ErrorCode::TooFewSteps, "need ell >= s");
  const Eigen::Index L = ell - s + 1;
  const std::vector<Vector> hist = initial_history(spec);
  const Vector alpha = spec.scheme.alpha_values();
  const double tb = spec.tau_beta();

  std::vector<Vector> hcols;
  std::vector<Eigen::Index> hpos;
  for (int c = 1; c <= s; ++c) {
    Vector h = Vector::Zero(op.size());
    for (int i = c; i <= s; ++i) h += alpha(i - 1) * hist[static_cast<std::size_t>(s - 1 + c - i)];
    if (h.squaredNorm() > 0.0 && c <= L) {
      hcols.push_back(std::move(h));
      hpos.push_back(c - 1);
    }
  }

  Matrix F1(op.size(), 0);
  Matrix F2(L, 0);
  if (spec.f || spec.g) {
    Matrix F(op.size(), L);
    for (Eigen::Index c = 0; c < L; ++c) F.col(c) = forcing_column(spec, op, s + c);
    std::tie(F1, F2) = compress_snapshots(F, spec.compress_tol);
  }

  const Eigen::Index nh = static_cast<Eigen::Index>(hcols.size());
  LowRankRhs rhs;
  rhs.first_step = s;
  rhs.history_columns = nh;
  rhs.left.resize(op.size(), nh + F1.cols());
  rhs.right = Matrix::Zero(L, nh + F1.cols());
  for (Eigen::Index c = 0; c < nh; ++c) {
    rhs.left.col(c) = hcols[static_cast<std::size_t>(c)];
    rhs.right(hpos[static_cast<std::size_t>(c)], c) = 1.0;
  }
  rhs.left.rightCols(F1.cols()) = F1;
  rhs.right.rightCols(F1.cols()) = tb * F2;
  return rhs;
}

}  // namespace evosylv

#include "evosylv/krylov.hpp"

#include "evosylv/errors.hpp"

#include <cmath>
#include <limits>

namespace evosylv {

const kernels::SparseFactorization& KrylovOperator::inverse() const {
  if (!inv_) {
    try {
      inv_ = std::make_shared<kernels::SparseFactorization>(K);
    } catch (const Error& e) {
      throw Error(ErrorCode::SingularOperator, e.what());
    }
  }
  return *inv_;
}

kernels::SparseFactorization KrylovOperator::shifted_inverse(double xi) const {
  SparseMatrix A = K;
  for (Eigen::Index i = 0; i < A.rows(); ++i) A.coeffRef(i, i) -= xi;
  try {
    return kernels::SparseFactorization(A);
  } catch (const Error& e) {
    throw Error(ErrorCode::ShiftSingular, e.what());
  }
}

KrylovOperator KrylovOperator::from_space(const SpaceOperator& op) {
  KrylovOperator k;
  k.K = op.assembled;
  k.boundary = op.boundary_indices;
  return k;
}

KrylovOperator KrylovOperator::from_factor(const SparseMatrix& factor) {
  KrylovOperator k;
  k.K = factor;
  k.boundary = {0, factor.rows() - 1};
  return k;
}

namespace {

Matrix boundary_rows(const Matrix& V, const std::vector<Eigen::Index>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), V.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = V.row(idx[i]);
  return out;
}

// Two classical Gram-Schmidt passes; W is overwritten by its orthogonal part.
Matrix orthogonalize(const Matrix& V, Matrix& W) {
  if (V.cols() == 0) return Matrix(0, W.cols());
  Matrix c = V.transpose() * W;
  W.noalias() -= V * c;
  Matrix c2 = V.transpose() * W;
  W.noalias() -= V * c2;
  return c + c2;
}

// Orthonormal basis for the part of W not already in V. Directions whose
// remaining weight is below kDeflationTol * scale are dropped.
Matrix new_directions(const Matrix& V, Matrix& W, double scale) {
  const double rem = W.norm();
  if (rem == 0.0 || scale == 0.0 || !std::isfinite(rem)) return Matrix(W.rows(), 0);
  kernels::DeflatedBasis q = kernels::orthonormalize_deflate(W, kDeflationTol * scale / rem);
  if (q.rank == 0) return Matrix(W.rows(), 0);
  Matrix Q = q.Q;
  if (V.cols() > 0) {
    Q.noalias() -= V * (V.transpose() * Q);
  }
  return kernels::qr_economy(Q).Q;
}

void refresh_boundary(KrylovBasis& basis, const KrylovOperator& op) {
  basis.Vb = boundary_rows(basis.V, op.boundary);
  basis.I_proj = Matrix::Identity(basis.dim(), basis.dim()) - basis.Vb.transpose() * basis.Vb;
}

void append_block(KrylovBasis& basis, const KrylovOperator& op, const Matrix& Q) {
  const Eigen::Index r = basis.dim();
  const Eigen::Index w = Q.cols();
  const Matrix KQ = op.K * Q;
  Matrix T(r + w, r + w);
  T.topLeftCorner(r, r) = basis.T_proj;
  T.topRightCorner(r, w) = basis.V.transpose() * KQ;
  T.bottomLeftCorner(w, r) = Q.transpose() * basis.KV;
  T.bottomRightCorner(w, w) = Q.transpose() * KQ;
  basis.T_proj = std::move(T);

  Matrix V(basis.V.rows(), r + w);
  V << basis.V, Q;
  basis.V = std::move(V);
  Matrix KV(basis.KV.rows(), r + w);
  KV << basis.KV, KQ;
  basis.KV = std::move(KV);
  basis.offsets.push_back(r + w);
  refresh_boundary(basis, op);
}

void start_basis(KrylovBasis& basis, const KrylovOperator& op, const Matrix& V) {
  basis.V = V;
  basis.KV = op.K * V;
  basis.T_proj = V.transpose() * basis.KV;
  basis.offsets = {0, V.cols()};
  refresh_boundary(basis, op);
}

}  // namespace

KrylovBasis extended_arnoldi_init(const KrylovOperator& op, const Matrix& B) {
  const double scale = B.norm();
  if (B.cols() == 0 || scale == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "extended_arnoldi_init needs a nonzero block");
  }
  Matrix empty(B.rows(), 0);
  Matrix W1 = B;
  Matrix Q1 = new_directions(empty, W1, scale);
  Matrix W2 = op.inverse().solve(B);
  const double scale2 = W2.norm();
  orthogonalize(Q1, W2);
  Matrix Q2 = new_directions(Q1, W2, scale2);

  KrylovBasis basis;
  basis.kind = BasisKind::Extended;
  Matrix V(B.rows(), Q1.cols() + Q2.cols());
  V << Q1, Q2;
  start_basis(basis, op, V);
  basis.first_half = {Q1.cols()};
  basis.gamma = basis.V.transpose() * B;
  return basis;
}

StepStatus extended_arnoldi_step(KrylovBasis& basis, const KrylovOperator& op) {
  const int j = basis.blocks() - 1;
  const Eigen::Index off = basis.offsets[static_cast<std::size_t>(j)];
  const Eigen::Index h1 = basis.first_half[static_cast<std::size_t>(j)];
  const Eigen::Index h2 = basis.width(j) - h1;

  Matrix W1 = basis.KV.middleCols(off, h1);
  const double scale1 = W1.norm();
  orthogonalize(basis.V, W1);
  Matrix Q1 = new_directions(basis.V, W1, scale1);

  Matrix Vq(basis.V.rows(), basis.dim() + Q1.cols());
  Vq << basis.V, Q1;
  Matrix W2(basis.V.rows(), 0);
  if (h2 > 0) W2 = op.inverse().solve(basis.V.middleCols(off + h1, h2));
  const double scale2 = W2.norm();
  orthogonalize(Vq, W2);
  Matrix Q2 = new_directions(Vq, W2, scale2);

  if (Q1.cols() + Q2.cols() == 0) return StepStatus::Breakdown;
  Matrix Q(basis.V.rows(), Q1.cols() + Q2.cols());
  Q << Q1, Q2;
  append_block(basis, op, Q);
  basis.first_half.push_back(Q1.cols());
  return StepStatus::Ok;
}

KrylovBasis rational_arnoldi_init(const KrylovOperator& op, const Matrix& B) {
  const double scale = B.norm();
  if (B.cols() == 0 || scale == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "rational_arnoldi_init needs a nonzero block");
  }
  Matrix W = B;
  Matrix Q = new_directions(Matrix(B.rows(), 0), W, scale);
  KrylovBasis basis;
  basis.kind = BasisKind::Rational;
  start_basis(basis, op, Q);
  basis.gamma = basis.V.transpose() * B;
  basis.H.resize(basis.dim(), 0);
  return basis;
}

StepStatus rational_arnoldi_step(KrylovBasis& basis, const KrylovOperator& op, double xi) {
  const int j = basis.blocks() - 1;
  const Eigen::Index off = basis.offsets[static_cast<std::size_t>(j)];
  const Eigen::Index w = basis.width(j);
  const Eigen::Index r = basis.dim();

  Matrix W = op.shifted_inverse(xi).solve(basis.V.middleCols(off, w));
  const double scale = W.norm();
  Matrix coeff = orthogonalize(basis.V, W);
  Matrix Q = new_directions(basis.V, W, scale);
  if (Q.cols() == 0) return StepStatus::Breakdown;
  Matrix sub = Q.transpose() * W;

  const Eigen::Index wn = Q.cols();
  Matrix H = Matrix::Zero(r + wn, r);
  H.topLeftCorner(r, basis.H.cols()) = basis.H;
  H.block(0, off, r, w) = coeff;
  H.block(r, off, wn, w) = sub;
  basis.H = std::move(H);
  basis.poles.push_back(xi);
  append_block(basis, op, Q);
  return StepStatus::Ok;
}

void project_operator(KrylovBasis& basis, const KrylovOperator& op) {
  basis.KV = op.K * basis.V;
  basis.T_proj = basis.V.transpose() * basis.KV;
  refresh_boundary(basis, op);
}

ShiftState spectral_bounds(const KrylovOperator& op, int inverse_iterations) {
  ShiftState st;
  const SparseMatrix& K = op.K;
  double hi = 0.0;
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    double diag = 0.0;
    double off = 0.0;
    for (SparseMatrix::InnerIterator it(K, i); it; ++it) {
      if (it.col() == i) {
        diag = it.value();
      } else {
        off += std::abs(it.value());
      }
    }
    hi = std::max(hi, diag + off);
  }
  const auto& inv = op.inverse();
  Vector x(K.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = 1.0 + 0.1 * std::sin(static_cast<double>(i));
  x.normalize();
  double lo = 0.0;
  for (int it = 0; it < inverse_iterations; ++it) {
    Vector y = inv.solve(x);
    const double ny = y.norm();
    lo = 1.0 / ny;
    x = y / ny;
  }
  st.s_min = lo;
  st.s_max = std::max(hi, lo);
  return st;
}

double next_shift(const ShiftState& state) {
  if (state.used.empty()) return state.s_min;
  const int npts = 1000;
  const double lo = state.s_min;
  const double hi = state.s_max;
  double best = -std::numeric_limits<double>::infinity();
  double arg = lo;
  for (int i = 0; i < npts; ++i) {
    const double frac = static_cast<double>(i) / (npts - 1);
    const double x = lo > 0.0 ? lo * std::pow(hi / lo, frac) : lo + (hi - lo) * frac;
    double val = 0.0;
    for (double s : state.used) val += std::log(std::abs(x - s));
    for (Eigen::Index k = 0; k < state.ritz.size(); ++k) val -= std::log(std::abs(Complex(x, 0.0) + state.ritz(k)));
    if (val > best) {
      best = val;
      arg = x;
    }
  }
  return arg;
}

}  // namespace evosylv

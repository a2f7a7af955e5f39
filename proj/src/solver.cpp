#include "evosylv/solver.hpp"

#include "evosylv/errors.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <future>

namespace evosylv {

Eigen::Index FactoredSolution::space_size() const {
  if (layout == Layout::Full) return V.rows();
  Eigen::Index n = 1;
  for (const Matrix& B : bases) n *= B.rows();
  return n;
}

Matrix FactoredSolution::materialize() const {
  if (layout == Layout::Full) {
    if (V.cols() == 0) return Matrix::Zero(V.rows(), Y.cols());
    return V * Y;
  }
  return apply_kron(bases, Y);
}

Vector extract_snapshot(const FactoredSolution& sol, Eigen::Index k) {
  if (k < 1 || k > sol.steps()) {
    throw Error(ErrorCode::IndexOutOfRange, "snapshot " + std::to_string(k) + " outside 1.." +
                                                std::to_string(sol.steps()));
  }
  if (sol.layout == Layout::Full) {
    if (sol.V.cols() == 0) return Vector::Zero(sol.V.rows());
    return sol.V * sol.Y.col(k - 1);
  }
  return apply_kron(sol.bases, sol.Y.col(k - 1));
}

Matrix mode_product(const Matrix& Y, const std::vector<Eigen::Index>& dims, int k, const Matrix& M) {
  Eigen::Index pre = 1;
  for (int j = 0; j < k; ++j) pre *= dims[static_cast<std::size_t>(j)];
  const Eigen::Index rk = dims[static_cast<std::size_t>(k)];
  const Eigen::Index total = Y.size();
  const Eigen::Index post = total / (pre * rk);
  const Eigen::Index mk = M.rows();
  Matrix out(pre * mk * post / (Y.cols() > 0 ? Y.cols() : 1), Y.cols());
  // slices are pre x rk blocks laid out one after another in memory
  for (Eigen::Index p = 0; p < post; ++p) {
    Eigen::Map<const Matrix> in(Y.data() + p * pre * rk, pre, rk);
    Eigen::Map<Matrix> res(out.data() + p * pre * mk, pre, mk);
    res.noalias() = in * M.transpose();
  }
  return out;
}

Matrix apply_kron(const std::vector<Matrix>& mats, const Matrix& Y) {
  std::vector<Eigen::Index> dims;
  for (const Matrix& M : mats) dims.push_back(M.cols());
  Matrix cur = Y;
  for (std::size_t k = 0; k < mats.size(); ++k) {
    cur = mode_product(cur, dims, static_cast<int>(k), mats[k]);
    dims[k] = mats[k].rows();
  }
  return cur;
}

std::int64_t memory_units_extended(int m, Eigen::Index q, Eigen::Index N, Eigen::Index ell) {
  return 2LL * (m + 1) * q * (N + ell);
}

std::int64_t memory_units_rational(int m, Eigen::Index q, Eigen::Index N, Eigen::Index ell) {
  return static_cast<std::int64_t>(m + 1) * q * (N + ell);
}

std::int64_t memory_units_tensor(int m, const std::vector<Eigen::Index>& q, Eigen::Index n, Eigen::Index ell) {
  std::int64_t sum_q = 0;
  std::int64_t prod_q = 1;
  std::int64_t pow2 = 1;
  std::int64_t powm = 1;
  for (Eigen::Index qi : q) {
    sum_q += qi;
    prod_q *= qi;
    pow2 *= 2;
    powm *= (m + 1);
  }
  return 2LL * (m + 1) * sum_q * n + pow2 * powm * prod_q * ell;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ||tb Zc C - (I - V V^T) E_b Vb Y||_F with Zc orthogonal to V, E_b the
// embedding of the boundary rows and Vb the boundary rows of V.
//
// Expanding the square and subtracting ||V^T E_b Vb Y||^2 cancels badly once
// the residual is far below ||Vb Y||, so the two row blocks are formed
// separately. Boundary rows: tb Zb C - (M - Vb Vb^T M) with M = Vb Y, an
// n_b x L matrix. Interior rows: [Zi Vi] [tb C; Vb^T M], whose norm comes from
// the triangular factor of a thin QR of [Zi Vi].
struct ResidualParts {
  const Matrix* Zc = nullptr;  // N x w, empty when the basis is exhausted
  const Matrix* C = nullptr;   // w x L
  const Matrix* V = nullptr;   // N x r
  const Matrix* Vb = nullptr;  // n_b x r
  const std::vector<Eigen::Index>* boundary = nullptr;
};

double projected_residual_norm(double tb, const ResidualParts& parts, const Matrix& Y) {
  const Matrix& Zc = *parts.Zc;
  const Matrix& C = *parts.C;
  const Matrix& V = *parts.V;
  const Matrix& Vb = *parts.Vb;
  const std::vector<Eigen::Index>& bnd = *parts.boundary;
  const Eigen::Index w = C.rows();
  const Eigen::Index r = V.cols();
  const Eigen::Index L = Y.cols();

  const Matrix M = Vb.rows() > 0 && r > 0 ? Matrix(Vb * Y) : Matrix::Zero(Vb.rows(), L);
  if (M.squaredNorm() == 0.0) {
    // no boundary coupling: ||tb Zc C|| through the triangular factor of Zc
    return w == 0 ? 0.0 : tb * (kernels::qr_economy(Zc).R * C).norm();
  }
  const Matrix K = Vb.transpose() * M;

  Matrix Rb = Vb * K - M;
  if (w > 0) {
    for (std::size_t i = 0; i < bnd.size(); ++i) {
      Rb.row(static_cast<Eigen::Index>(i)) += tb * Zc.row(bnd[i]) * C;
    }
  }

  std::vector<char> on_boundary(static_cast<std::size_t>(V.rows()), 0);
  for (Eigen::Index b : bnd) on_boundary[static_cast<std::size_t>(b)] = 1;
  const Eigen::Index Ni = V.rows() - static_cast<Eigen::Index>(bnd.size());
  Matrix W(Ni, w + r);
  for (Eigen::Index i = 0, row = 0; i < V.rows(); ++i) {
    if (on_boundary[static_cast<std::size_t>(i)]) continue;
    if (w > 0) W.block(row, 0, 1, w) = Zc.row(i);
    W.block(row, w, 1, r) = V.row(i);
    ++row;
  }
  Matrix coef(w + r, L);
  if (w > 0) coef.topRows(w) = tb * C;
  coef.bottomRows(r) = K;
  const Eigen::HouseholderQR<Matrix> qr(W);
  const Eigen::Index k = std::min(W.rows(), W.cols());
  const Matrix Rt = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const double interior = (Rt * coef).norm();
  return std::hypot(Rb.norm(), interior);
}

Matrix padded(const Matrix& gamma, Eigen::Index rows) {
  Matrix out = Matrix::Zero(rows, gamma.cols());
  out.topRows(gamma.rows()) = gamma;
  return out;
}

void check_inputs(const LowRankRhs& rhs, const TimeOperator& timeop, const SolveOptions& opts, Eigen::Index N) {
  if (!(opts.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  if (opts.m_max < 1) throw Error(ErrorCode::InvalidArgument, "m_max must be at least 1");
  if (timeop.ell != rhs.steps()) throw Error(ErrorCode::InvalidArgument, "time operator and rhs disagree on L");
  if (rhs.left.rows() != N) throw Error(ErrorCode::InvalidArgument, "rhs has wrong spatial size");
}

SolveResult trivial_result(const std::string& method, Eigen::Index N, Eigen::Index L, int first_step) {
  SolveResult out;
  out.solution.V = Matrix(N, 0);
  out.solution.Y = Matrix(0, L);
  out.solution.first_step = first_step;
  out.report.method = method;
  out.report.iterations = 1;
  out.report.residual_history = {0.0};
  out.report.converged = true;
  out.report.basis_dims = {0};
  return out;
}

void notify(const SolveOptions& opts, int m, const FactoredSolution& sol, double res, double delta) {
  if (!opts.on_iteration) return;
  IterationInfo info;
  info.m = m;
  info.solution = &sol;
  info.residual = res;
  info.delta = delta;
  opts.on_iteration(info);
}

}  // namespace

SolveResult solve_eksm(const SpaceOperator& op, const LowRankRhs& rhs_in, const TimeOperator& timeop,
                       const SolveOptions& opts) {
  const auto t0 = Clock::now();
  const LowRankRhs rhs = rhs_in.compact();
  const Eigen::Index N = op.size();
  const Eigen::Index L = rhs.steps();
  check_inputs(rhs, timeop, opts, N);
  const double delta = rhs.norm();
  if (delta == 0.0) {
    SolveResult out = trivial_result("eksm", N, L, rhs.first_step);
    out.report.memory_units = memory_units_extended(1, 0, N, L);
    out.report.wall_time = seconds_since(t0);
    return out;
  }
  const double tb = op.tau_beta;
  const KrylovOperator kop = KrylovOperator::from_space(op);
  KrylovBasis basis = extended_arnoldi_init(kop, rhs.left);

  SolveResult out;
  out.report.method = "eksm";
  out.report.delta = delta;
  FactoredSolution& sol = out.solution;
  sol.layout = Layout::Full;
  sol.first_step = rhs.first_step;

  for (int m = 1; m <= opts.m_max; ++m) {
    const StepStatus status = extended_arnoldi_step(basis, kop);
    const Eigen::Index rm = basis.dim(m);

    ProjectedProblem prob;
    prob.A_small = basis.I_proj.topLeftCorner(rm, rm) + tb * basis.T_proj.topLeftCorner(rm, rm);
    prob.rhs_left = padded(basis.gamma, rm);
    prob.rhs_right = rhs.right;
    prob.timeop = timeop;
    InnerResult inner = inner_solve(prob, opts.inner);

    Matrix C(0, L);
    Matrix Zc(N, 0);
    if (status == StepStatus::Ok) {
      const Eigen::Index w = basis.width(m);
      C = basis.T_proj.block(rm, 0, w, rm) * inner.Y;
      Zc = basis.V.middleCols(rm, w);
    }
    const Matrix Vm = basis.V.leftCols(rm);
    const Matrix Vbm = basis.Vb.leftCols(rm);
    const double res = projected_residual_norm(tb, {&Zc, &C, &Vm, &Vbm, &kop.boundary}, inner.Y);

    out.report.iterations = m;
    out.report.residual_history.push_back(res / delta);
    out.report.inner_solver = inner.used;
    out.report.basis_dims = {rm};
    out.report.breakdown = status == StepStatus::Breakdown;
    spdlog::debug("eksm m={} dim={} rel_res={:.3e} inner={}", m, rm, res / delta, to_string(inner.used));

    sol.Y = std::move(inner.Y);
    if (opts.on_iteration) {
      sol.V = basis.V.leftCols(rm);
      notify(opts, m, sol, res, delta);
    }
    if (res <= opts.tol * delta || status == StepStatus::Breakdown) {
      out.report.converged = res <= opts.tol * delta;
      sol.V = basis.V.leftCols(rm);
      break;
    }
    if (m == opts.m_max) sol.V = basis.V.leftCols(rm);
  }
  out.report.memory_units = memory_units_extended(out.report.iterations, rhs.left.cols(), N, L);
  out.report.wall_time = seconds_since(t0);
  return out;
}

SolveResult solve_rksm(const SpaceOperator& op, const LowRankRhs& rhs_in, const TimeOperator& timeop,
                       const SolveOptions& opts) {
  const auto t0 = Clock::now();
  const LowRankRhs rhs = rhs_in.compact();
  const Eigen::Index N = op.size();
  const Eigen::Index L = rhs.steps();
  check_inputs(rhs, timeop, opts, N);
  const double delta = rhs.norm();
  if (delta == 0.0) {
    SolveResult out = trivial_result("rksm", N, L, rhs.first_step);
    out.report.memory_units = memory_units_rational(1, 0, N, L);
    out.report.wall_time = seconds_since(t0);
    return out;
  }
  const double tb = op.tau_beta;
  const KrylovOperator kop = KrylovOperator::from_space(op);
  ShiftState shifts = spectral_bounds(kop);
  KrylovBasis basis = rational_arnoldi_init(kop, rhs.left);

  SolveResult out;
  out.report.method = "rksm";
  out.report.delta = delta;
  FactoredSolution& sol = out.solution;
  sol.layout = Layout::Full;
  sol.first_step = rhs.first_step;

  for (int m = 1; m <= opts.m_max; ++m) {
    const Eigen::Index rm = basis.dim();
    if (!shifts.used.empty()) {
      Eigen::EigenSolver<Matrix> es(basis.T_proj, false);
      shifts.ritz = es.eigenvalues();
    }
    const double sigma = next_shift(shifts);
    shifts.used.push_back(sigma);
    const StepStatus status = rational_arnoldi_step(basis, kop, -sigma);

    ProjectedProblem prob;
    prob.A_small = basis.I_proj.topLeftCorner(rm, rm) + tb * basis.T_proj.topLeftCorner(rm, rm);
    prob.rhs_left = padded(basis.gamma, rm);
    prob.rhs_right = rhs.right;
    prob.timeop = timeop;
    InnerResult inner = inner_solve(prob, opts.inner);

    Matrix C(0, L);
    Matrix Zc(N, 0);
    if (status == StepStatus::Ok) {
      const Eigen::Index w = basis.width(m);
      const double xi = basis.poles.back();
      const Matrix Vnext = basis.V.middleCols(rm, w);
      const Matrix Hm = basis.H.topLeftCorner(rm, rm);
      Eigen::PartialPivLU<Matrix> lu(Hm);
      if (lu.rcond() > 1e-13) {
        C = basis.H.block(rm, 0, w, rm) * lu.solve(inner.Y);
        Zc = xi * Vnext - (basis.KV.middleCols(rm, w) - basis.V.leftCols(rm) * basis.T_proj.block(0, rm, rm, w));
      } else {
        // H_m numerically singular: use (I - V V^T) Kbar V_m directly.
        C = inner.Y;
        Zc = basis.KV.leftCols(rm) - basis.V.leftCols(rm) * basis.T_proj.topLeftCorner(rm, rm);
      }
    }
    const Matrix Vm = basis.V.leftCols(rm);
    const Matrix Vbm = basis.Vb.leftCols(rm);
    const double res = projected_residual_norm(tb, {&Zc, &C, &Vm, &Vbm, &kop.boundary}, inner.Y);

    out.report.iterations = m;
    out.report.residual_history.push_back(res / delta);
    out.report.inner_solver = inner.used;
    out.report.basis_dims = {rm};
    out.report.breakdown = status == StepStatus::Breakdown;
    spdlog::debug("rksm m={} dim={} pole={:.4e} rel_res={:.3e} inner={}", m, rm, -sigma, res / delta,
                  to_string(inner.used));

    sol.Y = std::move(inner.Y);
    if (opts.on_iteration) {
      sol.V = basis.V.leftCols(rm);
      notify(opts, m, sol, res, delta);
    }
    if (res <= opts.tol * delta || status == StepStatus::Breakdown) {
      out.report.converged = res <= opts.tol * delta;
      sol.V = basis.V.leftCols(rm);
      break;
    }
    if (m == opts.m_max) sol.V = basis.V.leftCols(rm);
  }
  out.report.memory_units = memory_units_rational(out.report.iterations, rhs.left.cols(), N, L);
  out.report.wall_time = seconds_since(t0);
  return out;
}

namespace {

CMatrix kron_complex(const std::vector<CMatrix>& mats) {
  CMatrix acc = CMatrix::Ones(1, 1);
  for (const CMatrix& M : mats) {
    CMatrix next(M.rows() * acc.rows(), M.cols() * acc.cols());
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      for (Eigen::Index i = 0; i < M.rows(); ++i) {
        next.block(i * acc.rows(), j * acc.cols(), acc.rows(), acc.cols()) = M(i, j) * acc;
      }
    }
    acc = std::move(next);
  }
  return acc;
}

// I + tb * (T_0 (+) ... (+) T_{d-1}), first factor fastest.
Matrix dense_kronecker_sum_plus_identity(const std::vector<Matrix>& T, double tb) {
  Eigen::Index total = 1;
  for (const Matrix& t : T) total *= t.rows();
  Matrix A = Matrix::Identity(total, total);
  Eigen::Index inner = 1;
  for (const Matrix& t : T) {
    const Eigen::Index rk = t.rows();
    const Eigen::Index outer = total / (inner * rk);
    for (Eigen::Index o = 0; o < outer; ++o) {
      for (Eigen::Index a = 0; a < rk; ++a) {
        for (Eigen::Index b = 0; b < rk; ++b) {
          const double v = tb * t(a, b);
          if (v == 0.0) continue;
          for (Eigen::Index i = 0; i < inner; ++i) {
            A(o * rk * inner + a * inner + i, o * rk * inner + b * inner + i) += v;
          }
        }
      }
    }
    inner *= rk;
  }
  return A;
}

}  // namespace

SolveResult solve_eksm_separable(const SpaceOperator& op, const LowRankRhs& rhs, const TimeOperator& timeop,
                                 const SolveOptions& opts) {
  const auto t0 = Clock::now();
  if (!op.kronecker_sum) throw Error(ErrorCode::NotSeparable, "operator is not a Kronecker sum");
  if (!rhs.separable) throw Error(ErrorCode::NotSeparable, "rhs carries no separable factors");
  const std::vector<Matrix>& X = *rhs.separable;
  const int d = op.d;
  if (static_cast<int>(X.size()) != d) throw Error(ErrorCode::NotSeparable, "one factor per direction needed");
  for (const Matrix& Xk : X) {
    if (Xk.rows() != op.n) throw Error(ErrorCode::NotSeparable, "factor has wrong length");
    if (Xk.row(0).squaredNorm() > 0.0 || Xk.row(op.n - 1).squaredNorm() > 0.0) {
      throw Error(ErrorCode::NotSeparable, "separable factors must vanish on the boundary");
    }
  }
  const Eigen::Index N = op.size();
  const Eigen::Index L = rhs.steps();
  check_inputs(rhs, timeop, opts, N);
  std::vector<Eigen::Index> q;
  for (const Matrix& Xk : X) q.push_back(Xk.cols());

  const double delta = rhs.norm();
  if (delta == 0.0) {
    SolveResult out = trivial_result("eksm_tensor", N, L, rhs.first_step);
    out.solution.layout = Layout::Tensor;
    for (int k = 0; k < d; ++k) out.solution.bases.emplace_back(op.n, 0);
    out.report.basis_dims.assign(static_cast<std::size_t>(d), 0);
    out.report.memory_units = memory_units_tensor(1, q, op.n, L);
    out.report.wall_time = seconds_since(t0);
    return out;
  }
  const double tb = op.tau_beta;

  std::vector<KrylovOperator> kops;
  for (int k = 0; k < d; ++k) kops.push_back(KrylovOperator::from_factor(op.factors[static_cast<std::size_t>(k)]));
  std::vector<KrylovBasis> bases(static_cast<std::size_t>(d));
  std::vector<bool> exhausted(static_cast<std::size_t>(d), false);

  auto for_each_dim = [&](auto&& fn) {
    if (opts.parallel && d > 1) {
      std::vector<std::future<void>> jobs;
      for (int k = 0; k < d; ++k) jobs.push_back(std::async(std::launch::async, fn, k));
      for (auto& j : jobs) j.get();
    } else {
      for (int k = 0; k < d; ++k) fn(k);
    }
  };
  for_each_dim([&](int k) {
    bases[static_cast<std::size_t>(k)] =
        extended_arnoldi_init(kops[static_cast<std::size_t>(k)], X[static_cast<std::size_t>(k)]);
  });

  SolveResult out;
  out.report.method = "eksm_tensor";
  out.report.delta = delta;
  FactoredSolution& sol = out.solution;
  sol.layout = Layout::Tensor;
  sol.first_step = rhs.first_step;

  for (int m = 1; m <= opts.m_max; ++m) {
    for_each_dim([&](int k) {
      auto& B = bases[static_cast<std::size_t>(k)];
      if (!exhausted[static_cast<std::size_t>(k)] && B.blocks() == m) {
        if (extended_arnoldi_step(B, kops[static_cast<std::size_t>(k)]) == StepStatus::Breakdown) {
          exhausted[static_cast<std::size_t>(k)] = true;
        }
      }
    });

    std::vector<Eigen::Index> dims;
    std::vector<Matrix> T;
    std::vector<Matrix> gammas;
    std::vector<Matrix> coupling;
    for (int k = 0; k < d; ++k) {
      const auto& B = bases[static_cast<std::size_t>(k)];
      const int mk = std::min(m, B.blocks());
      const Eigen::Index rk = B.dim(mk);
      dims.push_back(rk);
      T.push_back(B.T_proj.topLeftCorner(rk, rk));
      gammas.push_back(padded(B.gamma, rk));
      if (B.blocks() > mk) {
        coupling.push_back(B.T_proj.block(rk, 0, B.width(mk), rk));
      } else {
        coupling.emplace_back(0, rk);
      }
    }

    ProjectedProblem prob;
    prob.rhs_left = kron_fastest_first(gammas);
    prob.rhs_right = rhs.right;
    prob.timeop = timeop;
    bool have_eig = opts.inner == InnerSolver::FftSmw;
    if (have_eig) {
      try {
        std::vector<CMatrix> S;
        std::vector<CMatrix> Sinv;
        std::vector<CVector> lam;
        double cond = 1.0;
        for (int k = 0; k < d; ++k) {
          auto e = kernels::dense_eig(T[static_cast<std::size_t>(k)]);
          S.push_back(e.S);
          Sinv.push_back(e.S_inv);
          lam.push_back(e.lambdas);
          cond *= e.cond_estimate;
        }
        if (cond > kernels::kDefaultCondLimit) throw Error(ErrorCode::NonDiagonalizable, "combined condition");
        kernels::EigDecomposition eig;
        eig.S = kron_complex(S);
        eig.S_inv = kron_complex(Sinv);
        eig.cond_estimate = cond;
        Eigen::Index total = 1;
        for (Eigen::Index r : dims) total *= r;
        eig.lambdas = CVector::Ones(total);
        Eigen::Index stride = 1;
        for (int k = 0; k < d; ++k) {
          const Eigen::Index rk = dims[static_cast<std::size_t>(k)];
          for (Eigen::Index idx = 0; idx < total; ++idx) {
            eig.lambdas(idx) += tb * lam[static_cast<std::size_t>(k)]((idx / stride) % rk);
          }
          stride *= rk;
        }
        prob.eig = std::move(eig);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NonDiagonalizable) throw;
        have_eig = false;
      }
    }
    prob.A_small = have_eig ? Matrix() : dense_kronecker_sum_plus_identity(T, tb);
    InnerResult inner;
    if (have_eig) {
      try {
        inner = {inner_solve_fft_smw(prob), InnerSolver::FftSmw};
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EigFallback && e.code() != ErrorCode::ResonantEigenvalue) throw;
        prob.A_small = dense_kronecker_sum_plus_identity(T, tb);
        inner = {inner_solve_sequential(prob), InnerSolver::Sequential};
      }
    } else {
      inner = {inner_solve_sequential(prob), InnerSolver::Sequential};
    }
    if (inner.Y.rows() == 0) inner.Y = Matrix::Zero(prob.rhs_left.rows(), L);

    double res2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const Matrix& Ck = coupling[static_cast<std::size_t>(k)];
      if (Ck.rows() == 0) continue;
      res2 += mode_product(inner.Y, dims, k, Ck).squaredNorm();
    }
    const double res = tb * std::sqrt(res2);

    out.report.iterations = m;
    out.report.residual_history.push_back(res / delta);
    out.report.inner_solver = inner.used;
    out.report.basis_dims = dims;
    bool all_exhausted = true;
    for (int k = 0; k < d; ++k) all_exhausted = all_exhausted && exhausted[static_cast<std::size_t>(k)];
    out.report.breakdown = all_exhausted;
    spdlog::debug("eksm_tensor m={} rel_res={:.3e} inner={}", m, res / delta, to_string(inner.used));

    sol.Y = std::move(inner.Y);
    const bool done = res <= opts.tol * delta || all_exhausted || m == opts.m_max;
    if (opts.on_iteration || done) {
      sol.bases.clear();
      for (int k = 0; k < d; ++k) {
        sol.bases.push_back(bases[static_cast<std::size_t>(k)].V.leftCols(dims[static_cast<std::size_t>(k)]));
      }
      notify(opts, m, sol, res, delta);
    }
    if (res <= opts.tol * delta || all_exhausted) {
      out.report.converged = res <= opts.tol * delta;
      break;
    }
  }
  out.report.memory_units = memory_units_tensor(out.report.iterations, q, op.n, L);
  out.report.wall_time = seconds_since(t0);
  return out;
}

double explicit_residual(const SpaceOperator& op, const LowRankRhs& rhs, const TimeOperator& timeop,
                         const Matrix& U) {
  Matrix R = op.system * U;
  R.noalias() -= U * timeop.sigma.transpose();
  R.noalias() -= rhs.left * rhs.right.transpose();
  return R.norm();
}

}  // namespace evosylv

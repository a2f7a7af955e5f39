#include "evosylv/run.hpp"

#include "evosylv/errors.hpp"
#include "evosylv/oracles.hpp"
#include "evosylv/presets.hpp"
#include "evosylv/solver.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>
#include <tuple>

namespace evosylv {

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) config_error("bad value '" + text + "' for " + key);
  return value;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename C>
bool contains(const C& c, const std::string& v) {
  return std::find(c.begin(), c.end(), v) != c.end();
}

}  // namespace

void RunConfig::validate() const {
  if (!is_preset(preset)) config_error("unknown preset '" + preset + "'");
  const int pd = preset_dimension(preset);
  if (pd != 0 && d != 0 && d != pd) config_error(fmt::format("preset {} is {}-dimensional", preset, pd));
  if (d < 0 || d > 3) config_error("d must be 1, 2 or 3");
  if (n < 3) config_error("n must be at least 3");
  if (s < 1 || s > 6) config_error("s must be between 1 and 6");
  if (ell <= s) config_error("ell must exceed s");
  static const std::vector<std::string> methods = {"eksm", "rksm", "timestep-oracle", "dense-oracle"};
  if (!contains(methods, method)) config_error("unknown method '" + method + "'");
  if (inner != "fft_smw" && inner != "sequential") config_error("unknown inner solver '" + inner + "'");
  if (separable != "auto" && separable != "on" && separable != "off") {
    config_error("separable must be auto, on or off");
  }
  if (separable == "on") {
    if (!preset_has_separable(preset)) config_error("preset " + preset + " has no separable data");
    if (s != 1) config_error("separable runs need s = 1");
    if (method != "eksm") config_error("separable runs use eksm");
  }
  if (!(tol > 0.0)) config_error("tol must be positive");
  if (m_max < 1) config_error("mmax must be positive");
  if (!(epsilon > 0.0)) config_error("epsilon must be positive");
  if (sweep != "none" && sweep != "space" && sweep != "time") config_error("sweep must be none, space or time");
  if (sweep != "none") {
    if (!preset_has_analytic(preset)) config_error("convergence studies need a preset with an analytic solution");
    if (points.size() < 2) config_error("a sweep needs at least two points");
  }
  if (jobs < 1) config_error("jobs must be positive");
}

void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "preset") {
    cfg.preset = value;
  } else if (key == "d") {
    cfg.d = parse_number<int>(key, value);
  } else if (key == "n") {
    cfg.n = parse_number<Eigen::Index>(key, value);
  } else if (key == "ell") {
    cfg.ell = parse_number<Eigen::Index>(key, value);
  } else if (key == "s") {
    cfg.s = parse_number<int>(key, value);
  } else if (key == "method") {
    cfg.method = value;
  } else if (key == "inner") {
    cfg.inner = value;
  } else if (key == "separable") {
    cfg.separable = value;
  } else if (key == "tol") {
    cfg.tol = parse_number<double>(key, value);
  } else if (key == "mmax" || key == "m_max") {
    cfg.m_max = parse_number<int>(key, value);
  } else if (key == "epsilon") {
    cfg.epsilon = parse_number<double>(key, value);
  } else if (key == "out") {
    cfg.output_path = value;
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "sweep") {
    cfg.sweep = value;
  } else if (key == "points") {
    cfg.points.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) cfg.points.push_back(parse_number<Eigen::Index>(key, trim(item)));
  } else if (key == "jobs") {
    cfg.jobs = parse_number<int>(key, value);
  } else {
    config_error("unknown key '" + key + "'");
  }
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error(fmt::format("line {}: expected key=value", lineno));
    apply_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

namespace {

using Clock = std::chrono::steady_clock;

// Column c of the computed solution is the snapshot at time index first + c.
struct Snapshots {
  std::optional<FactoredSolution> factored;
  Matrix dense;
  int first = 1;

  [[nodiscard]] Vector column(Eigen::Index c) const {
    return factored ? extract_snapshot(*factored, c + 1) : Vector(dense.col(c));
  }
};

double relative_error(const Snapshots& sol, const Matrix& ref) {
  double num = 0.0;
  for (Eigen::Index c = 0; c < ref.cols(); ++c) num += (sol.column(c) - ref.col(c)).squaredNorm();
  const double den = ref.norm();
  return den > 0.0 ? std::sqrt(num) / den : std::sqrt(num);
}

double relative(double num, double den) { return den > 0.0 ? num / den : num; }

std::string joined(const std::vector<Eigen::Index>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

RunRecord run(const RunConfig& cfg) {
  cfg.validate();
  PresetOptions po;
  po.n = cfg.n;
  po.ell = cfg.ell;
  po.s = cfg.s;
  po.epsilon = cfg.epsilon;
  po.d = cfg.d;
  po.seed = cfg.seed;
  ProblemSpec spec = make_preset(cfg.preset, po);

  const bool tensor = cfg.method == "eksm" && spec.separable &&
                      (cfg.separable == "on" || (cfg.separable == "auto" && spec.grid.d >= 2));
  if (!tensor) spec.separable.reset();

  const SpaceOperator op = assemble_space_operator(spec);
  const LowRankRhs rhs = assemble_rhs(spec, op);
  const TimeOperator timeop = build_time_operator(spec.scheme.s, rhs.steps());
  const Eigen::Index N = op.size();
  const Eigen::Index L = rhs.steps();
  const bool oracle_ok = static_cast<std::int64_t>(N) * L <= kOracleMaxEntries;

  RunRecord rec;
  rec.config = cfg;
  rec.d = spec.grid.d;

  Snapshots sol;
  const auto t0 = Clock::now();
  if (cfg.method == "eksm" || cfg.method == "rksm") {
    SolveOptions so;
    so.tol = cfg.tol;
    so.m_max = cfg.m_max;
    so.inner = cfg.inner == "sequential" ? InnerSolver::Sequential : InnerSolver::FftSmw;
    SolveResult res;
    if (tensor) {
      res = solve_eksm_separable(op, rhs, timeop, so);
    } else if (cfg.method == "eksm") {
      res = solve_eksm(op, rhs, timeop, so);
    } else {
      res = solve_rksm(op, rhs, timeop, so);
    }
    rec.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
    const SolveReport& rep = res.report;
    rec.iterations = rep.iterations;
    rec.final_residual = rep.residual_history.empty() ? 0.0 : rep.residual_history.back();
    rec.memory_units = rep.memory_units;
    rec.converged = rep.converged;
    rec.inner_used = to_string(rep.inner_solver);
    const int m = rep.iterations;
    if (tensor) {
      rec.layout = "tensor";
      std::vector<Eigen::Index> q;
      for (const Matrix& X : *rhs.separable) q.push_back(X.cols());
      rec.memory_formula = fmt::format("2(m+1)sum(q_i)n + 2^d(m+1)^d prod(q_i) ell with m={}, q=({}), n={}, ell={}",
                                       m, joined(q), op.n, L);
    } else {
      const Eigen::Index q = rhs.compact().left.cols();
      rec.memory_formula = fmt::format("{}(m+1)q(N+ell) with m={}, q={}, N={}, ell={}",
                                       cfg.method == "eksm" ? "2" : "", m, q, N, L);
    }
    sol.first = res.solution.first_step;
    sol.factored = std::move(res.solution);
  } else {
    const OracleSolution o =
        cfg.method == "dense-oracle" ? dense_kron_solve(op, rhs, timeop) : timestep_solve(spec, op);
    rec.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
    rec.layout = "oracle";
    rec.inner_used = "none";
    rec.memory_units = static_cast<std::int64_t>(N) * L;
    rec.memory_formula = fmt::format("N ell with N={}, ell={}", N, L);
    rec.final_residual = relative(explicit_residual(op, rhs, timeop, o.U), rhs.norm());
    sol.first = o.first_step;
    sol.dense = o.U;
  }

  if (cfg.method == "timestep-oracle") {
    if (static_cast<std::int64_t>(N) * L <= kDenseKronMaxSize) {
      rec.error_vs_oracle = relative_error(sol, dense_kron_solve(op, rhs, timeop).U);
    }
  } else if (oracle_ok) {
    rec.error_vs_oracle = relative_error(sol, timestep_solve(spec, op).U);
  }
  if (preset_has_analytic(cfg.preset)) {
    Matrix exact(N, L);
    for (Eigen::Index c = 0; c < L; ++c) exact.col(c) = example1_exact(spec.grid, sol.first + c);
    rec.error_vs_analytic = relative_error(sol, exact);
  }
  spdlog::info("{} {} n={} ell={} s={}: {} iterations, residual {:.3e}, {:.3f} s", cfg.preset, cfg.method, cfg.n,
               cfg.ell, cfg.s, rec.iterations, rec.final_residual, rec.wall_time_s);
  return rec;
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "need two or more points");
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

StudyResult convergence_study(const RunConfig& base) {
  base.validate();
  if (base.sweep == "none") config_error("no sweep requested");
  StudyResult out;
  out.sweep = base.sweep;

  std::vector<RunConfig> cfgs;
  for (Eigen::Index p : base.points) {
    RunConfig c = base;
    if (base.sweep == "space") {
      c.n = p;
    } else {
      c.ell = p;
    }
    c.validate();
    cfgs.push_back(c);
  }

  std::vector<RunRecord> records(cfgs.size());
  std::size_t next = 0;
  while (next < cfgs.size()) {
    const std::size_t batch = std::min(cfgs.size() - next, static_cast<std::size_t>(base.jobs));
    std::vector<std::future<RunRecord>> futs;
    for (std::size_t i = 0; i < batch; ++i) {
      futs.push_back(std::async(base.jobs > 1 ? std::launch::async : std::launch::deferred, run, cfgs[next + i]));
    }
    for (std::size_t i = 0; i < batch; ++i) records[next + i] = futs[i].get();
    next += batch;
  }

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    const PresetOptions po{cfgs[i].n, cfgs[i].ell, cfgs[i].s, cfgs[i].epsilon, cfgs[i].d, cfgs[i].seed};
    const Grid grid = make_preset(cfgs[i].preset, po).grid;
    StudyPoint pt;
    pt.refinement = base.sweep == "space" ? grid.h(0) : grid.tau();
    pt.error = records[i].error_vs_analytic.value_or(0.0);
    pt.record = records[i];
    xs.push_back(pt.refinement);
    ys.push_back(pt.error);
    out.points.push_back(std::move(pt));
  }
  out.slope = fitted_slope(xs, ys);
  return out;
}

namespace {

std::string opt_field(const std::optional<double>& v) { return v ? fmt::format("{:.6e}", *v) : std::string(); }

}  // namespace

std::string format_csv(std::vector<RunRecord> records) {
  std::stable_sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tie(a.config.preset, a.config.n, a.config.ell) < std::tie(b.config.preset, b.config.n, b.config.ell);
  });
  std::string out = std::string(kCsvHeader) + "\n";
  for (const RunRecord& r : records) {
    const RunConfig& c = r.config;
    out += fmt::format("{},{},{},{},{},{},{},{},{:.6e},{:.6f},{},{},{}\n", c.preset, r.d, c.n, c.ell, c.s, c.method,
                       c.inner, r.iterations, r.final_residual, r.wall_time_s, r.memory_units,
                       opt_field(r.error_vs_oracle), opt_field(r.error_vs_analytic));
  }
  return out;
}

void emit_report(const std::vector<RunRecord>& records, const std::string& path, std::ostream& summary) {
  if (records.empty()) throw Error(ErrorCode::InvalidArgument, "no records to report");
  const std::string csv = format_csv(records);
  if (!path.empty()) {
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
    f << csv;
    if (!f) throw Error(ErrorCode::IoError, "write failed for " + path);
  }
  for (const RunRecord& r : records) {
    const RunConfig& c = r.config;
    summary << fmt::format("{} (d={}, n={}, ell={}, s={}) {} [{}]\n", c.preset, r.d, c.n, c.ell, c.s, c.method,
                           r.layout);
    summary << fmt::format("  iterations {}  residual {:.3e}  {}  time {:.3f} s  inner {}\n", r.iterations,
                           r.final_residual, r.converged ? "converged" : "NOT converged", r.wall_time_s,
                           r.inner_used);
    summary << fmt::format("  memory {} = {}\n", r.memory_units, r.memory_formula);
    if (r.error_vs_oracle) summary << fmt::format("  error vs oracle   {:.3e}\n", *r.error_vs_oracle);
    if (r.error_vs_analytic) summary << fmt::format("  error vs analytic {:.3e}\n", *r.error_vs_analytic);
  }
}

std::string format_plot_data(const StudyResult& study) {
  std::string out = fmt::format("# {} sweep, slope {:.4f}\n", study.sweep, study.slope);
  for (const StudyPoint& p : study.points) out += fmt::format("{:.10e} {:.10e}\n", p.refinement, p.error);
  return out;
}

}  // namespace evosylv

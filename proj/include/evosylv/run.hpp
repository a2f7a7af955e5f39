#pragma once

#include "evosylv/kernels.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace evosylv {

struct RunConfig {
  std::string preset = "example1";
  int d = 0;  // 0: the preset's own dimension
  Eigen::Index n = 64;
  Eigen::Index ell = 256;
  int s = 1;
  std::string method = "eksm";     // eksm | rksm | timestep-oracle | dense-oracle
  std::string inner = "fft_smw";   // fft_smw | sequential
  std::string separable = "auto";  // auto | on | off
  double tol = 1e-8;
  int m_max = 50;
  double epsilon = 1.0;
  std::string output_path;
  std::uint64_t seed = 0;

  // sweep settings, used by convergence_study
  std::string sweep = "none";  // none | space | time
  std::vector<Eigen::Index> points;
  int jobs = 1;

  /// Throws ConfigError on any invalid value or combination.
  void validate() const;
};

/// Sets one key (the CLI flag name without dashes) from its text value.
void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
/// Flat key=value lines; '#' starts a comment. Keys override fields of base.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config_file(const std::string& path, RunConfig base = {});

struct RunRecord {
  RunConfig config;
  int d = 1;
  int iterations = 0;
  double final_residual = 0.0;  // relative
  double wall_time_s = 0.0;
  std::int64_t memory_units = 0;
  std::optional<double> error_vs_oracle;
  std::optional<double> error_vs_analytic;

  bool converged = true;
  std::string layout = "full";     // full | tensor | oracle
  std::string inner_used;
  std::string memory_formula;      // instantiated formula behind memory_units
};

/// Problems with N * L above this skip the oracle comparison.
inline constexpr std::int64_t kOracleMaxEntries = 20'000'000;

RunRecord run(const RunConfig& cfg);

struct StudyPoint {
  double refinement = 0.0;  // h or tau
  double error = 0.0;       // relative to the analytic solution
  RunRecord record;
};

struct StudyResult {
  std::string sweep;
  std::vector<StudyPoint> points;
  double slope = 0.0;  // least-squares slope of log(error) against log(refinement)
};

/// Space sweep varies n, time sweep varies ell, over base.points. Points are
/// run on up to base.jobs threads; results keep the order of base.points.
StudyResult convergence_study(const RunConfig& base);

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y);

inline constexpr const char* kCsvHeader =
    "preset,d,n,ell,s,method,inner,iterations,final_residual,wall_time_s,memory_units,error_vs_oracle,"
    "error_vs_analytic";

/// CSV text, rows sorted by (preset, n, ell).
std::string format_csv(std::vector<RunRecord> records);
/// Writes the CSV to path (when non-empty) and a readable summary to summary.
/// Throws IoError if the file cannot be written.
void emit_report(const std::vector<RunRecord>& records, const std::string& path, std::ostream& summary);
/// "refinement error" pairs, one per line.
std::string format_plot_data(const StudyResult& study);

}  // namespace evosylv

#include "evosylv/errors.hpp"
#include "evosylv/presets.hpp"
#include "evosylv/run.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace evosylv;

namespace {

void expect_config_error(const RunConfig& cfg) {
  try {
    cfg.validate();
    FAIL() << "expected ConfigError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}

RunRecord record(const std::string& preset, Eigen::Index n, Eigen::Index ell) {
  RunRecord r;
  r.config.preset = preset;
  r.config.n = n;
  r.config.ell = ell;
  r.iterations = 3;
  r.final_residual = 1.5e-9;
  r.memory_units = 42;
  return r;
}

}  // namespace

TEST(Presets, NamesAndDimensions) {
  for (const std::string& name : {"example1", "example2", "example2_1", "example3", "example4", "custom"}) {
    EXPECT_TRUE(is_preset(name)) << name;
  }
  EXPECT_FALSE(is_preset("example5"));
  EXPECT_EQ(preset_dimension("example1"), 1);
  EXPECT_EQ(preset_dimension("example2"), 2);
  EXPECT_EQ(preset_dimension("example2_1"), 3);
  EXPECT_EQ(preset_dimension("example3"), 2);
  EXPECT_EQ(preset_dimension("example4"), 3);
  EXPECT_EQ(preset_dimension("custom"), 0);
  EXPECT_THROW((void)preset_dimension("nope"), Error);
  EXPECT_TRUE(preset_has_analytic("example1"));
  EXPECT_FALSE(preset_has_analytic("example3"));
  EXPECT_TRUE(preset_has_separable("example2"));
  EXPECT_FALSE(preset_has_separable("example3"));
}

TEST(Presets, SeparableOnlyForFirstOrder) {
  PresetOptions po;
  po.n = 8;
  po.ell = 16;
  EXPECT_TRUE(make_preset("example2", po).separable.has_value());
  po.s = 2;
  EXPECT_FALSE(make_preset("example2", po).separable.has_value());
}

TEST(Presets, CustomIsSeededAndNeedsFirstOrder) {
  PresetOptions po;
  po.n = 6;
  po.ell = 8;
  po.d = 2;
  po.seed = 5;
  const ProblemSpec a = make_preset("custom", po);
  const ProblemSpec b = make_preset("custom", po);
  EXPECT_EQ(a.grid.d, 2);
  EXPECT_EQ((sample(a.grid, a.u0) - sample(b.grid, b.u0)).norm(), 0.0);
  po.seed = 6;
  EXPECT_GT((sample(a.grid, a.u0) - sample(a.grid, make_preset("custom", po).u0)).norm(), 0.0);
  po.s = 2;
  try {
    (void)make_preset("custom", po);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingInitialValues);
  }
}

TEST(Config, ParsesKeyValueText) {
  const RunConfig c = parse_config(
      "# comment\n"
      "preset = example3\n"
      "n=16\n"
      "ell = 32   # trailing\n"
      "method=rksm\n"
      "tol=1e-6\n"
      "mmax=7\n"
      "epsilon=0.1\n"
      "points=4, 8,16\n");
  EXPECT_EQ(c.preset, "example3");
  EXPECT_EQ(c.n, 16);
  EXPECT_EQ(c.ell, 32);
  EXPECT_EQ(c.method, "rksm");
  EXPECT_DOUBLE_EQ(c.tol, 1e-6);
  EXPECT_EQ(c.m_max, 7);
  EXPECT_DOUBLE_EQ(c.epsilon, 0.1);
  EXPECT_EQ(c.points, (std::vector<Eigen::Index>{4, 8, 16}));
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW((void)parse_config("n=abc\n"), Error);
  EXPECT_THROW((void)parse_config("n=12x\n"), Error);
  EXPECT_THROW((void)parse_config("colour=blue\n"), Error);
  EXPECT_THROW((void)parse_config("no equals sign\n"), Error);
  try {
    (void)load_config_file("/nonexistent/dir/cfg.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Config, ValidationErrors) {
  RunConfig c;
  c.preset = "example9";
  expect_config_error(c);
  c = RunConfig{};
  c.d = 2;
  expect_config_error(c);
  c = RunConfig{};
  c.n = 2;
  expect_config_error(c);
  c = RunConfig{};
  c.s = 7;
  expect_config_error(c);
  c = RunConfig{};
  c.s = 3;
  c.ell = 3;
  expect_config_error(c);
  c = RunConfig{};
  c.method = "gmres";
  expect_config_error(c);
  c = RunConfig{};
  c.inner = "fast";
  expect_config_error(c);
  c = RunConfig{};
  c.preset = "example3";
  c.separable = "on";
  expect_config_error(c);
  c = RunConfig{};
  c.tol = 0.0;
  expect_config_error(c);
  c = RunConfig{};
  c.sweep = "space";
  c.points = {8};
  expect_config_error(c);
  c = RunConfig{};
  c.preset = "example2";
  c.sweep = "time";
  c.points = {8, 16};
  expect_config_error(c);
  c = RunConfig{};
  c.jobs = 0;
  expect_config_error(c);
}

TEST(Csv, HeaderAndRows) {
  const std::string csv = format_csv({record("example1", 8, 16)});
  std::istringstream in(csv);
  std::string header, row, extra;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header,
            "preset,d,n,ell,s,method,inner,iterations,final_residual,wall_time_s,memory_units,error_vs_oracle,"
            "error_vs_analytic");
  EXPECT_FALSE(std::getline(in, extra));
  EXPECT_EQ(row.substr(0, 20), "example1,1,8,16,1,ek");
  EXPECT_NE(row.find("1.500000e-09"), std::string::npos);
  EXPECT_EQ(row.substr(row.size() - 5), ",42,,");
}

TEST(Csv, SortedByPresetThenSize) {
  const std::string csv =
      format_csv({record("example3", 8, 16), record("example1", 16, 8), record("example1", 8, 32), record("example1", 8, 16)});
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> keys;
  while (std::getline(in, line)) {
    const auto p1 = line.find(',');
    const auto p2 = line.find(',', p1 + 1);
    const auto p3 = line.find(',', p2 + 1);
    const auto p4 = line.find(',', p3 + 1);
    keys.push_back(line.substr(0, p1) + ":" + line.substr(p2 + 1, p4 - p2 - 1));
  }
  EXPECT_EQ(keys, (std::vector<std::string>{"example1:8,16", "example1:8,32", "example1:16,8", "example3:8,16"}));
}

TEST(Report, WritesFileAndSummary) {
  const auto path = std::filesystem::temp_directory_path() / "evosylv_report_test.csv";
  std::ostringstream summary;
  const std::vector<RunRecord> recs = {record("example1", 8, 16)};
  emit_report(recs, path.string(), summary);
  std::ifstream f(path);
  std::stringstream content;
  content << f.rdbuf();
  EXPECT_EQ(content.str(), format_csv(recs));
  EXPECT_NE(summary.str().find("iterations 3"), std::string::npos);
  std::filesystem::remove(path);
  EXPECT_THROW(emit_report(recs, "/nonexistent/dir/out.csv", summary), Error);
}

TEST(Run, Example1MatchesOracleAndAnalytic) {
  RunConfig c;
  c.n = 64;
  c.ell = 64;
  c.tol = 1e-10;
  const RunRecord r = run(c);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.d, 1);
  ASSERT_TRUE(r.error_vs_oracle.has_value());
  EXPECT_LE(*r.error_vs_oracle, 1e-8);
  ASSERT_TRUE(r.error_vs_analytic.has_value());
  EXPECT_LE(*r.error_vs_analytic, 1e-2);
  EXPECT_LE(r.final_residual, 1e-10);
}

TEST(Run, DeterministicApartFromTiming) {
  RunConfig c;
  c.preset = "example3";
  c.n = 12;
  c.ell = 16;
  c.method = "rksm";
  const RunRecord a = run(c);
  const RunRecord b = run(c);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.final_residual, b.final_residual);
  EXPECT_EQ(a.memory_units, b.memory_units);
  EXPECT_EQ(a.error_vs_oracle, b.error_vs_oracle);
}

TEST(Run, LayoutSelection) {
  RunConfig c;
  c.preset = "example2";
  c.n = 12;
  c.ell = 16;
  EXPECT_EQ(run(c).layout, "tensor");
  c.separable = "off";
  EXPECT_EQ(run(c).layout, "full");
  c.method = "timestep-oracle";
  const RunRecord o = run(c);
  EXPECT_EQ(o.layout, "oracle");
  ASSERT_TRUE(o.error_vs_oracle.has_value());
  EXPECT_LE(*o.error_vs_oracle, 1e-10);
}

TEST(Study, SpaceSweepAndPlotData) {
  RunConfig c;
  c.sweep = "space";
  c.s = 2;
  c.ell = 512;
  c.tol = 1e-12;
  c.points = {17, 33, 65};
  c.jobs = 2;
  const StudyResult st = convergence_study(c);
  ASSERT_EQ(st.points.size(), 3U);
  EXPECT_EQ(st.points[0].record.config.n, 17);
  EXPECT_GT(st.points[0].refinement, st.points[2].refinement);
  EXPECT_NEAR(st.slope, 2.0, 0.2);
  const std::string plot = format_plot_data(st);
  std::istringstream in(plot);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 14), "# space sweep,");
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    double x = 0.0, y = 0.0;
    EXPECT_TRUE(static_cast<bool>(ls >> x >> y));
    ++rows;
  }
  EXPECT_EQ(rows, 3);
}

TEST(Study, FittedSlope) {
  EXPECT_NEAR(fitted_slope({1.0, 2.0, 4.0}, {3.0, 12.0, 48.0}), 2.0, 1e-12);
  EXPECT_THROW((void)fitted_slope({1.0}, {1.0}), Error);
}

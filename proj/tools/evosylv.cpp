// Command-line driver: runs a preset, a convergence sweep, and writes CSV.
#include "evosylv/errors.hpp"
#include "evosylv/presets.hpp"
#include "evosylv/run.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

namespace {

constexpr int kExitNoConvergence = 2;
constexpr int kExitConfig = 3;
constexpr int kExitFailure = 4;

void init_logging() {
  spdlog::set_level(spdlog::level::warn);
  spdlog::set_pattern("[%l] %v");
  if (const char* lvl = std::getenv("EVOSYLV_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"All-at-once space-time solver for linear evolution equations"};

  std::string config_path;
  std::map<std::string, std::string> values;
  app.add_option("--config", config_path, "key=value file; flags given on the command line override it");
  const std::vector<std::pair<std::string, std::string>> flags = {
      {"preset", "example1|example2|example2_1|example3|example4|custom"},
      {"d", "spatial dimension (custom preset)"},
      {"n", "grid points per direction"},
      {"ell", "time steps"},
      {"s", "BDF order 1..6"},
      {"method", "eksm|rksm|timestep-oracle|dense-oracle"},
      {"inner", "fft_smw|sequential"},
      {"separable", "auto|on|off"},
      {"tol", "relative residual tolerance"},
      {"mmax", "maximum outer iterations"},
      {"epsilon", "viscosity (example3)"},
      {"out", "CSV output path"},
      {"seed", "seed for randomised presets"},
      {"sweep", "none|space|time"},
      {"points", "comma separated n (space) or ell (time) values"},
      {"jobs", "parallel sweep points"},
  };
  for (const auto& [key, help] : flags) app.add_option("--" + key, values[key], help);
  std::string plot_path;
  app.add_option("--plot-data", plot_path, "write (refinement, error) pairs of a sweep here");

  CLI11_PARSE(app, argc, argv);

  try {
    evosylv::RunConfig cfg;
    if (!config_path.empty()) cfg = evosylv::load_config_file(config_path, cfg);
    for (const auto& [key, help] : flags) {
      if (app.get_option("--" + key)->count() > 0) evosylv::apply_config_value(cfg, key, values[key]);
    }
    cfg.validate();

    std::vector<evosylv::RunRecord> records;
    if (cfg.sweep == "none") {
      records.push_back(evosylv::run(cfg));
    } else {
      const evosylv::StudyResult study = evosylv::convergence_study(cfg);
      for (const auto& p : study.points) records.push_back(p.record);
      std::cout << evosylv::format_plot_data(study);
      if (!plot_path.empty()) {
        std::ofstream f(plot_path);
        if (!f) throw evosylv::Error(evosylv::ErrorCode::IoError, "cannot write " + plot_path);
        f << evosylv::format_plot_data(study);
      }
    }
    evosylv::emit_report(records, cfg.output_path, std::cout);
    if (cfg.output_path.empty()) std::cout << evosylv::format_csv(records);

    for (const auto& r : records) {
      if (!r.converged) return kExitNoConvergence;
    }
    return 0;
  } catch (const evosylv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == evosylv::ErrorCode::ConfigError ? kExitConfig : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

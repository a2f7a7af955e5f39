#pragma once

#include "evosylv/discretization.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace evosylv {

struct PresetOptions {
  Eigen::Index n = 64;
  Eigen::Index ell = 256;
  int s = 1;
  double epsilon = 1.0;  // viscosity, example3 only
  int d = 0;             // custom only; 0 picks the preset dimension
  std::uint64_t seed = 0;
};

/// example1 .. example4 and custom.
const std::vector<std::string>& preset_names();
bool is_preset(const std::string& name);
/// Spatial dimension of a named preset (custom reports 0: caller chooses).
int preset_dimension(const std::string& name);
/// True when the preset carries per-direction factors usable by the tensorised solver.
bool preset_has_separable(const std::string& name);
/// True when a closed-form solution is available.
bool preset_has_analytic(const std::string& name);

/// Builds the problem. Separable factors are attached whenever the preset has
/// them and s = 1; the sampled functions are always filled in as well so the
/// same spec drives the full-space solvers and the oracles.
ProblemSpec make_preset(const std::string& name, const PresetOptions& opts);

/// Analytic solution of example1 at time index k on the grid.
Vector example1_exact(const Grid& grid, Eigen::Index k);

}  // namespace evosylv

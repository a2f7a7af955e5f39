#include "evosylv/presets.hpp"

#include "evosylv/errors.hpp"
#include "evosylv/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace evosylv {

namespace {

constexpr double kPi = std::numbers::pi;

double bump(double x) { return (1.0 - x * x) * std::exp(x); }

ProblemSpec example1(const PresetOptions& o) {
  ProblemSpec spec;
  spec.grid = make_grid(1, o.n, 0.0, kPi, 1.0, o.ell);
  spec.scheme = bdf_coefficients(o.s);
  spec.u0 = [](std::span<const double> x) { return std::sin(x[0]); };
  // exact u_1 .. u_{s-1}; the convergence study relies on these
  for (int k = 1; k < o.s; ++k) spec.extra_initial.push_back(example1_exact(spec.grid, k));
  if (o.s == 1) spec.separable = SeparableData{{[](double x) { return std::sin(x); }}, {}};
  return spec;
}

ProblemSpec example2(const PresetOptions& o) {
  ProblemSpec spec;
  spec.grid = make_grid(2, o.n, 0.0, 1.0, 1.0, o.ell);
  spec.scheme = bdf_coefficients(o.s);
  spec.u0 = [](std::span<const double> x) { return x[0] * (x[0] - 1.0) * x[1] * (x[1] - 1.0); };
  if (o.s == 1) {
    const ScalarFn phi = [](double x) { return x * (x - 1.0); };
    spec.separable = SeparableData{{phi, phi}, {}};
  }
  return spec;
}

ProblemSpec example2_1(const PresetOptions& o) {
  ProblemSpec spec;
  spec.grid = make_grid(3, o.n, -1.0, 1.0, 2.0, o.ell);
  spec.scheme = bdf_coefficients(o.s);
  const ScalarFn time = [](double t) { return 1.0 + std::sin(kPi * t / 2.0); };
  spec.f = [time](std::span<const double> x, double t) { return time(t) * bump(x[0]) * bump(x[1]) * bump(x[2]); };
  if (o.s == 1) {
    const ScalarFn b = bump;
    spec.separable = SeparableData{{}, {SeparableTerm{{b, b, b}, time}}};
  }
  return spec;
}

bool on_hot_wall(double x) { return std::abs(x) < 1e-14; }

ProblemSpec example3(const PresetOptions& o) {
  ProblemSpec spec;
  spec.kind = ProblemKind::ConvectionDiffusion;
  spec.epsilon = o.epsilon;
  spec.grid = make_grid(2, o.n, 0.0, 1.0, 1.0, o.ell);
  spec.scheme = bdf_coefficients(o.s);
  // w = (2y(1-x^2), -2x(1-y^2))
  spec.wind = {{[](double x) { return 1.0 - x * x; }, [](double y) { return 2.0 * y; }},
               {[](double x) { return -2.0 * x; }, [](double y) { return 1.0 - y * y; }}};
  spec.g = [](std::span<const double> x, double) { return on_hot_wall(x[0]) ? 1.0 : 0.0; };
  spec.u0 = [](std::span<const double> x) { return on_hot_wall(x[0]) ? 1.0 : 0.0; };
  return spec;
}

ProblemSpec example4(const PresetOptions& o) {
  ProblemSpec spec;
  spec.kind = ProblemKind::ConvectionDiffusion;
  spec.epsilon = 1.0;
  spec.grid = make_grid(3, o.n, 0.0, 1.0, 1.0, o.ell);
  spec.scheme = bdf_coefficients(o.s);
  // w = (x sin x, y cos y, exp(z^2 - 1)); each component depends on its own coordinate only
  spec.wind = {{[](double x) { return x * std::sin(x); }, ScalarFn{}, ScalarFn{}},
               {ScalarFn{}, [](double y) { return y * std::cos(y); }, ScalarFn{}},
               {ScalarFn{}, ScalarFn{}, [](double z) { return std::exp(z * z - 1.0); }}};
  // u0 = g with -lap g + w.grad g = 1, g = 0 on the boundary. Boundary rows of
  // Kbar are multiples of the identity, so a zero right-hand side there gives g = 0.
  const SpaceOperator op = assemble_space_operator(spec);
  const kernels::SparseFactorization lu(op.assembled);
  spec.u0_values = Vector(lu.solve(op.interior_indicator()).col(0));
  return spec;
}

// Heat equation on (0,1)^d with a random smooth initial value drawn from the seed.
ProblemSpec custom(const PresetOptions& o) {
  const int d = o.d == 0 ? 2 : o.d;
  ProblemSpec spec;
  spec.grid = make_grid(d, o.n, 0.0, 1.0, 1.0, o.ell);
  spec.scheme = bdf_coefficients(o.s);
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<double> c(3);
  for (double& v : c) v = coef(rng);
  spec.u0 = [c](std::span<const double> x) {
    double sum = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      double p = c[k];
      for (double xi : x) p *= std::sin(static_cast<double>(k + 1) * kPi * xi);
      sum += p;
    }
    return sum;
  };
  if (o.s > 1) {
    throw Error(ErrorCode::MissingInitialValues, "custom preset has no extra initial values for s > 1");
  }
  return spec;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"example1", "example2", "example2_1", "example3", "example4",
                                                 "custom"};
  return names;
}

bool is_preset(const std::string& name) {
  const auto& names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

int preset_dimension(const std::string& name) {
  if (name == "example1") return 1;
  if (name == "example2" || name == "example3") return 2;
  if (name == "example2_1" || name == "example4") return 3;
  if (name == "custom") return 0;
  throw Error(ErrorCode::ConfigError, "unknown preset '" + name + "'");
}

bool preset_has_separable(const std::string& name) {
  return name == "example1" || name == "example2" || name == "example2_1";
}

bool preset_has_analytic(const std::string& name) { return name == "example1"; }

ProblemSpec make_preset(const std::string& name, const PresetOptions& opts) {
  if (name == "example1") return example1(opts);
  if (name == "example2") return example2(opts);
  if (name == "example2_1") return example2_1(opts);
  if (name == "example3") return example3(opts);
  if (name == "example4") return example4(opts);
  if (name == "custom") return custom(opts);
  throw Error(ErrorCode::ConfigError, "unknown preset '" + name + "'");
}

Vector example1_exact(const Grid& grid, Eigen::Index k) {
  const Vector x = grid.nodes(0);
  const double t = grid.time(k);
  return x.unaryExpr([t](double v) { return analytic_example1(v, t); });
}

}  // namespace evosylv

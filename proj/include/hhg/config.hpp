#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "hhg/benchmark.hpp"

namespace hhg {

enum class OmegaSource { Default, Estimate, Value };
enum class SweepMode { Default, Full, Custom };

// Run configuration read from a line-oriented `key = value` file. Blank lines
// and text after '#' are ignored.
struct BenchmarkConfig {
  std::string mesh = "cube";  // "cube", "tet" or a mesh file path
  Discretization kind = Discretization::P2P1;
  int level = 3;
  SolverParams params;
  bool params_given = false;
  OmegaSource omega = OmegaSource::Default;
  double omega_value = 0.0;
  SchurScaling schur = SchurScaling::LumpedMass;
  double eps = 1e-12;
  std::string csv;
  std::string json;
  std::string cache;

  SweepMode sweep = SweepMode::Default;
  std::vector<int> nu_pre{0, 1, 2, 3}, nu_post{0, 1, 2, 3}, nu_inc{0, 1, 2, 3}, kappa{1, 2};
  std::vector<std::pair<Relaxation, int>> relax{{Relaxation::Forward, 1}, {Relaxation::Forward, 2},
                                                {Relaxation::Forward, 3}, {Relaxation::Forward, 4},
                                                {Relaxation::Symmetric, 1}, {Relaxation::Symmetric, 2}};
  int sweep_budget = 100;  // warn above this many runs

  std::optional<double> gamma_u, gamma_p;
  std::vector<double> budgets;

  std::string echo;  // normalized key = value listing
};

// Throws std::invalid_argument with the offending line on malformed input.
BenchmarkConfig parse_config(std::istream& in);
BenchmarkConfig load_config(const std::string& path);

// "(1,2,1,1,F,3)" or "1,2,1,1,F,3".
SolverParams parse_params(const std::string& tuple);

// Sweep tuples for the config, with omega and the Schur scaling filled in.
std::vector<SolverParams> sweep_params(const BenchmarkConfig& c, double omega_inv);

// "cube" has the analytic solution; other meshes use its forcing and
// boundary data without an error reference.
BenchmarkProblem make_problem(const BenchmarkConfig& c);

// Built-in default, the configured value, or an estimate on the finest level.
double resolve_omega(const BenchmarkConfig& c, const Hierarchy& h);

}  // namespace hhg

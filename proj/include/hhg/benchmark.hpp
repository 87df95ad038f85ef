#pragma once

#include <array>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hhg/cost_model.hpp"
#include "hhg/mesh.hpp"
#include "hhg/multigrid.hpp"

namespace hhg {

// Analytic solution of the cube benchmark; p has zero mean over (0,1)^3.
struct ExactSolution {
  VectorField u;
  ScalarField p;
  VectorField f;
};
ExactSolution cube_exact_solution();

struct FieldErrors {
  double u = 0.0;
  double p = 0.0;
};

// Error of a level-l solution against analytic fields, measured on level
// l + 1: the solution is prolongated, the nodal interpolant of the exact
// fields is subtracted, and the consistent mass norm is taken per field.
class ErrorEvaluator {
 public:
  ErrorEvaluator(const StokesOperator& op, const VectorField& u, const ScalarField& p);
  FieldErrors error(const StokesVector& x) const;
  int level() const { return level_; }

 private:
  int level_;
  std::shared_ptr<const DofSpace> vspace_, pspace_;
  std::unique_ptr<Transfer> vt_, pt_;
  ScalarOperator vmass_, pmass_;
  std::array<GridFunction, 3> u_exact_;
  GridFunction p_exact_;
};

// Ratios of computed to reference errors.
FieldErrors gamma(const FieldErrors& computed, const FieldErrors& reference);

// Mass-norm relative difference per field on the level of the operator.
FieldErrors relative_delta(const StokesOperator& op, const StokesVector& x, const StokesVector& reference);

struct ReferenceSolution {
  StokesVector x;
  FieldErrors error;
  int cycles = 0;
  bool from_cache = false;
};

// A problem on one macro mesh with right-hand sides assembled on every level.
class BenchmarkProblem {
 public:
  BenchmarkProblem(const MacroMesh& mesh, Discretization kind, int max_level, VectorField forcing,
                   VectorField boundary, std::optional<std::pair<VectorField, ScalarField>> exact = std::nullopt);
  // Cube benchmark with the analytic solution.
  static BenchmarkProblem cube(Discretization kind, int max_level);

  Discretization kind() const { return kind_; }
  int max_level() const { return hierarchy_->max_level(); }
  const Hierarchy& hierarchy() const { return *hierarchy_; }
  const std::vector<StokesVector>& rhs() const { return rhs_; }
  const std::string& mesh_hash() const { return mesh_hash_; }
  bool has_exact() const { return evaluator_ != nullptr; }
  const ErrorEvaluator& evaluator() const;

  // Discrete solution with both residual norms below eps, cached in memory
  // and, if cache_dir is non-empty, on disk.
  const ReferenceSolution& reference(double eps, const std::string& cache_dir = "");

 private:
  Discretization kind_;
  std::string mesh_hash_;
  std::unique_ptr<Hierarchy> hierarchy_;
  std::vector<StokesVector> rhs_;
  std::unique_ptr<ErrorEvaluator> evaluator_;
  std::optional<ReferenceSolution> reference_;
  double reference_eps_ = 0.0;
};

struct BenchResult {
  SolverParams params;
  double predicted_wu = 0.0;        // asymptotic FMG work
  double predicted_wu_level = 0.0;  // finite-level FMG work
  double measured_wu = 0.0;         // smoothing plus residual flops / W(A_L)
  double flop_ratio = 0.0;          // measured / predicted at the finest level
  FieldErrors error;                // analytic errors (zero without an exact solution)
  FieldErrors gamma;                // ratios to the reference errors
  FieldErrors delta;                // relative distance to the reference
  double seconds = 0.0;
  bool ok = true;
  std::string failure;
};

// One FMG solve with metrics against the reference.
BenchResult run_fmg(BenchmarkProblem& problem, const SolverParams& params, const ReferenceSolution& reference);

// Full search space (768 tuples) and the default 36-tuple subset (kappa = 1).
std::vector<SolverParams> search_space(double omega_inv, SchurScaling schur);
std::vector<SolverParams> default_sweep(double omega_inv, SchurScaling schur);

std::vector<BenchResult> run_sweep(BenchmarkProblem& problem, const std::vector<SolverParams>& params,
                                   const ReferenceSolution& reference);

// Least predicted work among successful runs with kappa in the allowed set
// and gamma within the bounds; empty if infeasible.
std::optional<BenchResult> optimize(const std::vector<BenchResult>& results, double gamma_u, double gamma_p,
                                    int kappa = 1);

// Smallest velocity error reachable with predicted work <= budget, per budget.
std::vector<std::pair<double, std::optional<double>>> min_error_for_work(const std::vector<BenchResult>& results,
                                                                         const std::vector<double>& budgets);

struct RunInfo {
  std::string config_echo;
  std::string version;
};

void write_csv(const std::vector<BenchResult>& results, std::ostream& out);
void write_json(const std::vector<BenchResult>& results, const RunInfo& info, std::ostream& out);
std::vector<BenchResult> read_json(std::istream& in);

const char* library_version();

}  // namespace hhg

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hhg/coarse_solver.hpp"
#include "hhg/stokes_operator.hpp"
#include "hhg/transfer.hpp"

namespace hhg {

// Velocity relaxation inside the Uzawa smoother: forward Gauss-Seidel, or a
// forward plus a backward sweep.
enum class Relaxation { Forward, Symmetric };

// Diagonal pressure preconditioner S_hat = omega_inv * D with D the PSPG
// diagonal or the lumped P1 mass. The omega estimate is taken relative to the
// lumped mass, so only LumpedMass pairs with it directly.
enum class SchurScaling { PspgDiagonal, LumpedMass };

const char* to_string(Relaxation r);
const char* to_string(SchurScaling s);

struct SolverParams {
  int nu_pre = 1;
  int nu_post = 1;
  int nu_inc = 0;
  int kappa = 1;
  Relaxation a_hat = Relaxation::Forward;
  int xi = 1;
  double omega_inv = 0.5;
  SchurScaling schur = SchurScaling::LumpedMass;

  // Throws std::invalid_argument on negative counts or omega_inv <= 0.
  void validate() const;
  // Inside the benchmark search space.
  bool in_search_space() const;
  // Compact form "(nu_pre,nu_post,nu_inc,kappa,F|S,xi)".
  std::string label() const;
};

// Tuned values for the cube benchmark.
double default_omega_inv(Discretization kind);

// Operators and transfers for levels 0..L on one macro mesh.
class Hierarchy {
 public:
  Hierarchy(std::shared_ptr<const PrimitiveGraph> graph, int max_level, Discretization kind);

  int max_level() const { return static_cast<int>(ops_.size()) - 1; }
  Discretization kind() const { return kind_; }
  const StokesOperator& op(int level) const { return *ops_.at(level); }
  // Transfers between level - 1 and level.
  const Transfer& velocity_transfer(int level) const { return *vt_.at(level); }
  const Transfer& pressure_transfer(int level) const { return *pt_.at(level); }
  const CoarseSolver& coarse() const { return *coarse_; }
  const std::shared_ptr<const PrimitiveGraph>& graph() const { return graph_; }

  // fine = P coarse for all four fields.
  void prolongate(int fine_level, const StokesVector& coarse, StokesVector& fine, bool accumulate) const;
  void restrict(int fine_level, const StokesVector& fine, StokesVector& coarse) const;

 private:
  std::shared_ptr<const PrimitiveGraph> graph_;
  Discretization kind_;
  std::vector<std::unique_ptr<StokesOperator>> ops_;
  std::vector<std::unique_ptr<Transfer>> vt_, pt_;
  std::unique_ptr<CoarseSolver> coarse_;
};

enum class Phase { Smooth, Residual, Transfer, Coarse, Interpolate };
inline constexpr int kNumPhases = 5;
const char* to_string(Phase p);

struct TraceEvent {
  enum class Kind { PreSmooth, PostSmooth, Residual, Restrict, Recurse, Prolongate, CoarseSolve, Project, FmgInterpolate, Cycle };
  Kind kind;
  int level;
  int count;  // smoothing iterations for smooth events, 0 otherwise
  bool zero_guess = false;
};

// Instrumentation of one solver run.
struct SolverTrace {
  std::vector<TraceEvent> events;
  // Measured flops per phase and level.
  std::map<std::pair<Phase, int>, std::uint64_t> flops;
  // Smoothing iterations per level.
  std::map<int, int> smoothing;

  void clear();
  std::uint64_t total_flops() const;
  std::uint64_t phase_flops(Phase p) const;
};

struct ResidualNorms {
  double velocity = 0.0;
  double pressure = 0.0;
  double max() const { return std::max(velocity, pressure); }
};

// Variable V-cycle and FMG with the inexact Uzawa smoother.
class Multigrid {
 public:
  Multigrid(const Hierarchy& hierarchy, SolverParams params);

  const SolverParams& params() const { return params_; }
  const Hierarchy& hierarchy() const { return *h_; }
  SolverTrace& trace() { return trace_; }
  const SolverTrace& trace() const { return trace_; }

  // One Uzawa iteration on a level.
  void smooth(int level, StokesVector& x, const StokesVector& b);
  // Recursive cycle; smooths nu + (fine_level - level) * nu_inc times.
  void v_cycle(int fine_level, int level, StokesVector& x, const StokesVector& b);
  // Full multigrid; rhs[l] is the right-hand side assembled on level l.
  StokesVector fmg(const std::vector<StokesVector>& rhs);

  ResidualNorms residual_norms(int level, StokesVector& x, const StokesVector& b);

  // Pressure preconditioner entries per slot on a level.
  const std::vector<double>& schur_diagonal(int level) const { return schur_[level]; }

 private:
  struct Workspace {
    StokesVector r, xc, bc;
    std::array<GridFunction, 3> rhs_u;
    GridFunction rp;
  };

  void record(Phase phase, int level, std::uint64_t flops);
  void cycle(int fine_level, int level, StokesVector& x, const StokesVector& b);

  const Hierarchy* h_;
  SolverParams params_;
  std::vector<std::vector<double>> schur_;
  std::vector<Workspace> ws_;
  SolverTrace trace_;
};

struct OmegaEstimate {
  double omega_inv = 0.0;
  std::vector<double> history;  // Rayleigh quotient per iteration
};

// Power iteration on M_L^{-1} (C + B A_s^{-1} B^T), A_s^{-1} one symmetric
// Gauss-Seidel sweep from zero.
OmegaEstimate estimate_omega(const Hierarchy& hierarchy, int level, int iterations = 100,
                             std::uint64_t seed = 20260101);
OmegaEstimate estimate_omega(const StokesOperator& op, int iterations = 100, std::uint64_t seed = 20260101);

struct SolveResult {
  StokesVector x;
  int cycles = 0;
  std::vector<ResidualNorms> history;
};

// Robust parameterization used for reference solutions.
SolverParams reference_params(Discretization kind);

// Repeats V-cycles on the finest level until both residual norms are below eps.
SolveResult solve_to_residual(const Hierarchy& hierarchy, const StokesVector& b, double eps = 1e-12,
                              int max_cycles = 200, const SolverParams* params = nullptr);

}  // namespace hhg

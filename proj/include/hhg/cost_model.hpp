#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hhg/multigrid.hpp"

namespace hhg {

using Rational = boost::multiprecision::cpp_rational;

std::string to_string(const Rational& r);
double to_double(const Rational& r);

enum class Block { A, B, BT, C };
const char* to_string(Block b);

// Flops of one block application on the interior of one macro-cell, counting
// 2n per stencil with n entries; W(B^T) is taken equal to W(B). Level >= 2.
Rational block_work(Discretization kind, Block block, int level);
// W(A) + W(B^T) + W(B) + W(C).
Rational operator_work(Discretization kind, int level);
// One Uzawa iteration: xi velocity relaxations (a symmetric sweep costs two
// operator applications) plus B^T, B and C; the diagonal scaling is free.
Rational smoother_work(Discretization kind, Relaxation a_hat, int xi, int level);

// Limits of the above normalized by the Stokes operator as level -> infinity.
Rational block_work_limit(Discretization kind, Block block);
Rational smoother_work_limit(Discretization kind, Relaxation a_hat, int xi);

// Work on level l of a variable V-cycle with finest level L (flops, finite
// counts, empty interiors contribute zero below level 2).
Rational vcycle_level_work(Discretization kind, const SolverParams& s, int L, int l);
// Exact finite sum over l = 0..L.
Rational vcycle_work_sum(Discretization kind, const SolverParams& s, int L);
// Upper bound 8/7 W(V_L^L) + 16/49 nu_inc W(P_L) in flops.
Rational vcycle_work_bound(Discretization kind, const SolverParams& s, int L);
// Same bound in work units of the finest operator, asymptotic in L.
Rational vcycle_work_bound_limit(Discretization kind, const SolverParams& s);

// FMG work in WU: 8 kappa / 7 times the V-cycle bound. The first form uses
// the asymptotic limits, the second the finite counts on level L.
Rational fmg_work(Discretization kind, const SolverParams& s);
Rational fmg_work(Discretization kind, const SolverParams& s, int L);
// kappa * sum over levels of the exact finite V-cycle sums, in WU of level L.
Rational fmg_work_sum(Discretization kind, const SolverParams& s, int L);

struct AsymptoticRatios {
  Rational laplacian;     // A^{P2P1}_l / A^{P1P1}_{l+1}
  Rational divergence;    // B^{P2P1}_l / B^{P1P1}_{l+1}
  Rational stokes;        // full operators
  Rational unknowns;      // interior unknowns
};
AsymptoticRatios asymptotic_ratios();

// Predicted (exact, in WU) and measured (flops) cost per solver phase.
struct WorkLedger {
  Discretization kind = Discretization::P2P1;
  int level = 0;
  // Measured flops of one application of the finest operator (1 WU).
  std::uint64_t reference_flops = 0;
  std::map<std::string, Rational> predicted;
  std::map<std::string, std::uint64_t> measured;
};

struct PhaseComparison {
  std::string phase;
  bool has_data = false;
  double predicted_wu = 0.0;
  double measured_wu = 0.0;
  double ratio = 0.0;  // measured / predicted
  bool pass = false;
};

struct CostReport {
  double tolerance = 0.15;
  std::vector<PhaseComparison> phases;
  bool all_pass() const;
};

// Ledger of an instrumented solver trace: phases "smooth", "residual" and
// "total" (their sum); transfers and the coarse solve are recorded but not
// predicted.
WorkLedger make_ledger(Discretization kind, int level, const SolverParams& s, const SolverTrace& trace,
                       std::uint64_t reference_flops, bool fmg);

CostReport compare_measured(const WorkLedger& ledger, double tolerance = 0.15);

void write_report_json(const CostReport& report, const WorkLedger& ledger, std::ostream& out);
void write_report_table(const CostReport& report, std::ostream& out);

}  // namespace hhg

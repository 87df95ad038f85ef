// bench: FMG runs, parameter sweeps, cost predictions and omega estimates
// for the Stokes multigrid solver.
//
//   bench run   --config run.cfg
//   bench sweep --config sweep.cfg
//   bench cost  --params "(1,1,2,1,S,1)" --kind p2p1 [--level 5]
//   bench omega --config run.cfg
//
// Exit codes: 0 success, 1 error, 2 infeasible optimization.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>

#include <CLI11.hpp>

#include "hhg/config.hpp"

using namespace hhg;

namespace {

constexpr int kInfeasible = 2;

void print_row(const BenchResult& r) {
  std::cout << std::left << std::setw(16) << r.params.label() << std::right << std::fixed << std::setprecision(3)
            << std::setw(9) << r.predicted_wu << std::setw(9) << r.measured_wu << std::setprecision(4)
            << std::setw(10) << r.gamma.u << std::setw(10) << r.gamma.p << std::scientific << std::setprecision(3)
            << std::setw(12) << r.error.u << std::setw(12) << r.error.p << std::fixed << std::setprecision(2)
            << std::setw(8) << r.seconds << (r.ok ? "" : "  failed: " + r.failure) << '\n';
  std::cout.unsetf(std::ios::floatfield);
  std::cout.precision(6);
}

void print_header() {
  std::cout << std::left << std::setw(16) << "s" << std::right << std::setw(9) << "W(FMG)" << std::setw(9)
            << "meas." << std::setw(10) << "gamma_u" << std::setw(10) << "gamma_p" << std::setw(12) << "e(u)"
            << std::setw(12) << "e(p)" << std::setw(8) << "sec" << '\n';
}

void write_outputs(const BenchmarkConfig& c, const std::vector<BenchResult>& results) {
  const RunInfo info{c.echo, library_version()};
  if (!c.csv.empty()) {
    std::ofstream out(c.csv);
    if (!out) throw std::runtime_error("cannot write " + c.csv);
    write_csv(results, out);
  }
  if (!c.json.empty()) {
    std::ofstream out(c.json);
    if (!out) throw std::runtime_error("cannot write " + c.json);
    write_json(results, info, out);
  }
}

const ReferenceSolution& reference(BenchmarkProblem& p, const BenchmarkConfig& c) {
  const ReferenceSolution& ref = p.reference(c.eps, c.cache);
  std::cout << "reference: " << (ref.from_cache ? "cached" : std::to_string(ref.cycles) + " cycles");
  if (p.has_exact()) std::cout << ", e(u) = " << ref.error.u << ", e(p) = " << ref.error.p;
  std::cout << '\n';
  return ref;
}

int cmd_run(const std::string& path) {
  const BenchmarkConfig c = load_config(path);
  if (!c.params_given) throw std::invalid_argument("run: config needs a params tuple");
  BenchmarkProblem problem = make_problem(c);
  SolverParams s = c.params;
  s.omega_inv = resolve_omega(c, problem.hierarchy());
  s.schur = c.schur;
  std::cout << to_string(c.kind) << " on " << c.mesh << ", L = " << c.level << ", omega_inv = " << s.omega_inv << '\n';
  const ReferenceSolution& ref = reference(problem, c);
  const BenchResult r = run_fmg(problem, s, ref);
  print_header();
  print_row(r);
  std::cout << "delta_u = " << r.delta.u << ", delta_p = " << r.delta.p << ", flop ratio = " << r.flop_ratio << '\n';
  write_outputs(c, {r});
  return r.ok ? 0 : 1;
}

int cmd_sweep(const std::string& path) {
  const BenchmarkConfig c = load_config(path);
  BenchmarkProblem problem = make_problem(c);
  const double omega = resolve_omega(c, problem.hierarchy());
  const std::vector<SolverParams> params = sweep_params(c, omega);
  if (static_cast<int>(params.size()) > c.sweep_budget)
    std::cerr << "warning: sweep of " << params.size() << " runs exceeds the budget of " << c.sweep_budget << '\n';
  std::cout << to_string(c.kind) << " on " << c.mesh << ", L = " << c.level << ", omega_inv = " << omega << ", "
            << params.size() << " runs\n";
  const ReferenceSolution& ref = reference(problem, c);
  const auto results = run_sweep(problem, params, ref);
  print_header();
  for (const auto& r : results) print_row(r);
  write_outputs(c, results);

  for (const auto& [w, e] : min_error_for_work(results, c.budgets))
    std::cout << "W <= " << w << ": min e(u) = " << (e ? std::to_string(*e) : std::string("none")) << '\n';

  if (c.gamma_u || c.gamma_p) {
    const double gu = c.gamma_u.value_or(std::numeric_limits<double>::infinity());
    const double gp = c.gamma_p.value_or(std::numeric_limits<double>::infinity());
    const auto best = optimize(results, gu, gp);
    if (!best) {
      std::cout << "infeasible: no kappa = 1 run with gamma_u <= " << gu << " and gamma_p <= " << gp << '\n';
      return kInfeasible;
    }
    std::cout << "optimum for (" << gu << ", " << gp << "): ";
    print_row(*best);
  }
  return 0;
}

int cmd_cost(const std::string& tuple, const std::string& kind_name, int level, bool json) {
  const Discretization kind = parse_discretization(kind_name);
  const SolverParams s = parse_params(tuple);
  const Rational fmg = fmg_work(kind, s);
  const Rational bound = vcycle_work_bound_limit(kind, s);
  const Rational smoother = smoother_work_limit(kind, s.a_hat, s.xi);
  if (json) {
    std::cout << "{\"params\": \"" << s.label() << "\", \"kind\": \"" << to_string(kind) << "\", \"fmg_work\": \""
              << to_string(fmg) << "\", \"fmg_wu\": " << std::setprecision(17) << to_double(fmg);
    if (level >= 2) std::cout << ", \"fmg_wu_level\": " << to_double(fmg_work(kind, s, level));
    std::cout << "}\n";
    return 0;
  }
  std::cout << s.label() << ' ' << to_string(kind) << '\n'
            << "smoother       " << to_string(smoother) << " = " << to_double(smoother) << " WU\n"
            << "V-cycle bound  " << to_string(bound) << " = " << to_double(bound) << " WU\n"
            << "FMG            " << to_string(fmg) << " = " << to_double(fmg) << " WU\n";
  if (level >= 2)
    std::cout << "FMG at L = " << level << "   " << to_double(fmg_work(kind, s, level)) << " WU (finite counts)\n";
  return 0;
}

int cmd_omega(const std::string& path) {
  const BenchmarkConfig c = load_config(path);
  auto graph = std::make_shared<const PrimitiveGraph>(build_primitive_graph(
      c.mesh == "cube" ? generate_unit_cube() : c.mesh == "tet" ? generate_single_tet() : load_mesh(c.mesh)));
  const Hierarchy h(graph, c.level, c.kind);
  const OmegaEstimate e = estimate_omega(h, c.level);
  std::cout << to_string(c.kind) << " on " << c.mesh << ", level " << c.level << ": omega_inv estimate "
            << std::setprecision(6) << e.omega_inv << " (default " << default_omega_inv(c.kind) << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stokes multigrid benchmark driver"};
  app.require_subcommand(1);
  std::string config, tuple, kind = "p2p1";
  int level = 0;
  bool json = false;

  auto* run = app.add_subcommand("run", "FMG solve with one parameter tuple");
  run->add_option("--config", config, "configuration file")->required();
  auto* sweep = app.add_subcommand("sweep", "FMG over a parameter set, with optional optimization");
  sweep->add_option("--config", config, "configuration file")->required();
  auto* cost = app.add_subcommand("cost", "predicted work of a parameter tuple");
  cost->add_option("--params", tuple, "tuple (nu_pre,nu_post,nu_inc,kappa,F|S,xi)")->required();
  cost->add_option("--kind", kind, "p1p1 or p2p1");
  cost->add_option("--level", level, "also evaluate at this finite level");
  cost->add_flag("--json", json, "print JSON");
  auto* omega = app.add_subcommand("omega", "estimate omega_inv by power iteration");
  omega->add_option("--config", config, "configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    if (*run) return cmd_run(config);
    if (*sweep) return cmd_sweep(config);
    if (*cost) return cmd_cost(tuple, kind, level, json);
    if (*omega) return cmd_omega(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

#include "hhg/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hhg/flops.hpp"

namespace hhg {

namespace {

double mass_norm(const ScalarOperator& mass, GridFunction& e) {
  GridFunction me(e.space_ptr());
  mass.apply(e, me);
  return std::sqrt(std::max(0.0, e.dot(me)));
}

double velocity_mass_norm(const ScalarOperator& mass, std::array<GridFunction, 3>& e) {
  double s = 0.0;
  for (auto& c : e) {
    const double n = mass_norm(mass, c);
    s += n * n;
  }
  return std::sqrt(s);
}

}  // namespace

ExactSolution cube_exact_solution() {
  // Mean of sin(4x) sin(8y) sin(2z) over the unit cube.
  const double mean = (1.0 - std::cos(4.0)) / 4.0 * (1.0 - std::cos(8.0)) / 8.0 * (1.0 - std::cos(2.0)) / 2.0;
  ExactSolution s;
  s.u = [](const Point3& x) {
    return Eigen::Vector3d(-4.0 * std::cos(4.0 * x[2]), 8.0 * std::cos(8.0 * x[0]), -2.0 * std::cos(2.0 * x[1]));
  };
  s.p = [mean](const Point3& x) {
    return std::sin(4.0 * x[0]) * std::sin(8.0 * x[1]) * std::sin(2.0 * x[2]) - mean;
  };
  s.f = [](const Point3& x) {
    const double s4x = std::sin(4.0 * x[0]), c4x = std::cos(4.0 * x[0]);
    const double s8y = std::sin(8.0 * x[1]), c8y = std::cos(8.0 * x[1]);
    const double s2z = std::sin(2.0 * x[2]), c2z = std::cos(2.0 * x[2]);
    return Eigen::Vector3d(-64.0 * std::cos(4.0 * x[2]) + 4.0 * c4x * s8y * s2z,
                           512.0 * std::cos(8.0 * x[0]) + 8.0 * s4x * c8y * s2z,
                           -8.0 * std::cos(2.0 * x[1]) + 2.0 * s4x * s8y * c2z);
  };
  return s;
}

ErrorEvaluator::ErrorEvaluator(const StokesOperator& op, const VectorField& u, const ScalarField& p)
    : level_(op.level()) {
  auto graph = op.velocity_space()->graph_ptr();
  const int fine = level_ + 1;
  pspace_ = std::make_shared<const DofSpace>(graph, fine, Space::P1);
  vspace_ = op.velocity_space()->space() == Space::P1 ? pspace_
                                                      : std::make_shared<const DofSpace>(graph, fine, Space::P2);
  vt_ = std::make_unique<Transfer>(op.velocity_space(), vspace_);
  pt_ = std::make_unique<Transfer>(op.pressure_space(), pspace_);
  vmass_ = make_mass_operator(vspace_);
  pmass_ = vspace_ == pspace_ ? vmass_ : make_mass_operator(pspace_);
  for (int d = 0; d < 3; ++d) {
    u_exact_[d] = GridFunction(vspace_);
    u_exact_[d].interpolate([&u, d](const Point3& x) { return u(x)[d]; });
  }
  p_exact_ = GridFunction(pspace_);
  p_exact_.interpolate(p);
}

FieldErrors ErrorEvaluator::error(const StokesVector& x) const {
  std::array<GridFunction, 3> eu;
  for (int d = 0; d < 3; ++d) {
    eu[d] = GridFunction(vspace_);
    vt_->prolongate(x.u[d], eu[d], false);
    eu[d].axpy(-1.0, u_exact_[d]);
  }
  GridFunction ep(pspace_);
  pt_->prolongate(x.p, ep, false);
  ep.axpy(-1.0, p_exact_);
  return {velocity_mass_norm(vmass_, eu), mass_norm(pmass_, ep)};
}

FieldErrors gamma(const FieldErrors& computed, const FieldErrors& reference) {
  if (!(reference.u > 0.0) || !(reference.p > 0.0)) throw std::invalid_argument("gamma: reference error is zero");
  return {computed.u / reference.u, computed.p / reference.p};
}

FieldErrors relative_delta(const StokesOperator& op, const StokesVector& x, const StokesVector& reference) {
  const ScalarOperator vm = make_mass_operator(op.velocity_space());
  const ScalarOperator pm = make_mass_operator(op.pressure_space());
  std::array<GridFunction, 3> du, ru;
  for (int d = 0; d < 3; ++d) {
    du[d] = GridFunction(op.velocity_space());
    du[d].assign(x.u[d]);
    du[d].axpy(-1.0, reference.u[d]);
    ru[d] = GridFunction(op.velocity_space());
    ru[d].assign(reference.u[d]);
  }
  GridFunction dp(op.pressure_space()), rp(op.pressure_space());
  dp.assign(x.p);
  dp.axpy(-1.0, reference.p);
  rp.assign(reference.p);
  const double nu = velocity_mass_norm(vm, ru), np = mass_norm(pm, rp);
  if (!(nu > 0.0) || !(np > 0.0)) throw std::invalid_argument("relative_delta: reference norm is zero");
  return {velocity_mass_norm(vm, du) / nu, mass_norm(pm, dp) / np};
}

BenchmarkProblem::BenchmarkProblem(const MacroMesh& mesh, Discretization kind, int max_level, VectorField forcing,
                                   VectorField boundary, std::optional<std::pair<VectorField, ScalarField>> exact)
    : kind_(kind), mesh_hash_(hhg::mesh_hash(mesh)) {
  auto graph = std::make_shared<const PrimitiveGraph>(build_primitive_graph(mesh));
  hierarchy_ = std::make_unique<Hierarchy>(graph, max_level, kind);
  for (int l = 0; l <= max_level; ++l) rhs_.push_back(assemble_rhs(hierarchy_->op(l), forcing, boundary));
  if (exact) evaluator_ = std::make_unique<ErrorEvaluator>(hierarchy_->op(max_level), exact->first, exact->second);
}

BenchmarkProblem BenchmarkProblem::cube(Discretization kind, int max_level) {
  const ExactSolution s = cube_exact_solution();
  return BenchmarkProblem(generate_unit_cube(), kind, max_level, s.f, s.u, std::make_pair(s.u, s.p));
}

const ErrorEvaluator& BenchmarkProblem::evaluator() const {
  if (!evaluator_) throw std::logic_error("BenchmarkProblem: no exact solution");
  return *evaluator_;
}

const ReferenceSolution& BenchmarkProblem::reference(double eps, const std::string& cache_dir) {
  if (reference_ && reference_eps_ == eps) return *reference_;
  const StokesOperator& op = hierarchy_->op(max_level());
  const auto n = static_cast<Eigen::Index>(op.num_unknowns());
  ReferenceSolution ref;
  ref.x = StokesVector::zeros(op);

  std::filesystem::path file;
  if (!cache_dir.empty()) {
    std::ostringstream name;
    name << "ref_" << mesh_hash_ << '_' << to_string(kind_) << "_L" << max_level() << "_eps" << std::setprecision(3)
         << eps << ".bin";
    file = std::filesystem::path(cache_dir) / name.str();
  }
  bool loaded = false;
  if (!file.empty() && std::filesystem::exists(file)) {
    std::ifstream in(file, std::ios::binary);
    std::int64_t size = 0;
    std::int32_t cycles = 0;
    in.read(reinterpret_cast<char*>(&size), sizeof size);
    in.read(reinterpret_cast<char*>(&cycles), sizeof cycles);
    if (in && size == n) {
      Eigen::VectorXd v(n);
      in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
      if (in) {
        op.from_vector(v, ref.x);
        ref.cycles = cycles;
        ref.from_cache = true;
        loaded = true;
      }
    }
  }
  if (!loaded) {
    SolveResult r = solve_to_residual(*hierarchy_, rhs_.back(), eps);
    ref.x = std::move(r.x);
    ref.cycles = r.cycles;
    if (!file.empty()) {
      std::filesystem::create_directories(file.parent_path());
      const Eigen::VectorXd v = op.to_vector(ref.x);
      std::ofstream out(file, std::ios::binary);
      const std::int64_t size = n;
      const std::int32_t cycles = ref.cycles;
      out.write(reinterpret_cast<const char*>(&size), sizeof size);
      out.write(reinterpret_cast<const char*>(&cycles), sizeof cycles);
      out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    }
  }
  if (evaluator_) ref.error = evaluator_->error(ref.x);
  reference_ = std::move(ref);
  reference_eps_ = eps;
  return *reference_;
}

BenchResult run_fmg(BenchmarkProblem& problem, const SolverParams& params, const ReferenceSolution& reference) {
  BenchResult r;
  r.params = params;
  const int L = problem.max_level();
  const Discretization kind = problem.kind();
  try {
    r.predicted_wu = to_double(fmg_work(kind, params));
    if (L >= 2) r.predicted_wu_level = to_double(fmg_work(kind, params, L));
    const auto start = std::chrono::steady_clock::now();
    Multigrid mg(problem.hierarchy(), params);
    const StokesVector x = mg.fmg(problem.rhs());
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const std::uint64_t unit = problem.hierarchy().op(L).apply_flops();
    const auto& t = mg.trace();
    r.measured_wu = static_cast<double>(t.phase_flops(Phase::Smooth) + t.phase_flops(Phase::Residual)) /
                    static_cast<double>(unit);
    if (L >= 2) {
      const WorkLedger ledger = make_ledger(kind, L, params, t, unit, true);
      r.flop_ratio = r.measured_wu / to_double(ledger.predicted.at("total"));
    }
    if (problem.has_exact()) {
      r.error = problem.evaluator().error(x);
      r.gamma = gamma(r.error, reference.error);
    }
    r.delta = relative_delta(problem.hierarchy().op(L), x, reference.x);
    if (!std::isfinite(r.gamma.u) || !std::isfinite(r.gamma.p) || !std::isfinite(r.delta.u)) {
      r.ok = false;
      r.failure = "non-finite result";
    }
  } catch (const std::exception& e) {
    r.ok = false;
    r.failure = e.what();
  }
  return r;
}

std::vector<SolverParams> search_space(double omega_inv, SchurScaling schur) {
  const std::array<std::pair<Relaxation, int>, 6> relax{
      {{Relaxation::Forward, 1}, {Relaxation::Forward, 2}, {Relaxation::Forward, 3}, {Relaxation::Forward, 4},
       {Relaxation::Symmetric, 1}, {Relaxation::Symmetric, 2}}};
  std::vector<SolverParams> out;
  for (int pre = 0; pre <= 3; ++pre)
    for (int post = 0; post <= 3; ++post)
      for (int inc = 0; inc <= 3; ++inc)
        for (int kappa = 1; kappa <= 2; ++kappa)
          for (const auto& [a, xi] : relax) {
            SolverParams s;
            s.nu_pre = pre;
            s.nu_post = post;
            s.nu_inc = inc;
            s.kappa = kappa;
            s.a_hat = a;
            s.xi = xi;
            s.omega_inv = omega_inv;
            s.schur = schur;
            out.push_back(s);
          }
  return out;
}

std::vector<SolverParams> default_sweep(double omega_inv, SchurScaling schur) {
  std::vector<SolverParams> out;
  for (int pre : {0, 1, 2})
    for (int post : {0, 2, 3})
      for (int inc : {1, 2})
        for (const auto& [a, xi] : {std::pair{Relaxation::Forward, 3}, std::pair{Relaxation::Symmetric, 1}}) {
          SolverParams s;
          s.nu_pre = pre;
          s.nu_post = post;
          s.nu_inc = inc;
          s.a_hat = a;
          s.xi = xi;
          s.omega_inv = omega_inv;
          s.schur = schur;
          out.push_back(s);
        }
  return out;
}

std::vector<BenchResult> run_sweep(BenchmarkProblem& problem, const std::vector<SolverParams>& params,
                                   const ReferenceSolution& reference) {
  std::vector<BenchResult> out;
  out.reserve(params.size());
  for (const auto& s : params) out.push_back(run_fmg(problem, s, reference));
  std::stable_sort(out.begin(), out.end(),
                   [](const BenchResult& a, const BenchResult& b) { return a.predicted_wu < b.predicted_wu; });
  return out;
}

std::optional<BenchResult> optimize(const std::vector<BenchResult>& results, double gamma_u, double gamma_p,
                                    int kappa) {
  std::optional<BenchResult> best;
  for (const auto& r : results) {
    if (!r.ok || r.params.kappa != kappa) continue;
    if (!(r.gamma.u <= gamma_u) || !(r.gamma.p <= gamma_p)) continue;
    if (!best || r.predicted_wu < best->predicted_wu) best = r;
  }
  return best;
}

std::vector<std::pair<double, std::optional<double>>> min_error_for_work(const std::vector<BenchResult>& results,
                                                                         const std::vector<double>& budgets) {
  std::vector<std::pair<double, std::optional<double>>> out;
  for (double w : budgets) {
    std::optional<double> best;
    for (const auto& r : results)
      if (r.ok && r.predicted_wu <= w && (!best || r.error.u < *best)) best = r.error.u;
    out.emplace_back(w, best);
  }
  return out;
}

namespace {

const char* kCsvHeader =
    "label,nu_pre,nu_post,nu_inc,kappa,a_hat,xi,omega_inv,schur,predicted_wu,predicted_wu_level,measured_wu,"
    "flop_ratio,error_u,error_p,gamma_u,gamma_p,delta_u,delta_p,seconds,ok,failure";

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

void write_csv(const std::vector<BenchResult>& results, std::ostream& out) {
  const auto old = out.precision(17);
  out << kCsvHeader << '\n';
  for (const auto& r : results) {
    const auto& s = r.params;
    out << '"' << s.label() << "\"," << s.nu_pre << ',' << s.nu_post << ',' << s.nu_inc << ',' << s.kappa << ','
        << to_string(s.a_hat) << ',' << s.xi << ',' << s.omega_inv << ',' << to_string(s.schur) << ','
        << r.predicted_wu << ',' << r.predicted_wu_level << ',' << r.measured_wu << ',' << r.flop_ratio << ','
        << r.error.u << ',' << r.error.p << ',' << r.gamma.u << ',' << r.gamma.p << ',' << r.delta.u << ','
        << r.delta.p << ',' << r.seconds << ',' << (r.ok ? 1 : 0) << ',' << csv_escape(r.failure) << '\n';
  }
  out.precision(old);
}

void write_json(const std::vector<BenchResult>& results, const RunInfo& info, std::ostream& out) {
  nlohmann::ordered_json j;
  j["version"] = info.version;
  j["config"] = info.config_echo;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    const auto& s = r.params;
    nlohmann::ordered_json e;
    e["label"] = s.label();
    e["nu_pre"] = s.nu_pre;
    e["nu_post"] = s.nu_post;
    e["nu_inc"] = s.nu_inc;
    e["kappa"] = s.kappa;
    e["a_hat"] = to_string(s.a_hat);
    e["xi"] = s.xi;
    e["omega_inv"] = s.omega_inv;
    e["schur"] = to_string(s.schur);
    e["predicted_wu"] = r.predicted_wu;
    e["predicted_wu_level"] = r.predicted_wu_level;
    e["measured_wu"] = r.measured_wu;
    e["flop_ratio"] = r.flop_ratio;
    e["error_u"] = r.error.u;
    e["error_p"] = r.error.p;
    e["gamma_u"] = r.gamma.u;
    e["gamma_p"] = r.gamma.p;
    e["delta_u"] = r.delta.u;
    e["delta_p"] = r.delta.p;
    e["seconds"] = r.seconds;
    e["ok"] = r.ok;
    e["failure"] = r.failure;
    arr.push_back(e);
  }
  j["results"] = arr;
  // nlohmann prints doubles with the shortest round-trip form (at most 17 digits).
  out << j.dump(2) << '\n';
}

namespace {

// Non-finite doubles are written as null.
double number(const nlohmann::json& e, const char* key) {
  const auto& v = e.at(key);
  return v.is_null() ? std::nan("") : v.get<double>();
}

}  // namespace

std::vector<BenchResult> read_json(std::istream& in) {
  const auto j = nlohmann::json::parse(in);
  std::vector<BenchResult> out;
  for (const auto& e : j.at("results")) {
    BenchResult r;
    auto& s = r.params;
    s.nu_pre = e.at("nu_pre");
    s.nu_post = e.at("nu_post");
    s.nu_inc = e.at("nu_inc");
    s.kappa = e.at("kappa");
    s.a_hat = e.at("a_hat").get<std::string>() == "S" ? Relaxation::Symmetric : Relaxation::Forward;
    s.xi = e.at("xi");
    s.omega_inv = number(e, "omega_inv");
    s.schur = e.at("schur").get<std::string>() == "pspg" ? SchurScaling::PspgDiagonal : SchurScaling::LumpedMass;
    r.predicted_wu = number(e, "predicted_wu");
    r.predicted_wu_level = number(e, "predicted_wu_level");
    r.measured_wu = number(e, "measured_wu");
    r.flop_ratio = number(e, "flop_ratio");
    r.error = {number(e, "error_u"), number(e, "error_p")};
    r.gamma = {number(e, "gamma_u"), number(e, "gamma_p")};
    r.delta = {number(e, "delta_u"), number(e, "delta_p")};
    r.seconds = number(e, "seconds");
    r.ok = e.at("ok");
    r.failure = e.at("failure");
    out.push_back(r);
  }
  return out;
}

const char* library_version() { return "0.1.0"; }

}  // namespace hhg

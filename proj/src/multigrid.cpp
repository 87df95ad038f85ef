#include "hhg/multigrid.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hhg/flops.hpp"

namespace hhg {

const char* to_string(Relaxation r) { return r == Relaxation::Forward ? "F" : "S"; }
const char* to_string(SchurScaling s) { return s == SchurScaling::PspgDiagonal ? "pspg" : "lumped"; }

const char* to_string(Phase p) {
  switch (p) {
    case Phase::Smooth:
      return "smooth";
    case Phase::Residual:
      return "residual";
    case Phase::Transfer:
      return "transfer";
    case Phase::Coarse:
      return "coarse";
    case Phase::Interpolate:
      return "interpolate";
  }
  return "?";
}

void SolverParams::validate() const {
  if (nu_pre < 0 || nu_post < 0 || nu_inc < 0) throw std::invalid_argument("smoothing counts must be non-negative");
  if (kappa < 1) throw std::invalid_argument("kappa must be at least 1");
  if (xi < 1) throw std::invalid_argument("xi must be at least 1");
  if (!(omega_inv > 0.0)) throw std::invalid_argument("omega_inv must be positive");
}

bool SolverParams::in_search_space() const {
  auto nu_ok = [](int v) { return v >= 0 && v <= 3; };
  const bool relax_ok = a_hat == Relaxation::Forward ? (xi >= 1 && xi <= 4) : (xi >= 1 && xi <= 2);
  return nu_ok(nu_pre) && nu_ok(nu_post) && nu_ok(nu_inc) && kappa >= 1 && kappa <= 2 && relax_ok;
}

std::string SolverParams::label() const {
  std::ostringstream s;
  s << '(' << nu_pre << ',' << nu_post << ',' << nu_inc << ',' << kappa << ',' << to_string(a_hat) << ',' << xi
    << ')';
  return s.str();
}

double default_omega_inv(Discretization kind) { return kind == Discretization::P2P1 ? 0.448872 : 0.570751; }

Hierarchy::Hierarchy(std::shared_ptr<const PrimitiveGraph> graph, int max_level, Discretization kind)
    : graph_(std::move(graph)), kind_(kind) {
  if (max_level < 0) throw std::invalid_argument("Hierarchy: negative level");
  for (int l = 0; l <= max_level; ++l) ops_.push_back(std::make_unique<StokesOperator>(graph_, l, kind));
  vt_.resize(max_level + 1);
  pt_.resize(max_level + 1);
  for (int l = 1; l <= max_level; ++l) {
    vt_[l] = std::make_unique<Transfer>(ops_[l - 1]->velocity_space(), ops_[l]->velocity_space());
    if (kind == Discretization::P2P1)
      pt_[l] = std::make_unique<Transfer>(ops_[l - 1]->pressure_space(), ops_[l]->pressure_space());
  }
  coarse_ = std::make_unique<CoarseSolver>(*ops_[0]);
}

void Hierarchy::prolongate(int fine_level, const StokesVector& coarse, StokesVector& fine, bool accumulate) const {
  const Transfer& v = velocity_transfer(fine_level);
  const Transfer& p = kind_ == Discretization::P2P1 ? pressure_transfer(fine_level) : v;
  for (int d = 0; d < 3; ++d) v.prolongate(coarse.u[d], fine.u[d], accumulate);
  p.prolongate(coarse.p, fine.p, accumulate);
}

void Hierarchy::restrict(int fine_level, const StokesVector& fine, StokesVector& coarse) const {
  const Transfer& v = velocity_transfer(fine_level);
  const Transfer& p = kind_ == Discretization::P2P1 ? pressure_transfer(fine_level) : v;
  for (int d = 0; d < 3; ++d) v.restrict(fine.u[d], coarse.u[d]);
  p.restrict(fine.p, coarse.p);
}

void SolverTrace::clear() {
  events.clear();
  flops.clear();
  smoothing.clear();
}

std::uint64_t SolverTrace::total_flops() const {
  std::uint64_t s = 0;
  for (const auto& [key, v] : flops) s += v;
  return s;
}

std::uint64_t SolverTrace::phase_flops(Phase p) const {
  std::uint64_t s = 0;
  for (const auto& [key, v] : flops)
    if (key.first == p) s += v;
  return s;
}

Multigrid::Multigrid(const Hierarchy& hierarchy, SolverParams params) : h_(&hierarchy), params_(params) {
  params_.validate();
  const int levels = h_->max_level() + 1;
  schur_.resize(levels);
  ws_.resize(levels);
  for (int l = 0; l < levels; ++l) {
    const StokesOperator& op = h_->op(l);
    const std::vector<double>& base =
        params_.schur == SchurScaling::PspgDiagonal ? op.pspg().diagonal() : op.pressure_lumped_mass();
    schur_[l].resize(base.size());
    for (std::size_t s = 0; s < base.size(); ++s) schur_[l][s] = params_.omega_inv * base[s];
    Workspace& w = ws_[l];
    w.r = StokesVector::zeros(op);
    w.xc = StokesVector::zeros(op);
    w.bc = StokesVector::zeros(op);
    for (auto& g : w.rhs_u) g = GridFunction(op.velocity_space());
    w.rp = GridFunction(op.pressure_space());
  }
}

void Multigrid::record(Phase phase, int level, std::uint64_t flops) { trace_.flops[{phase, level}] += flops; }

void Multigrid::smooth(int level, StokesVector& x, const StokesVector& b) {
  const flops::Scope scope;
  const StokesOperator& op = h_->op(level);
  Workspace& w = ws_[level];
  const ScalarOperator& a = op.A();
  for (int d = 0; d < 3; ++d) {
    GridFunction& rhs = w.rhs_u[d];
    rhs.assign(b.u[d]);
    op.BT(d).apply(x.p, rhs, true, -1.0);
    for (int s = 0; s < params_.xi; ++s) {
      a.gauss_seidel(x.u[d], rhs, false);
      if (params_.a_hat == Relaxation::Symmetric) a.gauss_seidel(x.u[d], rhs, true);
    }
  }
  GridFunction& rp = w.rp;
  rp.assign(b.p);
  for (int d = 0; d < 3; ++d) op.B(d).apply(x.u[d], rp, true, -1.0);
  if (op.C()) op.C()->apply(x.p, rp, true, 1.0);
  const auto& sh = schur_[level];
  const auto& owned = op.pressure_space()->owned_slots();
  for (Slot o : owned) x.p[o] -= rp[o] / sh[o];
  x.p.mark_dirty();
  flops::add(2 * owned.size());
  record(Phase::Smooth, level, scope.elapsed());
  ++trace_.smoothing[level];
}

ResidualNorms Multigrid::residual_norms(int level, StokesVector& x, const StokesVector& b) {
  const flops::Scope scope;
  StokesVector& r = ws_[level].r;
  h_->op(level).residual(x, b, r);
  record(Phase::Residual, level, scope.elapsed());
  return {r.velocity_norm(), r.pressure_norm()};
}

void Multigrid::v_cycle(int fine_level, int level, StokesVector& x, const StokesVector& b) {
  cycle(fine_level, level, x, b);
  if (h_->op(level).fully_dirichlet()) {
    h_->op(level).project_pressure_mean_zero(x.p);
    trace_.events.push_back({TraceEvent::Kind::Project, level, 0});
  }
  trace_.events.push_back({TraceEvent::Kind::Cycle, level, 0});
}

void Multigrid::cycle(int fine_level, int level, StokesVector& x, const StokesVector& b) {
  if (level == 0) {
    const flops::Scope scope;
    h_->coarse().solve(b, x);
    record(Phase::Coarse, 0, scope.elapsed());
    trace_.events.push_back({TraceEvent::Kind::CoarseSolve, 0, 0});
    return;
  }
  const int extra = (fine_level - level) * params_.nu_inc;
  const int pre = params_.nu_pre + extra;
  const int post = params_.nu_post + extra;
  trace_.events.push_back({TraceEvent::Kind::PreSmooth, level, pre});
  for (int i = 0; i < pre; ++i) smooth(level, x, b);

  Workspace& w = ws_[level];
  Workspace& wc = ws_[level - 1];
  {
    const flops::Scope scope;
    h_->op(level).residual(x, b, w.r);
    record(Phase::Residual, level, scope.elapsed());
    trace_.events.push_back({TraceEvent::Kind::Residual, level, 0});
  }
  {
    const flops::Scope scope;
    h_->restrict(level, w.r, wc.bc);
    for (auto& c : wc.bc.u) c.zero_dirichlet();
    record(Phase::Transfer, level, scope.elapsed());
    trace_.events.push_back({TraceEvent::Kind::Restrict, level, 0});
  }
  wc.xc.set_zero();
  trace_.events.push_back({TraceEvent::Kind::Recurse, level - 1, 0, true});
  cycle(fine_level, level - 1, wc.xc, wc.bc);
  {
    const flops::Scope scope;
    h_->prolongate(level, wc.xc, x, true);
    record(Phase::Transfer, level, scope.elapsed());
    trace_.events.push_back({TraceEvent::Kind::Prolongate, level, 0});
  }
  trace_.events.push_back({TraceEvent::Kind::PostSmooth, level, post});
  for (int i = 0; i < post; ++i) smooth(level, x, b);
}

StokesVector Multigrid::fmg(const std::vector<StokesVector>& rhs) {
  const int top = static_cast<int>(rhs.size()) - 1;
  if (top < 0 || top > h_->max_level()) throw std::invalid_argument("fmg: right-hand sides do not match the hierarchy");
  StokesVector x = StokesVector::zeros(h_->op(0));
  {
    const flops::Scope scope;
    h_->coarse().solve(rhs[0], x);
    record(Phase::Coarse, 0, scope.elapsed());
    trace_.events.push_back({TraceEvent::Kind::CoarseSolve, 0, 0});
  }
  for (int l = 1; l <= top; ++l) {
    const StokesOperator& op = h_->op(l);
    StokesVector fine = StokesVector::zeros(op);
    {
      const flops::Scope scope;
      h_->prolongate(l, x, fine, false);
      for (int d = 0; d < 3; ++d) fine.u[d].copy_dirichlet_from(rhs[l].u[d]);
      if (op.fully_dirichlet()) op.project_pressure_mean_zero(fine.p);
      record(Phase::Interpolate, l, scope.elapsed());
      trace_.events.push_back({TraceEvent::Kind::FmgInterpolate, l, 0});
    }
    for (int k = 0; k < params_.kappa; ++k) v_cycle(l, l, fine, rhs[l]);
    x = std::move(fine);
  }
  return x;
}

OmegaEstimate estimate_omega(const Hierarchy& hierarchy, int level, int iterations, std::uint64_t seed) {
  if (level < 1 || level > hierarchy.max_level()) throw std::invalid_argument("estimate_omega: invalid level");
  return estimate_omega(hierarchy.op(level), iterations, seed);
}

OmegaEstimate estimate_omega(const StokesOperator& op, int iterations, std::uint64_t seed) {
  if (op.level() < 1) throw std::invalid_argument("estimate_omega: invalid level");
  const auto& ps = *op.pressure_space();
  const auto& ml = op.pressure_lumped_mass();
  GridFunction p(op.pressure_space()), z(op.pressure_space());
  std::array<GridFunction, 3> y, rhs;
  for (int d = 0; d < 3; ++d) {
    y[d] = GridFunction(op.velocity_space());
    rhs[d] = GridFunction(op.velocity_space());
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (Slot o : ps.owned_slots()) p[o] = dist(rng);
  p.ghost_update();

  auto normalize = [&]() {
    if (op.fully_dirichlet()) op.project_pressure_mean_zero(p);
    double m = 0.0;
    for (Slot o : ps.owned_slots()) m += ml[o] * p[o] * p[o];
    if (!(m > 1e-300)) throw std::runtime_error("estimate_omega: iterate vanished");
    p.scale(1.0 / std::sqrt(m));
  };
  normalize();

  OmegaEstimate out;
  for (int it = 0; it < iterations; ++it) {
    z.set_zero();
    if (op.C()) op.C()->apply(p, z);
    for (int d = 0; d < 3; ++d) {
      rhs[d].set_zero();
      op.BT(d).apply(p, rhs[d]);
      y[d].set_zero();
      op.A().gauss_seidel(y[d], rhs[d], false);
      op.A().gauss_seidel(y[d], rhs[d], true);
      op.B(d).apply(y[d], z, true);
    }
    double num = 0.0;
    for (Slot o : ps.owned_slots()) num += p[o] * z[o];
    out.history.push_back(num);  // p is M_L-normalized
    for (Slot o : ps.owned_slots()) p[o] = z[o] / ml[o];
    p.mark_dirty();
    normalize();
  }
  out.omega_inv = out.history.empty() ? 0.0 : std::abs(out.history.back());
  return out;
}

SolverParams reference_params(Discretization kind) {
  SolverParams p;
  p.nu_pre = 3;
  p.nu_post = 3;
  p.nu_inc = 0;
  p.kappa = 1;
  p.a_hat = Relaxation::Forward;
  p.xi = 3;
  p.omega_inv = default_omega_inv(kind);
  return p;
}

SolveResult solve_to_residual(const Hierarchy& hierarchy, const StokesVector& b, double eps, int max_cycles,
                              const SolverParams* params) {
  if (!(eps > 0.0)) throw std::invalid_argument("solve_to_residual: eps must be positive");
  const int top = hierarchy.max_level();
  Multigrid mg(hierarchy, params ? *params : reference_params(hierarchy.kind()));
  SolveResult res;
  res.x = StokesVector::zeros(hierarchy.op(top));
  for (int d = 0; d < 3; ++d) res.x.u[d].copy_dirichlet_from(b.u[d]);
  res.history.push_back(mg.residual_norms(top, res.x, b));
  while (!(res.history.back().velocity < eps && res.history.back().pressure < eps)) {
    if (res.cycles == max_cycles) {
      std::ostringstream msg;
      msg << "solve_to_residual: no convergence after " << max_cycles << " cycles; residual history:";
      for (const auto& h : res.history) msg << " (" << h.velocity << ", " << h.pressure << ")";
      throw std::runtime_error(msg.str());
    }
    mg.v_cycle(top, top, res.x, b);
    ++res.cycles;
    res.history.push_back(mg.residual_norms(top, res.x, b));
  }
  return res;
}

}  // namespace hhg

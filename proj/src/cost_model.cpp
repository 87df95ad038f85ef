#include "hhg/cost_model.hpp"

#include <iomanip>
#include <stdexcept>

#include <json.hpp>

namespace hhg {

namespace {

// One term coef * N_tet(2^l - offset).
struct Term {
  std::int64_t coef;
  int offset;
};

// Stencil sizes of the P2 Laplacian: vertex rows, the six plain edge groups
// together, and xyz-edge rows.
constexpr std::int64_t kP2Vertex = 65;
constexpr std::int64_t kP2Edges = 27 + 19 + 27 + 27 + 19 + 27;
constexpr std::int64_t kP2Xyz = 19;
constexpr std::int64_t kP1 = 15;

std::vector<Term> terms(Discretization kind, Block block) {
  if (block == Block::BT) block = Block::B;
  if (kind == Discretization::P2P1) {
    switch (block) {
      case Block::A:
        return {{3 * 2 * kP2Vertex, 3}, {3 * 2 * kP2Edges, 2}, {3 * 2 * kP2Xyz, 1}};
      case Block::B:
        return {{3 * 2 * kP2Vertex, 3}};
      default:
        return {};
    }
  }
  switch (block) {
    case Block::A:
    case Block::B:
      return {{3 * 2 * kP1, 3}};
    default:
      return {{2 * kP1, 3}};
  }
}

Rational eval(const std::vector<Term>& ts, int level) {
  Rational s = 0;
  for (const Term& t : ts) s += Rational(t.coef) * Rational(n_tet_clamped((std::int64_t{1} << level) - t.offset));
  return s;
}

// Leading coefficient in units of 8^l / 6.
Rational leading(const std::vector<Term>& ts) {
  Rational s = 0;
  for (const Term& t : ts) s += t.coef;
  return s;
}

Rational finite_block(Discretization kind, Block b, int level) { return eval(terms(kind, b), level); }

Rational finite_operator(Discretization kind, int level) {
  return finite_block(kind, Block::A, level) + 2 * finite_block(kind, Block::B, level) +
         finite_block(kind, Block::C, level);
}

Rational finite_smoother(Discretization kind, Relaxation a_hat, int xi, int level) {
  const int sweeps = (a_hat == Relaxation::Symmetric ? 2 : 1) * xi;
  return sweeps * finite_block(kind, Block::A, level) + 2 * finite_block(kind, Block::B, level) +
         finite_block(kind, Block::C, level);
}

Rational operator_limit(Discretization kind) {
  return leading(terms(kind, Block::A)) + 2 * leading(terms(kind, Block::B)) + leading(terms(kind, Block::C));
}

void check_level(int level) {
  if (level < 2) throw std::invalid_argument("cost model: level must be at least 2");
}

// Smoothing iterations on level l within a V-cycle of finest level L.
int smoothing_count(const SolverParams& s, int L, int l) { return s.nu_pre + s.nu_post + 2 * (L - l) * s.nu_inc; }

}  // namespace

std::string to_string(const Rational& r) { return r.str(); }

double to_double(const Rational& r) { return r.convert_to<double>(); }

const char* to_string(Block b) {
  switch (b) {
    case Block::A:
      return "A";
    case Block::B:
      return "B";
    case Block::BT:
      return "BT";
    case Block::C:
      return "C";
  }
  return "?";
}

Rational block_work(Discretization kind, Block block, int level) {
  check_level(level);
  return finite_block(kind, block, level);
}

Rational operator_work(Discretization kind, int level) {
  check_level(level);
  return finite_operator(kind, level);
}

Rational smoother_work(Discretization kind, Relaxation a_hat, int xi, int level) {
  check_level(level);
  return finite_smoother(kind, a_hat, xi, level);
}

Rational block_work_limit(Discretization kind, Block block) {
  return leading(terms(kind, block)) / operator_limit(kind);
}

Rational smoother_work_limit(Discretization kind, Relaxation a_hat, int xi) {
  const int sweeps = (a_hat == Relaxation::Symmetric ? 2 : 1) * xi;
  return sweeps * block_work_limit(kind, Block::A) + 2 * block_work_limit(kind, Block::B) +
         block_work_limit(kind, Block::C);
}

Rational vcycle_level_work(Discretization kind, const SolverParams& s, int L, int l) {
  if (l < 0 || l > L) throw std::invalid_argument("vcycle_level_work: level out of range");
  return smoothing_count(s, L, l) * finite_smoother(kind, s.a_hat, s.xi, l) + finite_operator(kind, l);
}

Rational vcycle_work_sum(Discretization kind, const SolverParams& s, int L) {
  Rational sum = 0;
  for (int l = 0; l <= L; ++l) sum += vcycle_level_work(kind, s, L, l);
  return sum;
}

Rational vcycle_work_bound(Discretization kind, const SolverParams& s, int L) {
  const Rational top = vcycle_level_work(kind, s, L, L);
  return Rational(8, 7) * top + Rational(16, 49) * s.nu_inc * finite_smoother(kind, s.a_hat, s.xi, L);
}

Rational vcycle_work_bound_limit(Discretization kind, const SolverParams& s) {
  const Rational p = smoother_work_limit(kind, s.a_hat, s.xi);
  const Rational top = (s.nu_pre + s.nu_post) * p + 1;
  return Rational(8, 7) * top + Rational(16, 49) * s.nu_inc * p;
}

Rational fmg_work(Discretization kind, const SolverParams& s) {
  return Rational(8 * s.kappa, 7) * vcycle_work_bound_limit(kind, s);
}

Rational fmg_work(Discretization kind, const SolverParams& s, int L) {
  check_level(L);
  return Rational(8 * s.kappa, 7) * vcycle_work_bound(kind, s, L) / finite_operator(kind, L);
}

Rational fmg_work_sum(Discretization kind, const SolverParams& s, int L) {
  check_level(L);
  Rational sum = 0;
  for (int l = 0; l <= L; ++l) sum += vcycle_work_sum(kind, s, l);
  return s.kappa * sum / finite_operator(kind, L);
}

AsymptoticRatios asymptotic_ratios() {
  using D = Discretization;
  // One level finer multiplies the leading term by 8.
  AsymptoticRatios r;
  r.laplacian = leading(terms(D::P2P1, Block::A)) / (8 * leading(terms(D::P1P1, Block::A)));
  r.divergence = leading(terms(D::P2P1, Block::B)) / (8 * leading(terms(D::P1P1, Block::B)));
  r.stokes = operator_limit(D::P2P1) / (8 * operator_limit(D::P1P1));
  // P2 velocity: vertex, six edge groups and xyz edges, times three; P1 pressure.
  r.unknowns = Rational(3 * (1 + 6 + 1) + 1, 4 * 8);
  return r;
}

bool CostReport::all_pass() const {
  for (const auto& p : phases)
    if (!p.has_data || !p.pass) return false;
  return !phases.empty();
}

WorkLedger make_ledger(Discretization kind, int level, const SolverParams& s, const SolverTrace& trace,
                       std::uint64_t reference_flops, bool fmg) {
  WorkLedger w;
  w.kind = kind;
  w.level = level;
  w.reference_flops = reference_flops;
  const Rational unit = operator_work(kind, level);
  Rational smooth = 0, residual = 0;
  auto add_cycle = [&](int top) {
    for (int l = 1; l <= top; ++l) {
      smooth += smoothing_count(s, top, l) * finite_smoother(kind, s.a_hat, s.xi, l);
      residual += finite_operator(kind, l);
    }
  };
  if (fmg) {
    for (int top = 1; top <= level; ++top)
      for (int k = 0; k < s.kappa; ++k) add_cycle(top);
  } else {
    add_cycle(level);
  }
  w.predicted["smooth"] = smooth / unit;
  w.predicted["residual"] = residual / unit;
  w.predicted["total"] = (smooth + residual) / unit;

  const std::uint64_t sm = trace.phase_flops(Phase::Smooth);
  const std::uint64_t re = trace.phase_flops(Phase::Residual);
  w.measured["smooth"] = sm;
  w.measured["residual"] = re;
  w.measured["total"] = sm + re;
  w.measured["transfer"] = trace.phase_flops(Phase::Transfer) + trace.phase_flops(Phase::Interpolate);
  w.measured["coarse"] = trace.phase_flops(Phase::Coarse);
  return w;
}

CostReport compare_measured(const WorkLedger& ledger, double tolerance) {
  CostReport report;
  report.tolerance = tolerance;
  for (const auto& [phase, pred] : ledger.predicted) {
    PhaseComparison c;
    c.phase = phase;
    c.predicted_wu = to_double(pred);
    const auto it = ledger.measured.find(phase);
    if (it != ledger.measured.end() && it->second > 0 && ledger.reference_flops > 0 && c.predicted_wu > 0.0) {
      c.has_data = true;
      c.measured_wu = static_cast<double>(it->second) / static_cast<double>(ledger.reference_flops);
      c.ratio = c.measured_wu / c.predicted_wu;
      c.pass = std::abs(c.ratio - 1.0) <= tolerance;
    }
    report.phases.push_back(c);
  }
  return report;
}

void write_report_json(const CostReport& report, const WorkLedger& ledger, std::ostream& out) {
  nlohmann::ordered_json j;
  j["discretization"] = to_string(ledger.kind);
  j["level"] = ledger.level;
  j["reference_flops"] = ledger.reference_flops;
  j["tolerance"] = report.tolerance;
  nlohmann::ordered_json phases = nlohmann::ordered_json::array();
  for (const auto& p : report.phases) {
    nlohmann::ordered_json e;
    e["phase"] = p.phase;
    e["predicted_exact"] = to_string(ledger.predicted.at(p.phase));
    e["predicted_wu"] = p.predicted_wu;
    if (p.has_data) {
      e["measured_wu"] = p.measured_wu;
      e["ratio"] = p.ratio;
      e["pass"] = p.pass;
    } else {
      e["status"] = "no data";
    }
    phases.push_back(e);
  }
  j["phases"] = phases;
  nlohmann::ordered_json unpredicted;
  for (const auto& [phase, flops] : ledger.measured)
    if (!ledger.predicted.count(phase)) unpredicted[phase] = flops;
  j["unpredicted_flops"] = unpredicted;
  out << j.dump(2) << '\n';
}

void write_report_table(const CostReport& report, std::ostream& out) {
  out << std::left << std::setw(10) << "phase" << std::right << std::setw(14) << "predicted WU" << std::setw(14)
      << "measured WU" << std::setw(10) << "ratio" << "  status\n";
  for (const auto& p : report.phases) {
    out << std::left << std::setw(10) << p.phase << std::right << std::fixed << std::setprecision(4)
        << std::setw(14) << p.predicted_wu;
    if (p.has_data) {
      out << std::setw(14) << p.measured_wu << std::setw(10) << p.ratio << "  " << (p.pass ? "ok" : "off");
    } else {
      out << std::setw(14) << "-" << std::setw(10) << "-" << "  no data";
    }
    out << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

}  // namespace hhg

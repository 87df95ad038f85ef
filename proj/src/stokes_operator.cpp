#include "hhg/stokes_operator.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace hhg {

const char* to_string(Discretization d) { return d == Discretization::P1P1 ? "p1p1" : "p2p1"; }

Discretization parse_discretization(const std::string& s) {
  if (s == "p1p1" || s == "P1P1" || s == "P1-P1") return Discretization::P1P1;
  if (s == "p2p1" || s == "P2P1" || s == "P2-P1") return Discretization::P2P1;
  throw std::invalid_argument("unknown discretization '" + s + "'");
}

StokesVector StokesVector::zeros(const StokesOperator& op) {
  StokesVector x;
  for (auto& c : x.u) c = GridFunction(op.velocity_space());
  x.p = GridFunction(op.pressure_space());
  return x;
}

void StokesVector::set_zero() {
  for (auto& c : u) c.set_zero();
  p.set_zero();
}

void StokesVector::assign(const StokesVector& x) {
  for (int d = 0; d < 3; ++d) u[d].assign(x.u[d]);
  p.assign(x.p);
}

void StokesVector::axpy(double a, const StokesVector& x) {
  for (int d = 0; d < 3; ++d) u[d].axpy(a, x.u[d]);
  p.axpy(a, x.p);
}

double StokesVector::velocity_norm() const {
  double s = 0.0;
  for (const auto& c : u) s += c.dot(c);
  return std::sqrt(s);
}

ScalarOperator make_mass_operator(std::shared_ptr<const DofSpace> space, bool lumped) {
  const Space s = space->space();
  return ScalarOperator(space, space, lumped ? BlockId::ML : BlockId::M,
                        [s, lumped](const AffineMap& m) { return local_mass(s, m, lumped).entries; }, {});
}

StokesOperator::StokesOperator(std::shared_ptr<const PrimitiveGraph> graph, int level, Discretization kind)
    : graph_(std::move(graph)), level_(level), kind_(kind), fully_dirichlet_(graph_->fully_dirichlet()) {
  const Space vs = velocity_space_of(kind);
  pspace_ = std::make_shared<const DofSpace>(graph_, level, Space::P1);
  vspace_ = vs == Space::P1 ? pspace_ : std::make_shared<const DofSpace>(graph_, level, vs);

  a_ = ScalarOperator(vspace_, vspace_, BlockId::A, [vs](const AffineMap& m) { return local_stiffness(vs, m).entries; },
                      {true, RowRule::Identity});
  for (int d = 0; d < 3; ++d) {
    b_[d] = ScalarOperator(pspace_, vspace_, BlockId::B,
                           [vs, d](const AffineMap& m) { return local_divergence(m, vs)[d].entries; },
                           {true, RowRule::Plain});
    bt_[d] = ScalarOperator(
        vspace_, pspace_, BlockId::B,
        [vs, d](const AffineMap& m) { return Eigen::MatrixXd(local_divergence(m, vs)[d].entries.transpose()); },
        {false, RowRule::Zero});
  }
  pspg_ = ScalarOperator(pspace_, pspace_, BlockId::C, [](const AffineMap& m) { return local_pspg(m).entries; }, {});
  if (kind == Discretization::P1P1) c_ = pspg_;

  ScalarOperator mass = make_mass_operator(pspace_);
  GridFunction ones(pspace_), m1(pspace_);
  ones.add_constant(1.0);
  mass.apply(ones, m1);
  ml_.assign(pspace_->num_slots(), 0.0);
  for (Slot s : pspace_->owned_slots()) {
    ml_[s] = m1[s];
    ml_total_ += m1[s];
  }
}

void StokesOperator::apply(StokesVector& x, StokesVector& y) const {
  for (int d = 0; d < 3; ++d) {
    a_.apply(x.u[d], y.u[d]);
    bt_[d].apply(x.p, y.u[d], true);
  }
  for (int d = 0; d < 3; ++d) b_[d].apply(x.u[d], y.p, d > 0);
  if (c_) c_->apply(x.p, y.p, true, -1.0);
}

void StokesOperator::residual(StokesVector& x, const StokesVector& b, StokesVector& r) const {
  apply(x, r);
  for (int d = 0; d < 3; ++d) {
    r.u[d].scale(-1.0);
    r.u[d].axpy(1.0, b.u[d]);
  }
  r.p.scale(-1.0);
  r.p.axpy(1.0, b.p);
}

std::uint64_t StokesOperator::apply_flops() const {
  std::uint64_t f = 0;
  for (int d = 0; d < 3; ++d) f += a_.apply_flops() + b_[d].apply_flops() + bt_[d].apply_flops();
  if (c_) f += c_->apply_flops();
  return f;
}

std::uint64_t StokesOperator::stencil_flops() const {
  std::uint64_t f = 0;
  for (int d = 0; d < 3; ++d) f += a_.stencil_flops() + b_[d].stencil_flops() + bt_[d].stencil_flops();
  if (c_) f += c_->stencil_flops();
  return f;
}

double StokesOperator::pressure_mean(const GridFunction& p) const {
  double s = 0.0;
  for (Slot o : pspace_->owned_slots()) s += ml_[o] * p[o];
  return s / ml_total_;
}

void StokesOperator::project_pressure_mean_zero(GridFunction& p) const { p.add_constant(-pressure_mean(p)); }

std::vector<Eigen::Triplet<double>> StokesOperator::export_triplets(int level_cap) const {
  if (level_ > level_cap) throw std::invalid_argument("export_assembled: level exceeds the configured cap");
  const auto nv = static_cast<Eigen::Index>(num_velocity_dofs());
  std::vector<Eigen::Triplet<double>> t;
  for (int d = 0; d < 3; ++d) {
    a_.add_triplets(t, d * nv, d * nv);
    bt_[d].add_triplets(t, d * nv, 3 * nv);
    b_[d].add_triplets(t, 3 * nv, d * nv);
  }
  if (c_) {
    const std::size_t first = t.size();
    c_->add_triplets(t, 3 * nv, 3 * nv);
    for (std::size_t i = first; i < t.size(); ++i) t[i] = {t[i].row(), t[i].col(), -t[i].value()};
  }
  return t;
}

Eigen::SparseMatrix<double> StokesOperator::export_assembled(int level_cap) const {
  const auto t = export_triplets(level_cap);
  const auto n = static_cast<Eigen::Index>(num_unknowns());
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Eigen::VectorXd StokesOperator::to_vector(const StokesVector& x) const {
  const auto nv = static_cast<Eigen::Index>(num_velocity_dofs());
  Eigen::VectorXd v(num_unknowns());
  for (int d = 0; d < 3; ++d) v.segment(d * nv, nv) = x.u[d].to_dofs();
  v.tail(num_pressure_dofs()) = x.p.to_dofs();
  return v;
}

void StokesOperator::from_vector(const Eigen::VectorXd& v, StokesVector& x) const {
  const auto nv = static_cast<Eigen::Index>(num_velocity_dofs());
  for (int d = 0; d < 3; ++d) x.u[d].from_dofs(v.segment(d * nv, nv));
  x.p.from_dofs(v.tail(num_pressure_dofs()));
}

StencilTable assemble_stencils(const StokesOperator& op) {
  if (op.level() < 2) throw std::invalid_argument("assemble_stencils: level must be at least 2");
  StencilTable table{op.kind(), op.level(), {}, {}, {}, {}};
  const int ncells = static_cast<int>(op.graph().cells.size());
  for (int c = 0; c < ncells; ++c) {
    for (DofGroup g : op.velocity_space()->groups()) {
      table.a.push_back(op.A().stencil(c, g));
      for (int d = 0; d < 3; ++d) table.bt[d].push_back(op.BT(d).stencil(c, g));
    }
    for (int d = 0; d < 3; ++d) table.b[d].push_back(op.B(d).stencil(c, DofGroup::Vertex));
    if (op.C()) table.c.push_back(op.C()->stencil(c, DofGroup::Vertex));
  }
  return table;
}

StokesVector assemble_rhs(const StokesOperator& op, const VectorField& forcing, const VectorField& boundary) {
  StokesVector b = StokesVector::zeros(op);
  const DofSpace& vs = *op.velocity_space();
  const DofSpace& ps = *op.pressure_space();
  const Space vsp = vs.space();
  const int level = op.level();
  const auto& graph = op.graph();
  const auto& vnodes = micro_cell_nodes(vsp);
  const auto& pnodes = micro_cell_nodes(Space::P1);
  const int nvl = local_dofs(vsp);
  const bool pspg_forcing = op.kind() == Discretization::P1P1;

  // Boundary values at Dirichlet owner slots.
  std::array<std::vector<double>, 3> w;
  for (auto& wd : w) wd.assign(vs.num_slots(), 0.0);
  for (Slot o : vs.owned_slots())
    if (vs.is_dirichlet(o)) {
      const Eigen::Vector3d val = boundary(vs.position(o));
      for (int d = 0; d < 3; ++d) w[d][o] = val[d];
    }

  const auto& rule = quadrature(5);
  const std::size_t nq = rule.points.size();
  Eigen::MatrixXd phi(nvl, nq);
  for (std::size_t q = 0; q < nq; ++q) phi.col(static_cast<Eigen::Index>(q)) = basis_values(vsp, rule.points[q]);

  std::array<std::vector<double>, 3> fu;
  for (auto& f : fu) f.assign(vs.num_slots(), 0.0);
  std::vector<double> gp(ps.num_slots(), 0.0);
  std::vector<Eigen::Vector3d> fq(nq);

  for (std::size_t c = 0; c < graph.cells.size(); ++c) {
    const int ci = static_cast<int>(c);
    std::array<Point3, 4> macro;
    for (int r = 0; r < 4; ++r) macro[r] = graph.coordinates[graph.cells[c].vertices[r]];
    std::array<AffineMap, kNumMicroCellTypes> maps;
    std::array<Eigen::MatrixXd, kNumMicroCellTypes> ka;
    std::array<std::array<Eigen::MatrixXd, 3>, kNumMicroCellTypes> kb;
    std::array<Eigen::Matrix<double, 4, 3>, kNumMicroCellTypes> pgrad;
    std::array<double, kNumMicroCellTypes> pspg_scale{};
    for (int t = 0; t < kNumMicroCellTypes; ++t) {
      maps[t] = micro_cell_map(macro, level, static_cast<MicroCellType>(t));
      ka[t] = local_stiffness(vsp, maps[t]).entries;
      const auto div = local_divergence(maps[t], vsp);
      for (int d = 0; d < 3; ++d) kb[t][d] = div[d].entries;
      pgrad[t] = basis_gradients(Space::P1, Eigen::Vector3d(0.25, 0.25, 0.25)) * maps[t].inverse_transpose().transpose();
      pspg_scale[t] = kPspgDelta * std::pow(maps[t].volume(), 2.0 / 3.0);
    }

    for_each_micro_cell(level, [&](const MicroCell& mc) {
      const int t = static_cast<int>(mc.type);
      const AffineMap& map = maps[t];
      const Point3 shift = lattice_to_point(macro, level, {2 * mc.anchor[0], 2 * mc.anchor[1], 2 * mc.anchor[2]}) - macro[0];
      const double jac = std::abs(map.det);
      for (std::size_t q = 0; q < nq; ++q) fq[q] = forcing(map(rule.points[q]) + shift);

      std::array<Slot, 10> vslot{};
      bool lifted = false;
      for (int r = 0; r < nvl; ++r) {
        const auto& nd = vnodes[t][r];
        vslot[r] = vs.owner(vs.cell_slot(ci, {nd.group, {nd.anchor[0] + mc.anchor[0], nd.anchor[1] + mc.anchor[1],
                                                         nd.anchor[2] + mc.anchor[2]}}));
        lifted |= vs.is_dirichlet(vslot[r]);
      }
      std::array<Slot, 4> pslot{};
      for (int r = 0; r < 4; ++r) {
        const auto& nd = pnodes[t][r];
        pslot[r] = ps.owner(ps.cell_slot(ci, {nd.group, {nd.anchor[0] + mc.anchor[0], nd.anchor[1] + mc.anchor[1],
                                                         nd.anchor[2] + mc.anchor[2]}}));
      }

      for (int r = 0; r < nvl; ++r) {
        if (vs.is_dirichlet(vslot[r])) continue;
        Eigen::Vector3d acc = Eigen::Vector3d::Zero();
        for (std::size_t q = 0; q < nq; ++q) acc += (rule.weights[q] * phi(r, static_cast<Eigen::Index>(q))) * fq[q];
        for (int d = 0; d < 3; ++d) fu[d][vslot[r]] += jac * acc[d];
      }

      if (lifted) {
        for (int d = 0; d < 3; ++d) {
          Eigen::VectorXd wl = Eigen::VectorXd::Zero(nvl);
          for (int r = 0; r < nvl; ++r)
            if (vs.is_dirichlet(vslot[r])) wl[r] = w[d][vslot[r]];
          const Eigen::VectorXd aw = ka[t] * wl;
          for (int r = 0; r < nvl; ++r)
            if (!vs.is_dirichlet(vslot[r])) fu[d][vslot[r]] -= aw[r];
          const Eigen::VectorXd bw = kb[t][d] * wl;
          for (int k = 0; k < 4; ++k) gp[pslot[k]] -= bw[k];
        }
      }

      if (pspg_forcing) {
        Eigen::Vector3d fint = Eigen::Vector3d::Zero();
        for (std::size_t q = 0; q < nq; ++q) fint += rule.weights[q] * fq[q];
        fint *= jac;
        for (int k = 0; k < 4; ++k) gp[pslot[k]] -= pspg_scale[t] * pgrad[t].row(k).dot(fint);
      }
    });
  }

  for (Slot o : vs.owned_slots())
    for (int d = 0; d < 3; ++d) b.u[d][o] = vs.is_dirichlet(o) ? w[d][o] : fu[d][o];
  for (Slot o : ps.owned_slots()) b.p[o] = gp[o];
  for (auto& c : b.u) c.ghost_update();
  b.p.ghost_update();
  make_rhs_compatible(op, b);
  return b;
}

void make_rhs_compatible(const StokesOperator& op, StokesVector& b) {
  if (!op.fully_dirichlet()) return;
  const auto& owned = op.pressure_space()->owned_slots();
  double s = 0.0;
  for (Slot o : owned) s += b.p[o];
  b.p.add_constant(-s / static_cast<double>(owned.size()));
}

void write_coordinate_matrix(const std::vector<Eigen::Triplet<double>>& triplets, std::ostream& out) {
  out << std::setprecision(17);
  for (const auto& t : triplets) out << t.row() << ' ' << t.col() << ' ' << t.value() << '\n';
}

}  // namespace hhg

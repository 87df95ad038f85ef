#include <doctest.h>

#include <map>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/SparseLU>

#include "hhg/stokes_operator.hpp"

using namespace hhg;

namespace {

std::shared_ptr<const PrimitiveGraph> cube_graph() {
  static auto g = std::make_shared<const PrimitiveGraph>(build_primitive_graph(generate_unit_cube()));
  return g;
}

std::shared_ptr<const PrimitiveGraph> tet_graph() {
  static auto g = std::make_shared<const PrimitiveGraph>(build_primitive_graph(generate_single_tet()));
  return g;
}

// Number of distinct P1 (or P2) node positions of the refined mesh.
std::size_t distinct_nodes(const PrimitiveGraph& g, int level, Space space) {
  const int n = 1 << level;
  const int fine = space == Space::P2 ? 2 * n : n;
  std::set<std::array<long long, 3>> pts;
  for (const auto& c : g.cells) {
    std::array<Point3, 4> x;
    for (int i = 0; i < 4; ++i) x[i] = g.coordinates[c.vertices[i]];
    for (int k = 0; k <= fine; ++k)
      for (int j = 0; j + k <= fine; ++j)
        for (int i = 0; i + j + k <= fine; ++i) {
          const Point3 p = x[0] + (x[1] - x[0]) * (double(i) / fine) + (x[2] - x[0]) * (double(j) / fine) +
                           (x[3] - x[0]) * (double(k) / fine);
          pts.insert({std::llround(p[0] * 1e9), std::llround(p[1] * 1e9), std::llround(p[2] * 1e9)});
        }
  }
  return pts.size();
}

void randomize(GridFunction& f, std::mt19937_64& rng, bool zero_dirichlet) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(f.space().num_dofs());
  for (auto& x : v) x = u(rng);
  f.from_dofs(v);
  if (zero_dirichlet) {
    f.zero_dirichlet();
    f.ghost_update();
  }
}

StokesVector random_vector(const StokesOperator& op, std::mt19937_64& rng, bool zero_dirichlet) {
  StokesVector x = StokesVector::zeros(op);
  for (auto& c : x.u) randomize(c, rng, zero_dirichlet);
  randomize(x.p, rng, false);
  return x;
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

ScalarOperator unmasked_divergence(const StokesOperator& op, int d) {
  const Space vs = velocity_space_of(op.kind());
  return ScalarOperator(op.pressure_space(), op.velocity_space(), BlockId::B,
                        [vs, d](const AffineMap& m) { return local_divergence(m, vs)[d].entries; }, {});
}

}  // namespace

TEST_CASE("global dof counts match coordinate deduplication") {
  for (auto graph : {tet_graph(), cube_graph()})
    for (int level = 0; level <= 3; ++level)
      for (Space s : {Space::P1, Space::P2}) {
        const DofSpace space(graph, level, s);
        CHECK(space.num_dofs() == distinct_nodes(*graph, level, s));
      }
  for (int level = 0; level <= 3; ++level)
    CHECK(DofSpace(cube_graph(), level, Space::P2).num_dofs() == DofSpace(cube_graph(), level + 1, Space::P1).num_dofs());
}

TEST_CASE("ownership and ghosts") {
  const auto space = std::make_shared<const DofSpace>(cube_graph(), 3, Space::P2);
  std::set<Slot> owned(space->owned_slots().begin(), space->owned_slots().end());
  for (std::size_t s = 0; s < space->num_slots(); ++s) {
    const Slot o = space->owner(Slot(s));
    CHECK(owned.count(o) == 1);
    CHECK((space->position(Slot(s)) - space->position(o)).norm() < 1e-13);
  }
  GridFunction f(space);
  f.interpolate([](const Point3& x) { return std::sin(3 * x[0]) + x[1] * x[2]; });
  const std::vector<double> once(f.data(), f.data() + f.size());
  f.ghost_update();
  f.ghost_update();
  CHECK(std::equal(once.begin(), once.end(), f.data()));
  for (const auto& gp : space->all_ghost_pairs()) CHECK(f[gp.ghost] == f[gp.owner]);
  f.ghost_update_masked();
  for (const auto& gp : space->all_ghost_pairs()) CHECK(f[gp.ghost] == (gp.dirichlet ? 0.0 : f[gp.owner]));
}

TEST_CASE("stencil entry counts") {
  for (auto graph : {tet_graph(), cube_graph()})
    for (int level = 2; level <= 3; ++level) {
      const StencilTable p2 = assemble_stencils(StokesOperator(graph, level, Discretization::P2P1));
      const std::array<std::size_t, 8> total{65, 27, 19, 27, 27, 19, 27, 19};
      const std::array<std::size_t, 8> vertex{15, 8, 6, 8, 8, 6, 8, 6};
      for (const GroupStencil& s : p2.a) {
        const int g = group_index(s.target);
        CHECK(s.size() == total[g]);
        CHECK(s.count_from(DofGroup::Vertex) == vertex[g]);
        CHECK(std::abs(s.row_sum()) < 1e-12 * std::abs(s.center()));
        CHECK(s.center() > 0.0);
      }
      const StencilTable p1 = assemble_stencils(StokesOperator(graph, level, Discretization::P1P1));
      for (const GroupStencil& s : p1.a) CHECK(s.size() == 15);
      for (const GroupStencil& s : p1.c) CHECK(s.size() == 15);
    }
  CHECK_THROWS(assemble_stencils(StokesOperator(tet_graph(), 1, Discretization::P1P1)));
}

TEST_CASE("matrix-free apply equals the assembled matrix") {
  std::mt19937_64 rng(42);
  for (auto graph : {tet_graph(), cube_graph()})
    for (int level = 0; level <= 3; ++level)
      for (Discretization kind : {Discretization::P1P1, Discretization::P2P1}) {
        CAPTURE(level);
        const StokesOperator op(graph, level, kind);
        const Eigen::SparseMatrix<double> a = op.export_assembled();
        StokesVector x = random_vector(op, rng, false), y = StokesVector::zeros(op);
        op.apply(x, y);
        CHECK(rel(op.to_vector(y), a * op.to_vector(x)) < 1e-12);
      }
  CHECK_THROWS(StokesOperator(tet_graph(), 4, Discretization::P1P1).export_assembled());
}

TEST_CASE("assembled operator structure") {
  const StokesOperator op(tet_graph(), 2, Discretization::P1P1);
  const Eigen::SparseMatrix<double> a = op.export_assembled();
  CHECK(a.rows() == Eigen::Index(4 * 35));
  const Eigen::SparseMatrix<double> at = a.transpose();
  CHECK((Eigen::MatrixXd(a) - Eigen::MatrixXd(at)).cwiseAbs().maxCoeff() < 1e-13);
  const auto& vs = *op.velocity_space();
  for (std::size_t d = 0; d < vs.num_dofs(); ++d) {
    if (!vs.is_dirichlet(vs.owned_slots()[d])) continue;
    for (int c = 0; c < 3; ++c) {
      const Eigen::Index r = c * vs.num_dofs() + d;
      CHECK(a.coeff(r, r) == 1.0);
      CHECK(a.row(r).cwiseAbs().sum() == 1.0);
    }
  }
  const StokesOperator p2(cube_graph(), 2, Discretization::P2P1);
  const Eigen::SparseMatrix<double> b = p2.export_assembled();
  CHECK((Eigen::MatrixXd(b) - Eigen::MatrixXd(Eigen::SparseMatrix<double>(b.transpose()))).cwiseAbs().maxCoeff() <
        1e-13);
  CHECK(p2.C() == nullptr);
}

TEST_CASE("symmetry for homogeneous Dirichlet data") {
  std::mt19937_64 rng(9);
  for (Discretization kind : {Discretization::P1P1, Discretization::P2P1}) {
    const StokesOperator op(cube_graph(), 3, kind);
    StokesVector x = random_vector(op, rng, true), z = random_vector(op, rng, true);
    StokesVector ax = StokesVector::zeros(op), az = StokesVector::zeros(op);
    op.apply(x, ax);
    op.apply(z, az);
    const double lhs = op.to_vector(ax).dot(op.to_vector(z));
    const double rhs = op.to_vector(x).dot(op.to_vector(az));
    CHECK(std::abs(lhs - rhs) <= 1e-11 * std::abs(lhs));
  }
}

TEST_CASE("zero input gives zero output and constants are in the Laplacian kernel") {
  const StokesOperator op(cube_graph(), 3, Discretization::P2P1);
  StokesVector x = StokesVector::zeros(op), y = StokesVector::zeros(op);
  op.apply(x, y);
  CHECK(op.to_vector(y).norm() == 0.0);

  const auto vs = op.velocity_space();
  const ScalarOperator lap(vs, vs, BlockId::A,
                           [](const AffineMap& m) { return local_stiffness(Space::P2, m).entries; }, {});
  GridFunction one(vs), out(vs);
  one.interpolate([](const Point3&) { return 1.0; });
  lap.apply(one, out);
  CHECK(out.norm() < 1e-12);
}

TEST_CASE("divergence of (x, y, z) is -3 times the P1 load of one") {
  for (Discretization kind : {Discretization::P1P1, Discretization::P2P1}) {
    const StokesOperator op(cube_graph(), 2, kind);
    GridFunction sum(op.pressure_space()), tmp(op.pressure_space());
    for (int d = 0; d < 3; ++d) {
      GridFunction u(op.velocity_space());
      u.interpolate([d](const Point3& x) { return x[d]; });
      unmasked_divergence(op, d).apply(u, sum, d > 0);
    }
    const auto& ml = op.pressure_lumped_mass();
    double err = 0.0, ref = 0.0;
    for (Slot o : op.pressure_space()->owned_slots()) {
      err = std::max(err, std::abs(sum[o] + 3.0 * ml[o]));
      ref = std::max(ref, ml[o]);
    }
    CHECK(err < 1e-13 * ref);
  }
}

TEST_CASE("Gauss-Seidel sweeps are lexicographic in dof order") {
  std::mt19937_64 rng(1);
  for (auto graph : {tet_graph(), cube_graph()})
    for (int level : {1, 3}) {
      const StokesOperator op(graph, level, Discretization::P2P1);
      const ScalarOperator& a = op.A();
      std::vector<Eigen::Triplet<double>> t;
      a.add_triplets(t, 0, 0);
      const Eigen::Index n = Eigen::Index(a.dst_space().num_dofs());
      Eigen::SparseMatrix<double, Eigen::RowMajor> m(n, n);
      m.setFromTriplets(t.begin(), t.end());
      GridFunction u(op.velocity_space()), rhs(op.velocity_space());
      randomize(u, rng, false);
      randomize(rhs, rng, false);
      for (bool backward : {false, true}) {
        Eigen::VectorXd x = u.to_dofs();
        const Eigen::VectorXd b = rhs.to_dofs();
        for (Eigen::Index s = 0; s < n; ++s) {
          const Eigen::Index r = backward ? n - 1 - s : s;
          double acc = b[r], diag = 0.0;
          for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m, r); it; ++it)
            it.col() == r ? diag = it.value() : acc -= it.value() * x[it.col()];
          x[r] = acc / diag;
        }
        a.gauss_seidel(u, rhs, backward);
        CHECK(rel(u.to_dofs(), x) < 1e-13);
      }
    }
}

TEST_CASE("constant boundary data gives a constant solution") {
  for (Discretization kind : {Discretization::P1P1, Discretization::P2P1}) {
    const StokesOperator op(cube_graph(), 2, kind);
    StokesVector b =
        assemble_rhs(op, [](const Point3&) { return Eigen::Vector3d::Zero(); },
                     [](const Point3&) { return Eigen::Vector3d(1, 0, 0); });
    make_rhs_compatible(op, b);
    // Bordered system fixing the pressure mean.
    auto t = op.export_triplets();
    const Eigen::Index n = Eigen::Index(op.num_unknowns());
    const Eigen::Index p0 = 3 * Eigen::Index(op.num_velocity_dofs());
    const auto& ps = *op.pressure_space();
    for (std::size_t d = 0; d < ps.num_dofs(); ++d) {
      const double w = op.pressure_lumped_mass()[ps.owned_slots()[d]];
      t.emplace_back(n, p0 + Eigen::Index(d), w);
      t.emplace_back(p0 + Eigen::Index(d), n, w);
    }
    Eigen::SparseMatrix<double> k(n + 1, n + 1);
    k.setFromTriplets(t.begin(), t.end());
    Eigen::VectorXd rhs(n + 1);
    rhs << op.to_vector(b), 0.0;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(k);
    REQUIRE(lu.info() == Eigen::Success);
    const Eigen::VectorXd sol = lu.solve(rhs);
    StokesVector x = StokesVector::zeros(op);
    op.from_vector(sol.head(n), x);
    for (Slot o : op.velocity_space()->owned_slots()) {
      CHECK(x.u[0][o] == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(std::abs(x.u[1][o]) < 1e-10);
      CHECK(std::abs(x.u[2][o]) < 1e-10);
    }
    CHECK(x.p.norm() < 1e-10);
    StokesVector r = StokesVector::zeros(op);
    op.residual(x, b, r);
    CHECK(std::max(r.velocity_norm(), r.pressure_norm()) < 1e-12);
  }
}

TEST_CASE("pressure mean projection") {
  const StokesOperator op(cube_graph(), 2, Discretization::P1P1);
  GridFunction p(op.pressure_space());
  p.interpolate([](const Point3&) { return 2.5; });
  op.project_pressure_mean_zero(p);
  CHECK(p.norm() < 1e-13);

  std::mt19937_64 rng(4);
  randomize(p, rng, false);
  op.project_pressure_mean_zero(p);
  CHECK(std::abs(op.pressure_mean(p)) < 1e-12 * p.norm());
  const Eigen::VectorXd before = p.to_dofs();
  op.project_pressure_mean_zero(p);
  CHECK((p.to_dofs() - before).norm() < 1e-14 * before.norm());
}

TEST_CASE("zero data gives zero right-hand side") {
  const StokesOperator op(tet_graph(), 2, Discretization::P2P1);
  const auto zero = [](const Point3&) { return Eigen::Vector3d::Zero(); };
  const StokesVector b = assemble_rhs(op, zero, zero);
  CHECK(op.to_vector(b).norm() == 0.0);
}

TEST_CASE("constant pressure has no pressure-block response for P2P1") {
  const StokesOperator op(tet_graph(), 2, Discretization::P2P1);
  StokesVector x = StokesVector::zeros(op), y = StokesVector::zeros(op);
  x.p.interpolate([](const Point3&) { return 1.0; });
  op.apply(x, y);
  CHECK(y.p.norm() == 0.0);
}

TEST_CASE("coordinate matrix output") {
  std::ostringstream out;
  write_coordinate_matrix({{0, 1, 0.1}, {2, 0, -3.0}}, out);
  CHECK(out.str() == "0 1 0.10000000000000001\n2 0 -3\n");
}

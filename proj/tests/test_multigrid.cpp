#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <unsupported/Eigen/IterativeSolvers>

#include "hhg/multigrid.hpp"

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

void randomize(GridFunction& f, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(f.space().num_dofs());
  for (auto& x : v) x = u(rng);
  f.from_dofs(v);
}

StokesVector random_vector(const StokesOperator& op, std::mt19937_64& rng) {
  StokesVector x = StokesVector::zeros(op);
  for (auto& c : x.u) randomize(c, rng);
  randomize(x.p, rng);
  return x;
}

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  return (a.to_dofs() - b.to_dofs()).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd dense(const ScalarOperator& op) {
  std::vector<Eigen::Triplet<double>> t;
  op.add_triplets(t, 0, 0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(op.dst_space().num_dofs()),
                                            static_cast<Eigen::Index>(op.src_space().num_dofs()));
  for (const auto& e : t) m(e.row(), e.col()) += e.value();
  return m;
}

ScalarOperator plain_laplacian(std::shared_ptr<const DofSpace> s) {
  const Space sp = s->space();
  return ScalarOperator(s, s, BlockId::A, [sp](const AffineMap& m) { return local_stiffness(sp, m).entries; }, {});
}

Eigen::MatrixXd bordered_dense(const StokesOperator& op) {
  const auto n = static_cast<Eigen::Index>(op.num_unknowns());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (const auto& t : op.export_triplets(0)) m(t.row(), t.col()) += t.value();
  const auto& ps = *op.pressure_space();
  const auto p0 = 3 * static_cast<Eigen::Index>(op.num_velocity_dofs());
  for (std::size_t d = 0; d < ps.num_dofs(); ++d) {
    const double w = op.pressure_lumped_mass()[ps.owned_slots()[d]];
    m(n, p0 + static_cast<Eigen::Index>(d)) = w;
    m(p0 + static_cast<Eigen::Index>(d), n) = w;
  }
  return m;
}

}  // namespace

TEST_CASE("solver parameters") {
  SolverParams s;
  s.nu_pre = 1;
  s.nu_post = 2;
  s.nu_inc = 1;
  s.a_hat = Relaxation::Forward;
  s.xi = 3;
  CHECK(s.label() == "(1,2,1,1,F,3)");
  CHECK(s.in_search_space());
  s.xi = 5;
  CHECK_FALSE(s.in_search_space());
  s.a_hat = Relaxation::Symmetric;
  s.xi = 3;
  CHECK_FALSE(s.in_search_space());
  s.xi = 1;
  s.omega_inv = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.omega_inv = 1.0;
  s.nu_pre = -1;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  CHECK(default_omega_inv(Discretization::P2P1) == 0.448872);
  CHECK(default_omega_inv(Discretization::P1P1) == 0.570751);
}

TEST_CASE("transfer is the exact transpose of prolongation") {
  std::mt19937_64 rng(11);
  for (Space space : {Space::P1, Space::P2})
    for (int level = 1; level <= 3; ++level) {
      auto c = std::make_shared<const DofSpace>(cube_graph(), level - 1, space);
      auto f = std::make_shared<const DofSpace>(cube_graph(), level, space);
      const Transfer t(c, f);
      GridFunction x(c), y(f), px(f), ry(c);
      randomize(x, rng);
      randomize(y, rng);
      t.prolongate(x, px);
      t.restrict(y, ry);
      const double lhs = px.dot(y), rhs = x.dot(ry);
      CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max(1.0, std::abs(lhs)));
      // Matrix form agrees with the matrix-free application.
      const Eigen::VectorXd mx = t.matrix() * x.to_dofs();
      CHECK((mx - px.to_dofs()).cwiseAbs().maxCoeff() < 1e-14);
    }
  CHECK_THROWS_AS(Transfer(std::make_shared<const DofSpace>(cube_graph(), 0, Space::P1),
                           std::make_shared<const DofSpace>(cube_graph(), 2, Space::P1)),
                  std::invalid_argument);
}

TEST_CASE("P1 prolongation reproduces linear functions") {
  auto lin = [](const Point3& x) { return 1.0 + 2.0 * x[0] - x[1] + 3.0 * x[2]; };
  for (auto graph : {tet_graph(), cube_graph()})
    for (int level = 1; level <= 3; ++level) {
      auto c = std::make_shared<const DofSpace>(graph, level - 1, Space::P1);
      auto f = std::make_shared<const DofSpace>(graph, level, Space::P1);
      GridFunction xc(c), xf(f), pf(f);
      xc.interpolate(lin);
      xf.interpolate(lin);
      Transfer(c, f).prolongate(xc, pf);
      CHECK(max_abs_diff(pf, xf) < 1e-13);
    }
}

TEST_CASE("P2 prolongation reproduces quadratics") {
  const std::vector<std::function<double(const Point3&)>> fs{
      [](const Point3& x) { return x[0] * x[0]; }, [](const Point3& x) { return x[0] * x[1]; },
      [](const Point3& x) { return 1.0 - x[2] + 0.5 * x[1] * x[2] + x[2] * x[2]; }};
  for (const auto& fn : fs)
    for (int level = 1; level <= 3; ++level) {
      auto c = std::make_shared<const DofSpace>(cube_graph(), level - 1, Space::P2);
      auto f = std::make_shared<const DofSpace>(cube_graph(), level, Space::P2);
      GridFunction xc(c), xf(f), pf(f);
      xc.interpolate(fn);
      xf.interpolate(fn);
      Transfer(c, f).prolongate(xc, pf);
      CHECK(max_abs_diff(pf, xf) < 1e-13);
    }
}

TEST_CASE("Galerkin property of nested spaces") {
  // Nested conforming spaces: P^T A_fine P equals the coarse stiffness matrix.
  for (Space space : {Space::P1, Space::P2})
    for (int level = 1; level <= 2; ++level) {
      auto c = std::make_shared<const DofSpace>(tet_graph(), level - 1, space);
      auto f = std::make_shared<const DofSpace>(tet_graph(), level, space);
      const Eigen::MatrixXd p = Eigen::MatrixXd(Transfer(c, f).matrix());
      const Eigen::MatrixXd af = dense(plain_laplacian(f));
      const Eigen::MatrixXd ac = dense(plain_laplacian(c));
      CHECK((p.transpose() * af * p - ac).norm() <= 1e-12 * ac.norm());
    }
}

TEST_CASE("symmetric indefinite factorization") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  SUBCASE("random symmetric matrix against LU") {
    const int n = 40;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = nd(rng);
    Eigen::VectorXd b(n);
    for (auto& v : b) v = nd(rng);
    const SymmetricIndefiniteLDLT f(a);
    const Eigen::VectorXd x = f.solve(b);
    const Eigen::VectorXd y = a.fullPivLu().solve(b);
    CHECK((x - y).norm() <= 1e-10 * y.norm());
  }
  SUBCASE("saddle point matrix needs 2x2 pivots") {
    const int n = 12, m = 5;
    Eigen::MatrixXd h = Eigen::MatrixXd::Random(n, n);
    h = h * h.transpose() + n * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd j = Eigen::MatrixXd::Random(m, n);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n + m, n + m);
    k.topLeftCorner(n, n) = h;
    k.topRightCorner(n, m) = j.transpose();
    k.bottomLeftCorner(m, n) = j;
    Eigen::VectorXd b = Eigen::VectorXd::Random(n + m);
    const Eigen::VectorXd x = SymmetricIndefiniteLDLT(k).solve(b);
    CHECK((k * x - b).norm() <= 1e-12 * b.norm());

    Eigen::Matrix2d swap;
    swap << 0, 1, 1, 0;
    const SymmetricIndefiniteLDLT s(swap);
    CHECK(s.num_two_by_two_blocks() == 1);
    const Eigen::VectorXd z = s.solve(Eigen::Vector2d(3, 7));
    CHECK(z[0] == doctest::Approx(7));
    CHECK(z[1] == doctest::Approx(3));
  }
  SUBCASE("singular matrices are reported") {
    CHECK_THROWS_AS(SymmetricIndefiniteLDLT(Eigen::MatrixXd::Zero(3, 3)), std::runtime_error);
    Eigen::MatrixXd r = Eigen::MatrixXd::Ones(4, 4);
    CHECK_THROWS_AS(SymmetricIndefiniteLDLT{r}, std::runtime_error);
  }
}

TEST_CASE("coarse solve on the cube matches a Krylov oracle") {
  const Hierarchy h(cube_graph(), 0, Discretization::P2P1);
  const StokesOperator& op = h.op(0);
  CHECK(h.coarse().bordered());
  const auto u = [](const Point3& x) { return Eigen::Vector3d(std::sin(x[1]), x[0] * x[2], 1.0 - x[0]); };
  const auto f = [](const Point3& x) { return Eigen::Vector3d(x[0], 1.0, x[1] * x[2]); };
  const StokesVector b = assemble_rhs(op, f, u);
  StokesVector x = StokesVector::zeros(op);
  h.coarse().solve(b, x);

  StokesVector x0 = x, r = StokesVector::zeros(op);
  op.residual(x0, b, r);
  CHECK(std::hypot(r.velocity_norm(), r.pressure_norm()) <= 1e-12 * std::hypot(b.velocity_norm(), b.pressure_norm()));

  const Eigen::MatrixXd kd = bordered_dense(op);
  const Eigen::SparseMatrix<double> k = kd.sparseView();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k.rows());
  rhs.head(k.rows() - 1) = op.to_vector(b);
  Eigen::GMRES<Eigen::SparseMatrix<double>, Eigen::IdentityPreconditioner> gmres;
  gmres.set_restart(static_cast<int>(k.rows()) + 10);
  gmres.setMaxIterations(5 * static_cast<int>(k.rows()));
  gmres.setTolerance(1e-15);
  gmres.compute(k);
  const Eigen::VectorXd y = gmres.solve(rhs);
  const Eigen::VectorXd xv = op.to_vector(x);
  CHECK((y.head(xv.size()) - xv).norm() <= 1e-10 * xv.norm());

  SUBCASE("permuted unknowns give the same solution") {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(kd.rows()));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::mt19937_64 rng(3);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd kp(kd.rows(), kd.cols());
    Eigen::VectorXd rp(kd.rows());
    for (Eigen::Index i = 0; i < kd.rows(); ++i) {
      rp[i] = rhs[perm[i]];
      for (Eigen::Index j = 0; j < kd.cols(); ++j) kp(i, j) = kd(perm[i], perm[j]);
    }
    const Eigen::VectorXd zp = SymmetricIndefiniteLDLT(kp).solve(rp);
    Eigen::VectorXd z(kd.rows());
    for (Eigen::Index i = 0; i < kd.rows(); ++i) z[perm[i]] = zp[i];
    CHECK((z.head(xv.size()) - xv).norm() <= 1e-11 * xv.norm());
  }
}

TEST_CASE("coarse solve edge cases on a single tetrahedron") {
  // Every velocity dof is Dirichlet: the solution is the boundary data and a
  // pressure fixed by the PSPG block.
  const Hierarchy h(tet_graph(), 0, Discretization::P1P1);
  const StokesOperator& op = h.op(0);
  CHECK(op.num_unknowns() == 16);
  std::mt19937_64 rng(9);
  StokesVector want = random_vector(op, rng);
  op.project_pressure_mean_zero(want.p);
  StokesVector b = StokesVector::zeros(op);
  op.apply(want, b);
  StokesVector x = StokesVector::zeros(op);
  h.coarse().solve(b, x);
  for (int d = 0; d < 3; ++d) CHECK(max_abs_diff(x.u[d], want.u[d]) < 1e-14);
  CHECK(max_abs_diff(x.p, want.p) < 1e-12);

  // Taylor-Hood on one element at level 0 has no free velocity: the pressure
  // is undetermined and the factorization reports it.
  CHECK_THROWS_AS(Hierarchy(tet_graph(), 0, Discretization::P2P1), std::runtime_error);
}

TEST_CASE("Gauss-Seidel fixed point and energy decrease") {
  const StokesOperator op(cube_graph(), 2, Discretization::P2P1);
  const ScalarOperator& a = op.A();
  std::mt19937_64 rng(21);
  GridFunction ustar(op.velocity_space()), f(op.velocity_space()), u(op.velocity_space());
  randomize(ustar, rng);
  ustar.zero_dirichlet();
  a.apply(ustar, f);

  u.assign(ustar);
  a.gauss_seidel(u, f, false);
  CHECK(max_abs_diff(u, ustar) < 1e-14);
  a.gauss_seidel(u, f, true);
  CHECK(max_abs_diff(u, ustar) < 1e-14);

  randomize(u, rng);
  u.zero_dirichlet();
  auto energy = [&]() {
    GridFunction e(op.velocity_space()), ae(op.velocity_space());
    e.assign(u);
    e.axpy(-1.0, ustar);
    a.apply(e, ae);
    return e.dot(ae);
  };
  double prev = energy();
  for (int k = 0; k < 10; ++k) {
    a.gauss_seidel(u, f, k % 2 == 1);
    const double now = energy();
    CHECK(now <= prev * (1.0 + 1e-14));
    prev = now;
  }
}

TEST_CASE("Uzawa smoother leaves the exact solution unchanged") {
  for (Discretization kind : {Discretization::P1P1, Discretization::P2P1}) {
    const Hierarchy h(cube_graph(), 2, kind);
    std::mt19937_64 rng(8);
    const StokesOperator& op = h.op(2);
    StokesVector x = random_vector(op, rng);
    StokesVector b = StokesVector::zeros(op);
    op.apply(x, b);
    const Eigen::VectorXd before = op.to_vector(x);
    for (Relaxation a : {Relaxation::Forward, Relaxation::Symmetric}) {
      SolverParams s;
      s.a_hat = a;
      s.xi = 2;
      s.omega_inv = default_omega_inv(kind);
      Multigrid mg(h, s);
      mg.smooth(2, x, b);
      CHECK((op.to_vector(x) - before).norm() <= 1e-12 * before.norm());
    }
  }
}

TEST_CASE("Uzawa smoother damps oscillatory velocity errors") {
  // Error propagation with b = 0 on one macro-cell: start from extreme
  // eigenvectors of the interior velocity Laplacian.
  const Hierarchy h(tet_graph(), 3, Discretization::P1P1);
  const StokesOperator& op = h.op(3);
  const auto& vs = *op.velocity_space();
  std::vector<Eigen::Index> inner;
  for (std::size_t d = 0; d < vs.num_dofs(); ++d)
    if (!vs.is_dirichlet(vs.owned_slots()[d])) inner.push_back(static_cast<Eigen::Index>(d));
  const Eigen::MatrixXd a = dense(op.A());
  Eigen::MatrixXd ai(inner.size(), inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i)
    for (std::size_t j = 0; j < inner.size(); ++j) ai(i, j) = a(inner[i], inner[j]);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ai);

  SolverParams s;
  s.a_hat = Relaxation::Symmetric;
  s.omega_inv = default_omega_inv(Discretization::P1P1);
  auto reduction = [&](Eigen::Index mode) {
    Multigrid mg(h, s);
    StokesVector x = StokesVector::zeros(op), b = StokesVector::zeros(op);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vs.num_dofs()));
    for (std::size_t i = 0; i < inner.size(); ++i) v[inner[i]] = eig.eigenvectors()(static_cast<Eigen::Index>(i), mode);
    x.u[0].from_dofs(v);
    const double n0 = op.to_vector(x).norm();
    for (int k = 0; k < 2; ++k) mg.smooth(3, x, b);
    return op.to_vector(x).norm() / n0;
  };
  const double smooth = reduction(0);
  const double rough = reduction(static_cast<Eigen::Index>(inner.size()) - 1);
  MESSAGE("smooth mode " << smooth << ", oscillatory mode " << rough);
  CHECK(2.0 * rough <= smooth);
}

TEST_CASE("variable V-cycle follows the recursive schedule") {
  const Hierarchy h(cube_graph(), 2, Discretization::P1P1);
  SolverParams s;
  s.nu_pre = 1;
  s.nu_post = 2;
  s.nu_inc = 1;
  s.omega_inv = default_omega_inv(Discretization::P1P1);
  Multigrid mg(h, s);
  StokesVector x = StokesVector::zeros(h.op(2));
  const StokesVector b = assemble_rhs(h.op(2), [](const Point3&) { return Eigen::Vector3d(1, 0, 0); },
                                      [](const Point3&) { return Eigen::Vector3d(0, 0, 0); });
  mg.v_cycle(2, 2, x, b);
  using K = TraceEvent::Kind;
  const std::vector<std::tuple<K, int, int>> want{
      {K::PreSmooth, 2, 1},  {K::Residual, 2, 0},    {K::Restrict, 2, 0},   {K::Recurse, 1, 0},
      {K::PreSmooth, 1, 2},  {K::Residual, 1, 0},    {K::Restrict, 1, 0},   {K::Recurse, 0, 0},
      {K::CoarseSolve, 0, 0}, {K::Prolongate, 1, 0}, {K::PostSmooth, 1, 3}, {K::Prolongate, 2, 0},
      {K::PostSmooth, 2, 2}, {K::Project, 2, 0},     {K::Cycle, 2, 0}};
  const auto& ev = mg.trace().events;
  REQUIRE(ev.size() == want.size());
  for (std::size_t i = 0; i < ev.size(); ++i) {
    CHECK(ev[i].kind == std::get<0>(want[i]));
    CHECK(ev[i].level == std::get<1>(want[i]));
    CHECK(ev[i].count == std::get<2>(want[i]));
    if (ev[i].kind == K::Recurse) CHECK(ev[i].zero_guess);
  }
  // nu_pre + nu_post + 2 (L - l) nu_inc iterations per level.
  CHECK(mg.trace().smoothing.at(2) == 3);
  CHECK(mg.trace().smoothing.at(1) == 5);
  CHECK(mg.trace().smoothing.count(0) == 0);
  CHECK(mg.trace().phase_flops(Phase::Smooth) > 0);
  CHECK(mg.trace().phase_flops(Phase::Transfer) > 0);
}

TEST_CASE("V-cycle base case and FMG on level 0") {
  const Hierarchy h(cube_graph(), 0, Discretization::P2P1);
  const StokesOperator& op = h.op(0);
  const auto u = [](const Point3& x) { return Eigen::Vector3d(x[1], 0.0, x[0]); };
  const auto f = [](const Point3& x) { return Eigen::Vector3d(1.0, x[2], 0.0); };
  const StokesVector b = assemble_rhs(op, f, u);
  SolverParams s;
  Multigrid mg(h, s);
  StokesVector x = StokesVector::zeros(op);
  mg.v_cycle(0, 0, x, b);
  const ResidualNorms r = mg.residual_norms(0, x, b);
  CHECK(r.max() <= 1e-12);
  const StokesVector y = mg.fmg({b});
  CHECK((op.to_vector(y) - op.to_vector(x)).norm() <= 1e-13 * op.to_vector(x).norm());
}

TEST_CASE("V-cycles reduce the residual on the cube") {
  for (Discretization kind : {Discretization::P1P1, Discretization::P2P1}) {
    const Hierarchy h(cube_graph(), 3, kind);
    const auto u = [](const Point3& x) { return Eigen::Vector3d(std::sin(3 * x[1]), x[0] * x[2], 0.0); };
    const auto f = [](const Point3& x) { return Eigen::Vector3d(x[2], 1.0, std::cos(x[0])); };
    const StokesVector b = assemble_rhs(h.op(3), f, u);
    SolverParams s = reference_params(kind);
    Multigrid mg(h, s);
    StokesVector x = StokesVector::zeros(h.op(3));
    double prev = mg.residual_norms(3, x, b).max();
    for (int k = 0; k < 3; ++k) {
      mg.v_cycle(3, 3, x, b);
      const double now = mg.residual_norms(3, x, b).max();
      CHECK(now < prev);
      prev = now;
    }
  }
}

TEST_CASE("omega estimate against a dense eigensolver") {
  for (Discretization kind : {Discretization::P1P1, Discretization::P2P1}) {
    const StokesOperator op(tet_graph(), 2, kind);
    const OmegaEstimate est = estimate_omega(op);
    REQUIRE(est.history.size() == 100);

    // Symmetric Gauss-Seidel in dof order from a zero start:
    // (D + U)^{-1} D (D + L)^{-1}.
    const Eigen::MatrixXd a = dense(op.A());
    const Eigen::MatrixXd lower = a.triangularView<Eigen::Lower>();
    const Eigen::MatrixXd upper = a.triangularView<Eigen::Upper>();
    const Eigen::MatrixXd dg = a.diagonal().asDiagonal();
    const Eigen::MatrixXd as_inv =
        upper.triangularView<Eigen::Upper>().solve(dg * lower.triangularView<Eigen::Lower>().solve(
                                                            Eigen::MatrixXd::Identity(a.rows(), a.cols())));
    const auto np = static_cast<Eigen::Index>(op.num_pressure_dofs());
    Eigen::MatrixXd k = op.C() ? dense(*op.C()) : Eigen::MatrixXd::Zero(np, np);
    for (int d = 0; d < 3; ++d) k += dense(op.B(d)) * as_inv * dense(op.BT(d));
    Eigen::VectorXd ml(np);
    for (Eigen::Index i = 0; i < np; ++i) ml[i] = op.pressure_lumped_mass()[op.pressure_space()->owned_slots()[i]];
    const Eigen::VectorXd s = ml.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd sym = s.asDiagonal() * k * s.asDiagonal();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (sym + sym.transpose()));
    const double lmax = eig.eigenvalues().cwiseAbs().maxCoeff();
    MESSAGE(std::string(to_string(kind)) << ": power iteration " << est.omega_inv << ", dense " << lmax);
    CHECK(std::abs(est.omega_inv - lmax) <= 0.02 * lmax);

    // Rayleigh quotients of a symmetric semi-definite pencil grow monotonically.
    const auto& hist = est.history;
    for (std::size_t i = hist.size() - 20; i < hist.size(); ++i) CHECK(hist[i] >= hist[i - 1] * (1.0 - 1e-12));
    CHECK(hist.back() <= lmax * (1.0 + 1e-12));
    MESSAGE("drift over the last 20 iterations " << (hist.back() - hist[hist.size() - 20]) / hist.back());
  }
  const Hierarchy h(tet_graph(), 1, Discretization::P1P1);
  CHECK_THROWS_AS(estimate_omega(h, 0), std::invalid_argument);
  CHECK(estimate_omega(h, 1).omega_inv == estimate_omega(h.op(1)).omega_inv);
}

TEST_CASE("solve to residual tolerance") {
  const Hierarchy h(cube_graph(), 3, Discretization::P2P1);
  const auto u = [](const Point3& x) { return Eigen::Vector3d(-4 * std::cos(4 * x[2]), 8 * std::cos(8 * x[0]), 0.0); };
  const auto f = [](const Point3& x) { return Eigen::Vector3d(x[0], std::sin(x[1]), 1.0); };
  const StokesVector b = assemble_rhs(h.op(3), f, u);
  const SolveResult r = solve_to_residual(h, b, 1e-12);
  CHECK(r.cycles <= 60);
  StokesVector x = r.x, res = StokesVector::zeros(h.op(3));
  h.op(3).residual(x, b, res);
  CHECK(res.velocity_norm() < 1e-12);
  CHECK(res.pressure_norm() < 1e-12);
  CHECK(std::abs(h.op(3).pressure_mean(x.p)) < 1e-12);

  SolverParams weak;
  weak.omega_inv = default_omega_inv(Discretization::P2P1);
  CHECK_THROWS_WITH_AS(solve_to_residual(h, b, 1e-12, 2, &weak), doctest::Contains("residual history"),
                       std::runtime_error);
  CHECK_THROWS_AS(solve_to_residual(h, b, 0.0), std::invalid_argument);
}

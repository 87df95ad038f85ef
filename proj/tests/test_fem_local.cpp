#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "hhg/fem_local.hpp"

using namespace hhg;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Integral of x^a y^b z^c over the reference tetrahedron.
double monomial_integral(int a, int b, int c) {
  return factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3);
}

AffineMap random_map(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    std::array<Point3, 4> v;
    for (auto& p : v) p = Point3(u(rng), u(rng), u(rng));
    const AffineMap m = AffineMap::from_vertices(v);
    if (std::abs(m.det) > 0.05) return m;
  }
}

const std::array<Eigen::Vector3d, 10> kP2RefNodes{
    Eigen::Vector3d(0, 0, 0),     Eigen::Vector3d(1, 0, 0),     Eigen::Vector3d(0, 1, 0),
    Eigen::Vector3d(0, 0, 1),     Eigen::Vector3d(0.5, 0, 0),   Eigen::Vector3d(0, 0.5, 0),
    Eigen::Vector3d(0, 0, 0.5),   Eigen::Vector3d(0.5, 0.5, 0), Eigen::Vector3d(0.5, 0, 0.5),
    Eigen::Vector3d(0, 0.5, 0.5)};

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

// Reference-quadrature recomputation of a bilinear form of gradients.
Eigen::MatrixXd stiffness_oracle(Space s, const AffineMap& m, int degree) {
  const int n = local_dofs(s);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  const auto& q = quadrature(degree);
  const Eigen::Matrix3d jit = m.jacobian.inverse().transpose();
  for (std::size_t i = 0; i < q.points.size(); ++i) {
    const Eigen::MatrixXd g = basis_gradients(s, q.points[i]) * jit.transpose();
    k += q.weights[i] * std::abs(m.det) * g * g.transpose();
  }
  return k;
}

}  // namespace

TEST_CASE("quadrature exactness") {
  const auto& q1 = quadrature(1);
  REQUIRE(q1.points.size() == 1);
  CHECK(q1.weights[0] == doctest::Approx(1.0 / 6.0));
  CHECK((q1.points[0] - Eigen::Vector3d::Constant(0.25)).norm() < 1e-15);
  CHECK_THROWS(quadrature(0));
  CHECK_THROWS(quadrature(7));
  for (int d = 1; d <= 6; ++d) {
    const auto& q = quadrature(d);
    double wsum = 0.0;
    for (double w : q.weights) {
      CHECK(w > 0.0);
      wsum += w;
    }
    CHECK(wsum == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    for (int a = 0; a <= d; ++a)
      for (int b = 0; a + b <= d; ++b)
        for (int c = 0; a + b + c <= d; ++c) {
          double s = 0.0;
          for (std::size_t i = 0; i < q.points.size(); ++i)
            s += q.weights[i] * std::pow(q.points[i][0], a) * std::pow(q.points[i][1], b) * std::pow(q.points[i][2], c);
          CHECK(s == doctest::Approx(monomial_integral(a, b, c)).epsilon(1e-13));
        }
  }
  double x2 = 0.0;
  const auto& q2 = quadrature(2);
  for (std::size_t i = 0; i < q2.points.size(); ++i) x2 += q2.weights[i] * q2.points[i][0] * q2.points[i][0];
  CHECK(x2 == doctest::Approx(1.0 / 60.0).epsilon(1e-14));
}

TEST_CASE("P2 basis is nodal and a partition of unity") {
  for (int n = 0; n < 10; ++n) {
    const Eigen::VectorXd v = basis_values(Space::P2, kP2RefNodes[n]);
    for (int i = 0; i < 10; ++i) CHECK(v[i] == doctest::Approx(i == n ? 1.0 : 0.0));
  }
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  for (int t = 0; t < 10; ++t) {
    const Eigen::Vector3d xi(u(rng), u(rng), u(rng));
    CHECK(basis_values(Space::P2, xi).sum() == doctest::Approx(1.0));
    CHECK(basis_values(Space::P1, xi).sum() == doctest::Approx(1.0));
    const Eigen::MatrixXd g = basis_gradients(Space::P2, xi);
    const double h = 1e-6;
    for (int d = 0; d < 3; ++d) {
      Eigen::Vector3d xp = xi, xm = xi;
      xp[d] += h;
      xm[d] -= h;
      const Eigen::VectorXd fd = (basis_values(Space::P2, xp) - basis_values(Space::P2, xm)) / (2 * h);
      CHECK((fd - g.col(d)).norm() < 1e-8);
    }
  }
}

TEST_CASE("P1 stiffness closed form") {
  const AffineMap ref = AffineMap::from_vertices({Point3(0, 0, 0), Point3(1, 0, 0), Point3(0, 1, 0), Point3(0, 0, 1)});
  Eigen::Matrix<double, 4, 3> g;
  g << -1, -1, -1, 1, 0, 0, 0, 1, 0, 0, 0, 1;
  const Eigen::MatrixXd expect = g * g.transpose() / 6.0;
  const LocalMatrix k = local_stiffness(Space::P1, ref);
  CHECK(rel_diff(k.entries, expect) < 1e-14);
  CHECK(k.entries.rowwise().sum().norm() < 1e-15);
}

TEST_CASE("stiffness matrices on random elements") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 5; ++t) {
    const AffineMap m = random_map(rng);
    for (Space s : {Space::P1, Space::P2}) {
      const Eigen::MatrixXd k = local_stiffness(s, m).entries;
      CHECK(rel_diff(k, k.transpose()) < 1e-14);
      CHECK(k.rowwise().sum().norm() < 1e-12 * k.norm());
      CHECK(rel_diff(k, stiffness_oracle(s, m, 4)) < 1e-13);
    }
    // Interpolant of x: K c = int grad phi_i . e_x.
    Eigen::VectorXd c(10);
    for (int n = 0; n < 10; ++n) c[n] = m(kP2RefNodes[n])[0];
    Eigen::VectorXd expect = Eigen::VectorXd::Zero(10);
    const auto& q = quadrature(3);
    const Eigen::Matrix3d jit = m.jacobian.inverse().transpose();
    for (std::size_t i = 0; i < q.points.size(); ++i)
      expect += q.weights[i] * std::abs(m.det) * (basis_gradients(Space::P2, q.points[i]) * jit.transpose()).col(0);
    CHECK((local_stiffness(Space::P2, m).entries * c - expect).norm() < 1e-12);
  }
}

TEST_CASE("stiffness scales linearly with element size") {
  std::array<Point3, 4> v{Point3(0.1, 0, 0), Point3(1, 0.2, 0), Point3(0, 1, 0.3), Point3(0.2, 0.1, 1)};
  const AffineMap m1 = AffineMap::from_vertices(v);
  for (auto& p : v) p *= 2.0;
  const AffineMap m2 = AffineMap::from_vertices(v);
  for (Space s : {Space::P1, Space::P2})
    CHECK(rel_diff(local_stiffness(s, m2).entries, 2.0 * local_stiffness(s, m1).entries) < 1e-14);
  const Eigen::MatrixXd c1 = local_pspg(m1).entries, c2 = local_pspg(m2).entries;
  CHECK(rel_diff(c2, std::pow(8.0, 2.0 / 3.0) * 2.0 * c1) < 1e-14);
}

TEST_CASE("divergence blocks") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    const AffineMap m = random_map(rng);
    const double vol = m.volume();
    for (Space s : {Space::P1, Space::P2}) {
      const auto b = local_divergence(m, s);
      const int n = local_dofs(s);
      Eigen::VectorXd div_sum = Eigen::VectorXd::Zero(4);
      for (int d = 0; d < 3; ++d) {
        CHECK(b[d].entries.rows() == 4);
        CHECK(b[d].entries.cols() == n);
        CHECK(b[d].entries.rowwise().sum().norm() < 1e-13);
        Eigen::VectorXd c(n);
        for (int k = 0; k < n; ++k) c[k] = m(kP2RefNodes[k])[d];
        div_sum += b[d].entries * c;
        if (d == 0) CHECK((b[d].entries * c + Eigen::VectorXd::Constant(4, vol / 4)).norm() < 1e-13);
      }
      CHECK((div_sum + Eigen::VectorXd::Constant(4, 3 * vol / 4)).norm() < 1e-13);
    }
  }
}

TEST_CASE("pspg") {
  // Unit volume element.
  const AffineMap m = AffineMap::from_vertices(
      {Point3(0, 0, 0), Point3(6.0, 0, 0), Point3(0, 1, 0), Point3(0, 0, 1)});
  REQUIRE(m.volume() == doctest::Approx(1.0));
  const Eigen::MatrixXd c = local_pspg(m).entries;
  CHECK(rel_diff(c, local_stiffness(Space::P1, m).entries / 12.0) < 1e-14);
  CHECK(c.rowwise().sum().norm() < 1e-14);
  CHECK(rel_diff(c, c.transpose()) < 1e-15);
}

TEST_CASE("mass matrices") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 5; ++t) {
    const AffineMap m = random_map(rng);
    const double vol = m.volume();
    Eigen::Matrix4d expect = Eigen::Matrix4d::Constant(vol / 20.0);
    expect.diagonal().setConstant(vol / 10.0);
    CHECK(rel_diff(local_mass(Space::P1, m, false).entries, expect) < 1e-14);
    const Eigen::MatrixXd lumped = local_mass(Space::P1, m, true).entries;
    CHECK(rel_diff(lumped, Eigen::MatrixXd(Eigen::Vector4d::Constant(vol / 4).asDiagonal())) < 1e-14);
    const Eigen::MatrixXd m2 = local_mass(Space::P2, m, false).entries;
    CHECK(m2.sum() == doctest::Approx(vol).epsilon(1e-13));
    CHECK(rel_diff(m2, m2.transpose()) < 1e-14);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m2).eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("degenerate element is rejected") {
  const std::array<Point3, 4> flat{Point3(0, 0, 0), Point3(1, 0, 0), Point3(0, 1, 0), Point3(1, 1, 0)};
  CHECK_THROWS_AS(local_stiffness(Space::P1, AffineMap::from_vertices(flat)), std::invalid_argument);
  CHECK_THROWS_AS(local_mass(Space::P2, AffineMap::from_vertices(flat), false), std::invalid_argument);
}

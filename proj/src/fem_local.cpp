#include "hhg/fem_local.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/LU>

namespace hhg {

namespace {

// Gauss-Legendre nodes and weights mapped to [0, 1].
void gauss_legendre(int q, std::vector<double>& x, std::vector<double>& w) {
  x.assign(q, 0.0);
  w.assign(q, 0.0);
  for (int i = 0; i < q; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int n = 2; n <= q; ++n) {
        const double p2 = ((2.0 * n - 1.0) * t * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    x[i] = 0.5 * (1.0 - t);
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

QuadratureRule conical_product(int degree) {
  std::vector<double> xu, wu, xv, wv, xw, ww;
  gauss_legendre((degree + 4) / 2, xu, wu);
  gauss_legendre((degree + 3) / 2, xv, wv);
  gauss_legendre((degree + 2) / 2, xw, ww);
  QuadratureRule rule;
  for (std::size_t a = 0; a < xu.size(); ++a)
    for (std::size_t b = 0; b < xv.size(); ++b)
      for (std::size_t c = 0; c < xw.size(); ++c) {
        const double u = xu[a], v = xv[b], w = xw[c];
        rule.points.emplace_back(u, v * (1.0 - u), w * (1.0 - u) * (1.0 - v));
        rule.weights.push_back(wu[a] * wv[b] * ww[c] * (1.0 - u) * (1.0 - u) * (1.0 - v));
      }
  return rule;
}

QuadratureRule make_rule(int degree) {
  QuadratureRule rule;
  if (degree == 1) {
    rule.points.emplace_back(0.25, 0.25, 0.25);
    rule.weights.push_back(1.0 / 6.0);
  } else if (degree == 2) {
    const double a = 0.5854101966249685, b = 0.1381966011250105;
    rule.points = {{b, b, b}, {a, b, b}, {b, a, b}, {b, b, a}};
    rule.weights.assign(4, 1.0 / 24.0);
  } else {
    rule = conical_product(degree);
  }
  return rule;
}

Eigen::Vector4d barycentric(const Eigen::Vector3d& xi) { return {1.0 - xi.sum(), xi[0], xi[1], xi[2]}; }

const Eigen::Matrix<double, 4, 3>& barycentric_gradients() {
  static const Eigen::Matrix<double, 4, 3> g = (Eigen::Matrix<double, 4, 3>() << -1, -1, -1, 1, 0, 0, 0, 1, 0,
                                                0, 0, 1).finished();
  return g;
}

void check_map(const AffineMap& map) {
  if (!(std::abs(map.det) > 0.0) || !std::isfinite(map.det))
    throw std::invalid_argument("degenerate affine map");
}

// Physical gradients, one row per basis function.
Eigen::MatrixXd physical_gradients(Space s, const Eigen::Vector3d& xi, const Eigen::Matrix3d& jit) {
  return basis_gradients(s, xi) * jit.transpose();
}

}  // namespace

AffineMap AffineMap::from_vertices(const std::array<Point3, 4>& v) {
  AffineMap m;
  m.origin = v[0];
  m.jacobian.col(0) = v[1] - v[0];
  m.jacobian.col(1) = v[2] - v[0];
  m.jacobian.col(2) = v[3] - v[0];
  m.det = m.jacobian.determinant();
  return m;
}

double AffineMap::volume() const { return std::abs(det) / 6.0; }

Eigen::Matrix3d AffineMap::inverse_transpose() const { return jacobian.inverse().transpose(); }

const QuadratureRule& quadrature(int degree) {
  static const std::array<QuadratureRule, 6> rules = [] {
    std::array<QuadratureRule, 6> r;
    for (int d = 1; d <= 6; ++d) r[d - 1] = make_rule(d);
    return r;
  }();
  if (degree < 1 || degree > 6) throw std::invalid_argument("quadrature: unsupported degree");
  return rules[degree - 1];
}

Eigen::VectorXd basis_values(Space s, const Eigen::Vector3d& xi) {
  const Eigen::Vector4d l = barycentric(xi);
  if (s == Space::P1) return l;
  Eigen::VectorXd v(10);
  for (int r = 0; r < 4; ++r) v[r] = l[r] * (2.0 * l[r] - 1.0);
  for (int e = 0; e < 6; ++e) v[4 + e] = 4.0 * l[kCellEdgeVertices[e][0]] * l[kCellEdgeVertices[e][1]];
  return v;
}

Eigen::MatrixXd basis_gradients(Space s, const Eigen::Vector3d& xi) {
  const auto& g = barycentric_gradients();
  if (s == Space::P1) return g;
  const Eigen::Vector4d l = barycentric(xi);
  Eigen::MatrixXd out(10, 3);
  for (int r = 0; r < 4; ++r) out.row(r) = (4.0 * l[r] - 1.0) * g.row(r);
  for (int e = 0; e < 6; ++e) {
    const int a = kCellEdgeVertices[e][0], b = kCellEdgeVertices[e][1];
    out.row(4 + e) = 4.0 * (l[a] * g.row(b) + l[b] * g.row(a));
  }
  return out;
}

LocalMatrix local_stiffness(Space space, const AffineMap& map) {
  check_map(map);
  const int nd = local_dofs(space);
  const Eigen::Matrix3d jit = map.inverse_transpose();
  const auto& rule = quadrature(2);
  LocalMatrix out{BlockId::A, space, space, Eigen::MatrixXd::Zero(nd, nd)};
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Eigen::MatrixXd g = physical_gradients(space, rule.points[q], jit);
    out.entries += (rule.weights[q] * std::abs(map.det)) * g * g.transpose();
  }
  return out;
}

std::array<LocalMatrix, 3> local_divergence(const AffineMap& map, Space velocity_space) {
  check_map(map);
  const int nd = local_dofs(velocity_space);
  const Eigen::Matrix3d jit = map.inverse_transpose();
  const auto& rule = quadrature(2);
  std::array<LocalMatrix, 3> out;
  for (auto& b : out) b = {BlockId::B, velocity_space, Space::P1, Eigen::MatrixXd::Zero(4, nd)};
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Eigen::VectorXd psi = basis_values(Space::P1, rule.points[q]);
    const Eigen::MatrixXd g = physical_gradients(velocity_space, rule.points[q], jit);
    const double w = rule.weights[q] * std::abs(map.det);
    for (int d = 0; d < 3; ++d) out[d].entries -= w * psi * g.col(d).transpose();
  }
  return out;
}

LocalMatrix local_pspg(const AffineMap& map) {
  LocalMatrix out = local_stiffness(Space::P1, map);
  out.block = BlockId::C;
  out.entries *= kPspgDelta * std::pow(map.volume(), 2.0 / 3.0);
  return out;
}

LocalMatrix local_mass(Space space, const AffineMap& map, bool lumped) {
  check_map(map);
  const int nd = local_dofs(space);
  const auto& rule = quadrature(space == Space::P1 ? 2 : 4);
  LocalMatrix out{lumped ? BlockId::ML : BlockId::M, space, space, Eigen::MatrixXd::Zero(nd, nd)};
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Eigen::VectorXd phi = basis_values(space, rule.points[q]);
    out.entries += (rule.weights[q] * std::abs(map.det)) * phi * phi.transpose();
  }
  if (lumped) {
    const Eigen::VectorXd rows = out.entries.rowwise().sum();
    out.entries = rows.asDiagonal();
  }
  return out;
}

}  // namespace hhg

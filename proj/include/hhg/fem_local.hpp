#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "hhg/mesh.hpp"

namespace hhg {

enum class Space { P1, P2 };

inline constexpr int local_dofs(Space s) { return s == Space::P1 ? 4 : 10; }

enum class BlockId { A, B, C, M, ML };

// x = origin + jacobian * xi for reference coordinates xi of the unit tetrahedron.
struct AffineMap {
  Eigen::Matrix3d jacobian = Eigen::Matrix3d::Identity();
  Point3 origin = Point3::Zero();
  double det = 1.0;

  static AffineMap from_vertices(const std::array<Point3, 4>& v);
  Point3 operator()(const Eigen::Vector3d& xi) const { return origin + jacobian * xi; }
  double volume() const;
  Eigen::Matrix3d inverse_transpose() const;
};

struct LocalMatrix {
  BlockId block = BlockId::A;
  Space trial = Space::P1;
  Space test = Space::P1;
  Eigen::MatrixXd entries;
};

struct QuadratureRule {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> weights;
};

// Rule on the reference tetrahedron exact for total degree <= d, d in 1..6.
const QuadratureRule& quadrature(int degree);

// Basis values and reference gradients at a reference point.
Eigen::VectorXd basis_values(Space s, const Eigen::Vector3d& xi);
Eigen::MatrixXd basis_gradients(Space s, const Eigen::Vector3d& xi);  // local_dofs x 3

LocalMatrix local_stiffness(Space space, const AffineMap& map);
// One 4 x local_dofs(velocity_space) block per direction: -int psi_k d_d phi_j.
std::array<LocalMatrix, 3> local_divergence(const AffineMap& map, Space velocity_space);
LocalMatrix local_pspg(const AffineMap& map);
LocalMatrix local_mass(Space space, const AffineMap& map, bool lumped);

inline constexpr double kPspgDelta = 1.0 / 12.0;

}  // namespace hhg

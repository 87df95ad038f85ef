#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "hhg/grid_function.hpp"
#include "hhg/scalar_operator.hpp"

namespace hhg {

enum class Discretization { P1P1, P2P1 };

const char* to_string(Discretization d);
Discretization parse_discretization(const std::string& s);
inline Space velocity_space_of(Discretization d) { return d == Discretization::P1P1 ? Space::P1 : Space::P2; }

using VectorField = std::function<Eigen::Vector3d(const Point3&)>;
using ScalarField = std::function<double(const Point3&)>;

class StokesOperator;

struct StokesVector {
  std::array<GridFunction, 3> u;
  GridFunction p;

  static StokesVector zeros(const StokesOperator& op);
  void set_zero();
  void assign(const StokesVector& x);
  void axpy(double a, const StokesVector& x);
  double velocity_norm() const;
  double pressure_norm() const { return p.norm(); }
};

// Block operator [A B^T; B -C] on one level. Dirichlet velocity dofs carry
// identity rows in A, zero rows in B^T, and are dropped as columns of A and B.
class StokesOperator {
 public:
  StokesOperator(std::shared_ptr<const PrimitiveGraph> graph, int level, Discretization kind);

  int level() const { return level_; }
  Discretization kind() const { return kind_; }
  const PrimitiveGraph& graph() const { return *graph_; }
  const std::shared_ptr<const DofSpace>& velocity_space() const { return vspace_; }
  const std::shared_ptr<const DofSpace>& pressure_space() const { return pspace_; }
  bool fully_dirichlet() const { return fully_dirichlet_; }

  const ScalarOperator& A() const { return a_; }
  const ScalarOperator& B(int d) const { return b_[d]; }
  const ScalarOperator& BT(int d) const { return bt_[d]; }
  // System C block; nullptr for P2P1.
  const ScalarOperator* C() const { return c_ ? &*c_ : nullptr; }
  // PSPG matrix on the pressure space, also built for P2P1 (smoother scaling).
  const ScalarOperator& pspg() const { return pspg_; }
  // Lumped P1 pressure mass (= consistent mass times ones) per slot.
  const std::vector<double>& pressure_lumped_mass() const { return ml_; }

  // y = Op x.
  void apply(StokesVector& x, StokesVector& y) const;
  // r = b - Op x.
  void residual(StokesVector& x, const StokesVector& b, StokesVector& r) const;
  std::uint64_t apply_flops() const;
  // Flops of the cell-interior rows only.
  std::uint64_t stencil_flops() const;

  // p <- p - (1^T M p / 1^T M 1) 1.
  void project_pressure_mean_zero(GridFunction& p) const;
  double pressure_mean(const GridFunction& p) const;

  // Coordinate form over [u_x, u_y, u_z, p] dof numbers.
  std::vector<Eigen::Triplet<double>> export_triplets(int level_cap = 3) const;
  Eigen::SparseMatrix<double> export_assembled(int level_cap = 3) const;
  std::size_t num_velocity_dofs() const { return vspace_->num_dofs(); }
  std::size_t num_pressure_dofs() const { return pspace_->num_dofs(); }
  std::size_t num_unknowns() const { return 3 * num_velocity_dofs() + num_pressure_dofs(); }

  Eigen::VectorXd to_vector(const StokesVector& x) const;
  void from_vector(const Eigen::VectorXd& v, StokesVector& x) const;

 private:
  std::shared_ptr<const PrimitiveGraph> graph_;
  int level_;
  Discretization kind_;
  std::shared_ptr<const DofSpace> vspace_, pspace_;
  bool fully_dirichlet_;
  ScalarOperator a_;
  std::array<ScalarOperator, 3> b_, bt_;
  std::optional<ScalarOperator> c_;
  ScalarOperator pspg_;
  std::vector<double> ml_;
  double ml_total_ = 0.0;
};

// The per-cell group stencils of all blocks; requires level >= 2.
struct StencilTable {
  Discretization kind;
  int level;
  std::vector<GroupStencil> a, c;
  std::array<std::vector<GroupStencil>, 3> b, bt;
};
StencilTable assemble_stencils(const StokesOperator& op);

// Load vector with Dirichlet lifting (f, g). For P1P1 g also carries the
// PSPG forcing term. Dirichlet velocity rows hold the boundary values.
StokesVector assemble_rhs(const StokesOperator& op, const VectorField& forcing, const VectorField& boundary);

// Makes g consistent with the constant-pressure null space (fully Dirichlet case).
void make_rhs_compatible(const StokesOperator& op, StokesVector& b);

// Scalar mass operator on a space (no boundary masking).
ScalarOperator make_mass_operator(std::shared_ptr<const DofSpace> space, bool lumped = false);

void write_coordinate_matrix(const std::vector<Eigen::Triplet<double>>& triplets, std::ostream& out);

}  // namespace hhg

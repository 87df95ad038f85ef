#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "hhg/dof_space.hpp"

namespace hhg {

enum class GhostState { Dirty, Exact, Masked };

// Coefficient vector of one scalar field on one level. Vector operations act
// on the whole buffer (ghosts included) and keep ghost state consistent;
// inner products use owned slots only.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(std::shared_ptr<const DofSpace> space);

  const DofSpace& space() const { return *space_; }
  const std::shared_ptr<const DofSpace>& space_ptr() const { return space_; }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](Slot s) { return data_[s]; }
  double operator[](Slot s) const { return data_[s]; }

  GhostState ghost_state() const { return state_; }
  void mark_dirty() { state_ = GhostState::Dirty; }
  // Copies owner values into ghost slots.
  void ghost_update();
  // Like ghost_update, but Dirichlet ghosts read as zero.
  void ghost_update_masked();
  void ensure_ghosts(bool masked) {
    const GhostState want = masked ? GhostState::Masked : GhostState::Exact;
    if (state_ != want) masked ? ghost_update_masked() : ghost_update();
  }

  void set_zero();
  void assign(const GridFunction& x);
  void axpy(double a, const GridFunction& x);
  void scale(double a);
  void add_constant(double c);
  double dot(const GridFunction& x) const;
  double norm() const { return std::sqrt(dot(*this)); }

  // Nodal interpolation of f at every slot (ghosts come out exact).
  void interpolate(const std::function<double(const Point3&)>& f);
  // Overwrites Dirichlet dofs with the matching entries of src.
  void copy_dirichlet_from(const GridFunction& src);
  void zero_dirichlet();

  Eigen::VectorXd to_dofs() const;
  void from_dofs(const Eigen::VectorXd& v);

 private:
  void combine_state(const GridFunction& x);

  std::shared_ptr<const DofSpace> space_;
  std::vector<double> data_;
  GhostState state_ = GhostState::Exact;
};

}  // namespace hhg

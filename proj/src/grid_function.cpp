#include "hhg/grid_function.hpp"

#include <cmath>
#include <stdexcept>

namespace hhg {

GridFunction::GridFunction(std::shared_ptr<const DofSpace> space)
    : space_(std::move(space)), data_(space_->num_slots(), 0.0) {}

void GridFunction::ghost_update() {
  for (const auto& gp : space_->all_ghost_pairs()) data_[gp.ghost] = data_[gp.owner];
  state_ = GhostState::Exact;
}

void GridFunction::ghost_update_masked() {
  for (const auto& gp : space_->all_ghost_pairs()) data_[gp.ghost] = gp.dirichlet ? 0.0 : data_[gp.owner];
  state_ = GhostState::Masked;
}

void GridFunction::set_zero() {
  std::fill(data_.begin(), data_.end(), 0.0);
  state_ = GhostState::Exact;
}

void GridFunction::combine_state(const GridFunction& x) {
  if (x.space_ != space_ && x.space_->num_slots() != space_->num_slots())
    throw std::invalid_argument("GridFunction: space mismatch");
  if (x.state_ != state_) state_ = GhostState::Dirty;
}

void GridFunction::assign(const GridFunction& x) {
  if (!space_) space_ = x.space_;
  data_ = x.data_;
  state_ = x.state_;
}

void GridFunction::axpy(double a, const GridFunction& x) {
  combine_state(x);
  const double* xs = x.data_.data();
  double* ys = data_.data();
  const std::size_t n = data_.size();
  for (std::size_t i = 0; i < n; ++i) ys[i] += a * xs[i];
}

void GridFunction::scale(double a) {
  for (double& v : data_) v *= a;
}

void GridFunction::add_constant(double c) {
  for (double& v : data_) v += c;
  if (state_ == GhostState::Masked) state_ = GhostState::Dirty;
}

double GridFunction::dot(const GridFunction& x) const {
  double s = 0.0;
  for (Slot o : space_->owned_slots()) s += data_[o] * x.data_[o];
  return s;
}

void GridFunction::interpolate(const std::function<double(const Point3&)>& f) {
  for (std::size_t s = 0; s < data_.size(); ++s) data_[s] = f(space_->position(static_cast<Slot>(s)));
  ghost_update();
}

void GridFunction::copy_dirichlet_from(const GridFunction& src) {
  for (Slot o : space_->owned_slots())
    if (space_->is_dirichlet(o)) data_[o] = src.data_[o];
  state_ = GhostState::Dirty;
}

void GridFunction::zero_dirichlet() {
  for (Slot o : space_->owned_slots())
    if (space_->is_dirichlet(o)) data_[o] = 0.0;
  state_ = GhostState::Dirty;
}

Eigen::VectorXd GridFunction::to_dofs() const {
  const auto& owned = space_->owned_slots();
  Eigen::VectorXd v(owned.size());
  for (std::size_t d = 0; d < owned.size(); ++d) v[d] = data_[owned[d]];
  return v;
}

void GridFunction::from_dofs(const Eigen::VectorXd& v) {
  const auto& owned = space_->owned_slots();
  if (static_cast<std::size_t>(v.size()) != owned.size()) throw std::invalid_argument("from_dofs: size mismatch");
  for (std::size_t d = 0; d < owned.size(); ++d) data_[owned[d]] = v[d];
  ghost_update();
}

}  // namespace hhg

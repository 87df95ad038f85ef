#include "hhg/transfer.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/LU>

#include "hhg/flops.hpp"

namespace hhg {

namespace {

constexpr double kTol = 1e-12;

// Coarse micro-cell containing a point given in coarse lattice units, with the
// reference coordinates of the point in that micro-cell.
bool locate(const Eigen::Vector3d& x, int coarse_level, MicroCell& cell, Eigen::Vector3d& xi) {
  const Lattice base{static_cast<int>(std::floor(x[0] + kTol)), static_cast<int>(std::floor(x[1] + kTol)),
                     static_cast<int>(std::floor(x[2] + kTol))};
  for (int dk = 0; dk >= -1; --dk)
    for (int dj = 0; dj >= -1; --dj)
      for (int di = 0; di >= -1; --di) {
        const Lattice a{base[0] + di, base[1] + dj, base[2] + dk};
        if (a[0] < 0 || a[1] < 0 || a[2] < 0) continue;
        for (int t = 0; t < kNumMicroCellTypes; ++t) {
          const auto type = static_cast<MicroCellType>(t);
          if (!micro_cell_exists(type, a, coarse_level)) continue;
          const auto v = micro_cell_vertices(type, a);
          Eigen::Matrix3d j;
          for (int c = 0; c < 3; ++c)
            for (int d = 0; d < 3; ++d) j(d, c) = v[c + 1][d] - v[0][d];
          const Eigen::Vector3d rhs(x[0] - v[0][0], x[1] - v[0][1], x[2] - v[0][2]);
          const Eigen::Vector3d s = j.inverse() * rhs;
          if (s.minCoeff() >= -kTol && s.sum() <= 1.0 + kTol) {
            cell = MicroCell{type, a, coarse_level};
            xi = s;
            return true;
          }
        }
      }
  return false;
}

}  // namespace

Transfer::Transfer(std::shared_ptr<const DofSpace> coarse, std::shared_ptr<const DofSpace> fine)
    : coarse_(std::move(coarse)), fine_(std::move(fine)) {
  if (coarse_->level() + 1 != fine_->level() || coarse_->space() != fine_->space() ||
      &coarse_->graph() != &fine_->graph())
    throw std::invalid_argument("Transfer: spaces are not consecutive levels of one space");
  const Space space = fine_->space();
  const int nloc = local_dofs(space);
  const int cl = coarse_->level();
  const auto& graph = fine_->graph();

  std::vector<std::vector<Entry>> rows(fine_->num_dofs());
  std::vector<char> done(fine_->num_dofs(), 0);
  for (std::size_t c = 0; c < graph.cells.size(); ++c) {
    const int ci = static_cast<int>(c);
    for (DofGroup g : fine_->groups()) {
      const int m = fine_->extent(g);
      for (int k = 0; k <= m; ++k)
        for (int j = 0; j + k <= m; ++j)
          for (int i = 0; i + j + k <= m; ++i) {
            const DofKey key{g, {i, j, k}};
            const Slot owner = fine_->owner(fine_->cell_slot(ci, key));
            const auto dof = static_cast<std::size_t>(fine_->dof_of_slot(owner));
            if (done[dof]) continue;
            done[dof] = 1;
            const Lattice p = doubled_position(key);
            const Eigen::Vector3d x(p[0] / 4.0, p[1] / 4.0, p[2] / 4.0);
            MicroCell mc;
            Eigen::Vector3d xi;
            if (!locate(x, cl, mc, xi)) throw std::logic_error("Transfer: fine node outside the coarse lattice");
            const Eigen::VectorXd phi = basis_values(space, xi);
            const auto nodes = p2_nodes(mc.vertices());
            for (int r = 0; r < nloc; ++r) {
              if (std::abs(phi[r]) < kTol) continue;
              rows[dof].push_back({coarse_->owner(coarse_->cell_slot(ci, nodes[r])), phi[r]});
            }
          }
    }
  }

  row_begin_.assign(rows.size() + 1, 0);
  for (std::size_t d = 0; d < rows.size(); ++d) {
    entries_.insert(entries_.end(), rows[d].begin(), rows[d].end());
    row_begin_[d + 1] = entries_.size();
  }
}

void Transfer::prolongate(const GridFunction& coarse, GridFunction& fine, bool accumulate) const {
  const auto& owned = fine_->owned_slots();
  const double* x = coarse.data();
  double* y = fine.data();
  for (std::size_t d = 0; d < owned.size(); ++d) {
    double s = 0.0;
    for (std::size_t q = row_begin_[d]; q < row_begin_[d + 1]; ++q) s += entries_[q].weight * x[entries_[q].coarse];
    y[owned[d]] = accumulate ? y[owned[d]] + s : s;
  }
  fine.mark_dirty();
  flops::add(apply_flops());
}

void Transfer::restrict(const GridFunction& fine, GridFunction& coarse) const {
  coarse.set_zero();
  const auto& owned = fine_->owned_slots();
  const double* x = fine.data();
  double* y = coarse.data();
  for (std::size_t d = 0; d < owned.size(); ++d) {
    const double v = x[owned[d]];
    for (std::size_t q = row_begin_[d]; q < row_begin_[d + 1]; ++q) y[entries_[q].coarse] += entries_[q].weight * v;
  }
  coarse.mark_dirty();
  flops::add(apply_flops());
}

Eigen::SparseMatrix<double> Transfer::matrix() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(entries_.size());
  for (std::size_t d = 0; d + 1 < row_begin_.size(); ++d)
    for (std::size_t q = row_begin_[d]; q < row_begin_[d + 1]; ++q)
      t.emplace_back(static_cast<Eigen::Index>(d), coarse_->dof_of_slot(entries_[q].coarse), entries_[q].weight);
  Eigen::SparseMatrix<double> p(static_cast<Eigen::Index>(fine_->num_dofs()),
                                static_cast<Eigen::Index>(coarse_->num_dofs()));
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

}  // namespace hhg

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/SparseCore>

#include "hhg/grid_function.hpp"

namespace hhg {

// Nodal interpolation between two consecutive levels of one space (linear
// for P1, quadratic for P2). Restriction applies the exact transpose.
class Transfer {
 public:
  Transfer(std::shared_ptr<const DofSpace> coarse, std::shared_ptr<const DofSpace> fine);

  const DofSpace& coarse_space() const { return *coarse_; }
  const DofSpace& fine_space() const { return *fine_; }

  // fine = P coarse (or fine += P coarse).
  void prolongate(const GridFunction& coarse, GridFunction& fine, bool accumulate = false) const;
  // coarse = P^T fine.
  void restrict(const GridFunction& fine, GridFunction& coarse) const;

  // P over dof numbers (fine rows, coarse columns).
  Eigen::SparseMatrix<double> matrix() const;
  std::uint64_t apply_flops() const { return 2 * entries_.size(); }

 private:
  struct Entry {
    Slot coarse;
    double weight;
  };

  std::shared_ptr<const DofSpace> coarse_, fine_;
  std::vector<std::size_t> row_begin_;  // per fine dof
  std::vector<Entry> entries_;
};

}  // namespace hhg

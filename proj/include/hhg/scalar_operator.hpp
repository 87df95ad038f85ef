#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "hhg/dof_space.hpp"
#include "hhg/fem_local.hpp"
#include "hhg/grid_function.hpp"

namespace hhg {

// Treatment of destination rows that belong to Dirichlet dofs.
enum class RowRule { Plain, Identity, Zero };

struct OperatorMasks {
  bool mask_columns = false;  // drop couplings to Dirichlet source dofs
  RowRule dirichlet_rows = RowRule::Plain;
};

struct StencilEntry {
  DofGroup source = DofGroup::Vertex;
  Lattice offset{};
  double weight = 0.0;
};

struct GroupStencil {
  int cell = 0;
  DofGroup target = DofGroup::Vertex;
  BlockId block = BlockId::A;
  std::vector<StencilEntry> entries;

  std::size_t size() const { return entries.size(); }
  std::size_t count_from(DofGroup source) const;
  double center() const;
  double row_sum() const;
};

// Element matrix (rows: destination local nodes, columns: source local nodes)
// of one physical micro-tetrahedron.
using LocalKernel = std::function<Eigen::MatrixXd(const AffineMap&)>;

// Matrix-free operator between two scalar spaces on the same level.
//
// Cell-interior rows use constant group stencils computed on the periodic
// micro-lattice; rows of interface-owned dofs are assembled sparse rows over
// owner slots. Below level 2 every row is an assembled row.
class ScalarOperator {
 public:
  ScalarOperator() = default;
  ScalarOperator(std::shared_ptr<const DofSpace> dst, std::shared_ptr<const DofSpace> src, BlockId block,
                 LocalKernel kernel, OperatorMasks masks);

  const DofSpace& dst_space() const { return *dst_; }
  const DofSpace& src_space() const { return *src_; }
  const std::shared_ptr<const DofSpace>& dst_space_ptr() const { return dst_; }
  const std::shared_ptr<const DofSpace>& src_space_ptr() const { return src_; }
  BlockId block() const { return block_; }
  const OperatorMasks& masks() const { return masks_; }
  bool uses_stencils() const { return stencil_path_; }

  // dst = alpha * Op src (or dst += with accumulate) on owned destination dofs;
  // leaves dst ghosts dirty.
  void apply(GridFunction& src, GridFunction& dst, bool accumulate = false, double alpha = 1.0) const;
  // One in-place Gauss-Seidel sweep for Op u = rhs (square operators only).
  void gauss_seidel(GridFunction& u, const GridFunction& rhs, bool backward) const;

  // Diagonal per owned destination slot (0 elsewhere); square operators only.
  const std::vector<double>& diagonal() const { return diagonal_; }

  const GroupStencil& stencil(int cell, DofGroup target) const {
    return stencils_[cell * kNumGroups + group_index(target)];
  }

  // Assembled matrix over dof numbers, same masking conventions as apply.
  void add_triplets(std::vector<Eigen::Triplet<double>>& out, Eigen::Index row_offset,
                    Eigen::Index col_offset) const;

  // Flops of one apply (2 per stored coefficient per row).
  std::uint64_t apply_flops() const { return apply_flops_; }
  // Part of apply_flops spent on cell-interior (stencil) rows.
  std::uint64_t stencil_flops() const { return stencil_flops_; }

  // Referenced source owner slots of an assembled row.
  struct RowEntry {
    Slot col;
    double weight;
  };
  std::span<const RowEntry> row(std::size_t r) const {
    return {row_entries_.data() + row_begin_[r], row_entries_.data() + row_begin_[r + 1]};
  }
  std::size_t num_rows() const { return row_begin_.empty() ? 0 : row_begin_.size() - 1; }

 private:
  struct CellKernel {
    std::array<Eigen::MatrixXd, kNumMicroCellTypes> local;
  };

  void build_local(const LocalKernel& kernel);
  void build_stencils();
  void build_rows();
  void build_diagonal();

  template <bool Backward>
  void gs_sweep(GridFunction& u, const GridFunction& rhs) const;

  std::shared_ptr<const DofSpace> dst_, src_;
  BlockId block_ = BlockId::A;
  OperatorMasks masks_;
  bool square_ = false;
  bool stencil_path_ = false;

  std::vector<CellKernel> kernels_;
  std::vector<GroupStencil> stencils_;
  std::vector<std::size_t> row_begin_;
  std::vector<RowEntry> row_entries_;
  std::vector<double> diagonal_;
  std::uint64_t apply_flops_ = 0;
  std::uint64_t stencil_flops_ = 0;
};

// Local node keys (anchor-relative) of each micro-cell type for a space.
const std::array<std::vector<DofKey>, kNumMicroCellTypes>& micro_cell_nodes(Space space);

// Physical micro-cell of a given type at the origin anchor of a macro-cell.
AffineMap micro_cell_map(const std::array<Point3, 4>& macro, int level, MicroCellType type);

}  // namespace hhg

#include "hhg/scalar_operator.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "hhg/flops.hpp"

namespace hhg {

namespace {

Lattice shift(const Lattice& a, const Lattice& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

// Interior index box of a group: per-axis lower bounds and the largest anchor sum.
struct InteriorRange {
  Lattice lo;
  int smax;
};

InteriorRange interior_range(DofGroup g, int level) {
  const auto e = edge_offsets(g);
  const Lattice c{e[0][0] + e[1][0], e[0][1] + e[1][1], e[0][2] + e[1][2]};
  const int n = 1 << level;
  return {{c[0] == 0 ? 1 : 0, c[1] == 0 ? 1 : 0, c[2] == 0 ? 1 : 0}, (2 * n - c[0] - c[1] - c[2] - 1) / 2};
}

// Stencil entry resolved against one cell's storage.
struct BoundEntry {
  Slot block;
  int extent;
  Lattice offset;
  double weight;
};

template <class RowFn>
void for_each_interior_row(DofGroup g, int level, bool backward, RowFn&& fn) {
  const auto r = interior_range(g, level);
  if (!backward) {
    for (int k = r.lo[2]; k <= r.smax; ++k)
      for (int j = r.lo[1]; j + k <= r.smax; ++j) {
        const int i1 = r.smax - j - k;
        if (i1 >= r.lo[0]) fn(j, k, r.lo[0], i1);
      }
  } else {
    for (int k = r.smax; k >= r.lo[2]; --k)
      for (int j = r.smax - k; j >= r.lo[1]; --j) {
        const int i1 = r.smax - j - k;
        if (i1 >= r.lo[0]) fn(j, k, r.lo[0], i1);
      }
  }
}

std::int64_t interior_count(DofGroup g, int level) {
  std::int64_t count = 0;
  for_each_interior_row(g, level, false, [&](int, int, int i0, int i1) { count += i1 - i0 + 1; });
  return count;
}

}  // namespace

std::size_t GroupStencil::count_from(DofGroup source) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [&](const StencilEntry& e) { return e.source == source; }));
}

double GroupStencil::center() const {
  for (const auto& e : entries)
    if (e.source == target && e.offset == Lattice{0, 0, 0}) return e.weight;
  return 0.0;
}

double GroupStencil::row_sum() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.weight;
  return s;
}

const std::array<std::vector<DofKey>, kNumMicroCellTypes>& micro_cell_nodes(Space space) {
  static const auto make = [](Space s) {
    std::array<std::vector<DofKey>, kNumMicroCellTypes> out;
    for (int t = 0; t < kNumMicroCellTypes; ++t) {
      const auto verts = micro_cell_vertices(static_cast<MicroCellType>(t), {0, 0, 0});
      const auto nodes = p2_nodes(verts);
      out[t].assign(nodes.begin(), nodes.begin() + local_dofs(s));
    }
    return out;
  };
  static const auto p1 = make(Space::P1);
  static const auto p2 = make(Space::P2);
  return space == Space::P1 ? p1 : p2;
}

AffineMap micro_cell_map(const std::array<Point3, 4>& macro, int level, MicroCellType type) {
  const auto v = micro_cell_vertices(type, {0, 0, 0});
  std::array<Point3, 4> pts;
  for (int r = 0; r < 4; ++r) pts[r] = lattice_to_point(macro, level, {2 * v[r][0], 2 * v[r][1], 2 * v[r][2]});
  return AffineMap::from_vertices(pts);
}

ScalarOperator::ScalarOperator(std::shared_ptr<const DofSpace> dst, std::shared_ptr<const DofSpace> src,
                               BlockId block, LocalKernel kernel, OperatorMasks masks)
    : dst_(std::move(dst)), src_(std::move(src)), block_(block), masks_(masks) {
  if (dst_->level() != src_->level() || &dst_->graph() != &src_->graph())
    throw std::invalid_argument("ScalarOperator: spaces live on different levels or meshes");
  square_ = dst_.get() == src_.get();
  if (masks_.dirichlet_rows == RowRule::Identity && !square_)
    throw std::invalid_argument("ScalarOperator: identity rows need a square operator");
  stencil_path_ = dst_->level() >= 2;
  build_local(kernel);
  if (stencil_path_) build_stencils();
  build_rows();
  if (square_) build_diagonal();
}

void ScalarOperator::build_local(const LocalKernel& kernel) {
  const auto& g = dst_->graph();
  kernels_.resize(g.cells.size());
  for (std::size_t c = 0; c < g.cells.size(); ++c) {
    std::array<Point3, 4> macro;
    for (int r = 0; r < 4; ++r) macro[r] = g.coordinates[g.cells[c].vertices[r]];
    for (int t = 0; t < kNumMicroCellTypes; ++t)
      kernels_[c].local[t] = kernel(micro_cell_map(macro, dst_->level(), static_cast<MicroCellType>(t)));
  }
}

void ScalarOperator::build_stencils() {
  const auto& dn = micro_cell_nodes(dst_->space());
  const auto& sn = micro_cell_nodes(src_->space());
  const std::size_t ncells = kernels_.size();
  stencils_.assign(ncells * kNumGroups, GroupStencil{});
  for (std::size_t c = 0; c < ncells; ++c)
    for (DofGroup g : dst_->groups()) {
      std::map<DofKey, double> acc;
      for (int t = 0; t < kNumMicroCellTypes; ++t) {
        const auto& K = kernels_[c].local[t];
        for (std::size_t r = 0; r < dn[t].size(); ++r) {
          if (dn[t][r].group != g) continue;
          const Lattice a{-dn[t][r].anchor[0], -dn[t][r].anchor[1], -dn[t][r].anchor[2]};
          for (std::size_t col = 0; col < sn[t].size(); ++col)
            acc[{sn[t][col].group, shift(sn[t][col].anchor, a)}] += K(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col));
        }
      }
      GroupStencil& st = stencils_[c * kNumGroups + group_index(g)];
      st.cell = static_cast<int>(c);
      st.target = g;
      st.block = block_;
      for (const auto& [key, w] : acc) st.entries.push_back({key.group, key.anchor, w});
    }
}

void ScalarOperator::build_rows() {
  const auto& graph = dst_->graph();
  const int level = dst_->level();
  const int n = 1 << level;
  const std::size_t row_limit = stencil_path_ ? dst_->num_interface_dofs() : dst_->num_dofs();
  const auto& dn = micro_cell_nodes(dst_->space());
  const auto& sn = micro_cell_nodes(src_->space());
  const bool special_rows = masks_.dirichlet_rows != RowRule::Plain;

  std::vector<std::vector<RowEntry>> tmp(row_limit);
  for (std::size_t c = 0; c < graph.cells.size(); ++c) {
    const int ci = static_cast<int>(c);
    for_each_micro_cell(level, [&](const MicroCell& mc) {
      if (stencil_path_) {
        bool touches = false;
        for (const auto& v : mc.vertices())
          touches |= v[0] == 0 || v[1] == 0 || v[2] == 0 || v[0] + v[1] + v[2] == n;
        if (!touches) return;
      }
      const int t = static_cast<int>(mc.type);
      const auto& K = kernels_[c].local[t];
      for (std::size_t r = 0; r < dn[t].size(); ++r) {
        const Slot R = dst_->owner(dst_->cell_slot(ci, {dn[t][r].group, shift(dn[t][r].anchor, mc.anchor)}));
        const auto d = static_cast<std::size_t>(dst_->dof_of_slot(R));
        if (d >= row_limit) continue;
        if (special_rows && dst_->is_dirichlet(R)) continue;
        for (std::size_t col = 0; col < sn[t].size(); ++col) {
          const Slot C = src_->owner(src_->cell_slot(ci, {sn[t][col].group, shift(sn[t][col].anchor, mc.anchor)}));
          if (masks_.mask_columns && src_->is_dirichlet(C)) continue;
          tmp[d].push_back({C, K(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col))});
        }
      }
    });
  }

  row_begin_.assign(row_limit + 1, 0);
  row_entries_.clear();
  apply_flops_ = 0;
  stencil_flops_ = 0;
  for (std::size_t d = 0; d < row_limit; ++d) {
    const Slot R = dst_->owned_slots()[d];
    auto& entries = tmp[d];
    if (special_rows && dst_->is_dirichlet(R)) {
      if (masks_.dirichlet_rows == RowRule::Identity) row_entries_.push_back({R, 1.0});
    } else {
      std::sort(entries.begin(), entries.end(), [](const RowEntry& a, const RowEntry& b) { return a.col < b.col; });
      std::size_t first = row_entries_.size();
      for (const auto& e : entries) {
        if (row_entries_.size() > first && row_entries_.back().col == e.col) {
          row_entries_.back().weight += e.weight;
        } else {
          row_entries_.push_back(e);
        }
      }
      apply_flops_ += 2 * (row_entries_.size() - first);
    }
    row_begin_[d + 1] = row_entries_.size();
    std::vector<RowEntry>().swap(entries);
  }

  if (stencil_path_)
    for (std::size_t c = 0; c < graph.cells.size(); ++c)
      for (DofGroup g : dst_->groups())
        stencil_flops_ += 2 * stencil(static_cast<int>(c), g).size() * static_cast<std::uint64_t>(interior_count(g, level));
  apply_flops_ += stencil_flops_;
}

void ScalarOperator::build_diagonal() {
  diagonal_.assign(dst_->num_slots(), 0.0);
  for (std::size_t r = 0; r < num_rows(); ++r) {
    const Slot R = dst_->owned_slots()[r];
    for (const auto& e : row(r))
      if (e.col == R) diagonal_[R] += e.weight;
  }
  if (!stencil_path_) return;
  const int level = dst_->level();
  for (std::size_t c = 0; c < kernels_.size(); ++c)
    for (DofGroup g : dst_->groups()) {
      const double center = stencil(static_cast<int>(c), g).center();
      const Slot block = dst_->cell_block(static_cast<int>(c), g);
      const int m = dst_->extent(g);
      for_each_interior_row(g, level, false, [&](int j, int k, int i0, int i1) {
        const Slot base = block + static_cast<Slot>(lattice_index(0, j, k, m));
        for (int i = i0; i <= i1; ++i) diagonal_[base + i] = center;
      });
    }
}

void ScalarOperator::apply(GridFunction& src, GridFunction& dst, bool accumulate, double alpha) const {
  if (&src == &dst) throw std::invalid_argument("ScalarOperator::apply: src and dst must differ");
  if (src.size() != src_->num_slots() || dst.size() != dst_->num_slots())
    throw std::invalid_argument("ScalarOperator::apply: space mismatch");
  src.ensure_ghosts(masks_.mask_columns);
  const double* x = src.data();
  double* y = dst.data();
  const auto& owned = dst_->owned_slots();

  for (std::size_t r = 0; r < num_rows(); ++r) {
    double s = 0.0;
    for (std::size_t p = row_begin_[r]; p < row_begin_[r + 1]; ++p) s += row_entries_[p].weight * x[row_entries_[p].col];
    const Slot R = owned[r];
    y[R] = accumulate ? y[R] + alpha * s : alpha * s;
  }

  if (stencil_path_) {
    const int level = dst_->level();
    std::vector<BoundEntry> bound;
    for (std::size_t c = 0; c < kernels_.size(); ++c) {
      const int ci = static_cast<int>(c);
      for (DofGroup g : dst_->groups()) {
        const GroupStencil& st = stencil(ci, g);
        bound.clear();
        for (const auto& e : st.entries)
          bound.push_back({src_->cell_block(ci, e.source), src_->extent(e.source), e.offset, alpha * e.weight});
        const Slot yblock = dst_->cell_block(ci, g);
        const int m = dst_->extent(g);
        for_each_interior_row(g, level, false, [&](int j, int k, int i0, int i1) {
          double* yr = y + yblock + lattice_index(0, j, k, m);
          if (!accumulate)
            for (int i = i0; i <= i1; ++i) yr[i] = 0.0;
          for (const auto& b : bound) {
            const double* xr =
                x + b.block + lattice_index(0, j + b.offset[1], k + b.offset[2], b.extent) + b.offset[0];
            const double w = b.weight;
            for (int i = i0; i <= i1; ++i) yr[i] += w * xr[i];
          }
        });
      }
    }
  }
  dst.mark_dirty();
  flops::add(apply_flops_);
}

template <bool Backward>
void ScalarOperator::gs_sweep(GridFunction& u, const GridFunction& rhs) const {
  double* x = u.data();
  const double* b = rhs.data();
  const auto& owned = dst_->owned_slots();
  const std::size_t nrows = num_rows();

  auto row_update = [&](std::size_t r) {
    const Slot R = owned[r];
    double s = b[R], diag = 0.0;
    for (std::size_t p = row_begin_[r]; p < row_begin_[r + 1]; ++p) {
      const auto& e = row_entries_[p];
      if (e.col == R) {
        diag += e.weight;
      } else {
        s -= e.weight * x[e.col];
      }
    }
    if (diag == 0.0) throw std::runtime_error("gauss_seidel: zero diagonal");
    x[R] = s / diag;
  };

  auto cell_sweep = [&](int ci, DofGroup g) {
    const GroupStencil& st = stencil(ci, g);
    const double center = st.center();
    if (center == 0.0) throw std::runtime_error("gauss_seidel: zero stencil center");
    std::vector<BoundEntry> bound;
    for (const auto& e : st.entries) {
      if (e.source == g && e.offset == Lattice{0, 0, 0}) continue;
      bound.push_back({src_->cell_block(ci, e.source), src_->extent(e.source), e.offset, e.weight});
    }
    std::vector<const double*> rows(bound.size());
    const Slot yblock = dst_->cell_block(ci, g);
    const int m = dst_->extent(g);
    const double inv = 1.0 / center;
    for_each_interior_row(g, dst_->level(), Backward, [&](int j, int k, int i0, int i1) {
      double* yr = x + yblock + lattice_index(0, j, k, m);
      const double* br = b + yblock + lattice_index(0, j, k, m);
      for (std::size_t q = 0; q < bound.size(); ++q)
        rows[q] = x + bound[q].block + lattice_index(0, j + bound[q].offset[1], k + bound[q].offset[2], bound[q].extent) +
                  bound[q].offset[0];
      const std::size_t ne = bound.size();
      auto point = [&](int i) {
        double s = br[i];
        for (std::size_t q = 0; q < ne; ++q) s -= bound[q].weight * rows[q][i];
        yr[i] = s * inv;
      };
      if (Backward) {
        for (int i = i1; i >= i0; --i) point(i);
      } else {
        for (int i = i0; i <= i1; ++i) point(i);
      }
    });
  };

  const auto groups = dst_->groups();
  const int ncells = static_cast<int>(kernels_.size());
  if (!Backward) {
    for (std::size_t r = 0; r < nrows; ++r) row_update(r);
    if (stencil_path_) {
      masks_.mask_columns ? u.ghost_update_masked() : u.ghost_update();
      for (int c = 0; c < ncells; ++c)
        for (DofGroup g : groups) cell_sweep(c, g);
    } else {
      u.mark_dirty();
    }
  } else {
    if (stencil_path_) {
      u.ensure_ghosts(masks_.mask_columns);
      for (int c = ncells - 1; c >= 0; --c)
        for (auto it = groups.rbegin(); it != groups.rend(); ++it) cell_sweep(c, *it);
    }
    for (std::size_t r = nrows; r-- > 0;) row_update(r);
    u.mark_dirty();
  }
}

void ScalarOperator::gauss_seidel(GridFunction& u, const GridFunction& rhs, bool backward) const {
  if (!square_) throw std::logic_error("gauss_seidel: operator is not square");
  if (backward) {
    gs_sweep<true>(u, rhs);
  } else {
    gs_sweep<false>(u, rhs);
  }
  flops::add(apply_flops_);
}

void ScalarOperator::add_triplets(std::vector<Eigen::Triplet<double>>& out, Eigen::Index row_offset,
                                  Eigen::Index col_offset) const {
  const auto& graph = dst_->graph();
  const int level = dst_->level();
  const auto& dn = micro_cell_nodes(dst_->space());
  const auto& sn = micro_cell_nodes(src_->space());
  const bool special_rows = masks_.dirichlet_rows != RowRule::Plain;
  for (std::size_t c = 0; c < graph.cells.size(); ++c) {
    const int ci = static_cast<int>(c);
    for_each_micro_cell(level, [&](const MicroCell& mc) {
      const int t = static_cast<int>(mc.type);
      const auto& K = kernels_[c].local[t];
      for (std::size_t r = 0; r < dn[t].size(); ++r) {
        const Slot R = dst_->owner(dst_->cell_slot(ci, {dn[t][r].group, shift(dn[t][r].anchor, mc.anchor)}));
        if (special_rows && dst_->is_dirichlet(R)) continue;
        for (std::size_t col = 0; col < sn[t].size(); ++col) {
          const Slot C = src_->owner(src_->cell_slot(ci, {sn[t][col].group, shift(sn[t][col].anchor, mc.anchor)}));
          if (masks_.mask_columns && src_->is_dirichlet(C)) continue;
          out.emplace_back(row_offset + dst_->dof_of_slot(R), col_offset + src_->dof_of_slot(C),
                           K(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)));
        }
      }
    });
  }
  if (masks_.dirichlet_rows == RowRule::Identity)
    for (Slot R : dst_->owned_slots())
      if (dst_->is_dirichlet(R))
        out.emplace_back(row_offset + dst_->dof_of_slot(R), col_offset + src_->dof_of_slot(R), 1.0);
}

}  // namespace hhg

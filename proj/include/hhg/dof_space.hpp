#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "hhg/fem_local.hpp"
#include "hhg/mesh.hpp"
#include "hhg/refinement.hpp"

namespace hhg {

using Slot = std::int32_t;

// Storage layout of one scalar finite-element space on one level.
//
// The flat buffer starts with the owned arrays of the vertex, edge and face
// primitives (each in its own canonical frame: sorted mesh vertex ids), then
// one closed-lattice array per cell and group. Lattice positions on the cell
// boundary are ghost slots mirroring the owning lower-dimensional primitive.
//
// Dofs are numbered by their owned slots in buffer order, so interface dofs
// come first, then cell interiors; this is also the Gauss-Seidel order.
class DofSpace {
 public:
  DofSpace(std::shared_ptr<const PrimitiveGraph> graph, int level, Space space);

  const PrimitiveGraph& graph() const { return *graph_; }
  std::shared_ptr<const PrimitiveGraph> graph_ptr() const { return graph_; }
  int level() const { return level_; }
  Space space() const { return space_; }
  std::span<const DofGroup> groups() const;

  std::size_t num_slots() const { return owner_.size(); }
  std::size_t num_dofs() const { return owned_slots_.size(); }
  std::size_t num_interface_dofs() const { return interface_end_; }

  int extent(DofGroup g) const { return group_extent(g, level_); }
  Slot cell_block(int cell, DofGroup g) const { return cell_block_[cell * kNumGroups + group_index(g)]; }
  Slot cell_slot(int cell, const DofKey& key) const {
    return cell_block(cell, key.group) +
           static_cast<Slot>(lattice_index(key.anchor[0], key.anchor[1], key.anchor[2], extent(key.group)));
  }

  Slot owner(Slot s) const { return owner_[s]; }
  const std::vector<Slot>& owners() const { return owner_; }
  std::int32_t dof_of_slot(Slot s) const { return dof_of_slot_[s]; }
  const std::vector<Slot>& owned_slots() const { return owned_slots_; }
  bool is_dirichlet(Slot s) const { return dirichlet_[owner_[s]] != 0; }
  bool is_boundary(Slot s) const { return boundary_[owner_[s]] != 0; }
  const Point3& position(Slot s) const { return position_[s]; }

  PrimitiveKind owner_kind(Slot owned) const;
  // Number of owned dofs per primitive kind.
  std::size_t owned_count(PrimitiveKind kind) const;
  // Owned dof range of an interface primitive, as [begin, end) slots.
  std::pair<Slot, Slot> primitive_range(PrimitiveKind kind, int id) const;

  struct GhostPair {
    Slot ghost;
    Slot owner;
    bool dirichlet;
  };
  // Ghost-owner pairs of one cell.
  std::span<const GhostPair> ghost_pairs(int cell) const {
    return {ghost_pairs_.data() + ghost_begin_[cell], ghost_pairs_.data() + ghost_begin_[cell + 1]};
  }
  std::span<const GhostPair> all_ghost_pairs() const { return ghost_pairs_; }

  // Canonical frame keys owned by a primitive of the given kind.
  const std::vector<DofKey>& frame_keys(PrimitiveKind kind) const { return frame_keys_[static_cast<int>(kind)]; }

 private:
  std::shared_ptr<const PrimitiveGraph> graph_;
  int level_;
  Space space_;

  std::vector<Slot> cell_block_;
  std::vector<Slot> owner_;
  std::vector<std::int32_t> dof_of_slot_;
  std::vector<Slot> owned_slots_;
  std::vector<char> dirichlet_, boundary_;
  std::vector<Point3> position_;
  std::vector<GhostPair> ghost_pairs_;
  std::vector<std::size_t> ghost_begin_;

  std::array<std::vector<DofKey>, 3> frame_keys_;
  std::array<std::unordered_map<std::int64_t, int>, 3> frame_index_;
  std::array<Slot, 4> kind_begin_{};  // first slot of vertex/edge/face/cell storage
  std::size_t interface_end_ = 0;
};

}  // namespace hhg

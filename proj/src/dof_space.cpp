#include "hhg/dof_space.hpp"

#include <algorithm>
#include <stdexcept>

namespace hhg {

namespace {

std::int64_t pack(const DofKey& k) {
  return (static_cast<std::int64_t>(group_index(k.group)) << 48) | (static_cast<std::int64_t>(k.anchor[0]) << 32) |
         (static_cast<std::int64_t>(k.anchor[1]) << 16) | static_cast<std::int64_t>(k.anchor[2]);
}

int support_mask(const DofKey& key, int level) {
  const auto w = doubled_weights(key, level);
  int mask = 0;
  for (int r = 0; r < 4; ++r)
    if (w[r] != 0) mask |= 1 << r;
  return mask;
}

}  // namespace

std::span<const DofGroup> DofSpace::groups() const {
  if (space_ == Space::P1) return kVertexGroups;
  return kAllGroups;
}

DofSpace::DofSpace(std::shared_ptr<const PrimitiveGraph> graph, int level, Space space)
    : graph_(std::move(graph)), level_(level), space_(space) {
  if (level_ < 0 || level_ > 8) throw std::invalid_argument("DofSpace: unsupported level");
  const PrimitiveGraph& g = *graph_;
  const auto grp = groups();
  const int n = 1 << level_;

  for (int dim = 0; dim < 3; ++dim) {
    const int mask = (1 << (dim + 1)) - 1;
    for (DofGroup gr : grp) {
      const int m = extent(gr);
      for (int k = 0; k <= m; ++k)
        for (int j = 0; j + k <= m; ++j)
          for (int i = 0; i + j + k <= m; ++i) {
            const DofKey key{gr, {i, j, k}};
            if (support_mask(key, level_) != mask) continue;
            frame_index_[dim][pack(key)] = static_cast<int>(frame_keys_[dim].size());
            frame_keys_[dim].push_back(key);
          }
    }
  }

  const std::array<std::size_t, 3> prim_count{g.vertices.size(), g.edges.size(), g.faces.size()};
  Slot offset = 0;
  for (int dim = 0; dim < 3; ++dim) {
    kind_begin_[dim] = offset;
    offset += static_cast<Slot>(prim_count[dim] * frame_keys_[dim].size());
  }
  interface_end_ = static_cast<std::size_t>(offset);
  kind_begin_[3] = offset;
  cell_block_.assign(g.cells.size() * kNumGroups, -1);
  for (std::size_t c = 0; c < g.cells.size(); ++c)
    for (DofGroup gr : grp) {
      cell_block_[c * kNumGroups + group_index(gr)] = offset;
      offset += static_cast<Slot>(lattice_size(extent(gr)));
    }

  const std::size_t total = static_cast<std::size_t>(offset);
  owner_.assign(total, -1);
  dirichlet_.assign(total, 0);
  boundary_.assign(total, 0);
  position_.assign(total, Point3::Zero());

  for (int dim = 0; dim < 3; ++dim) {
    const std::size_t per = frame_keys_[dim].size();
    for (std::size_t p = 0; p < prim_count[dim]; ++p) {
      bool dir = false, bnd = false;
      std::array<Point3, 4> frame;
      if (dim == 0) {
        dir = g.vertices[p].dirichlet;
        bnd = g.vertices[p].boundary;
        frame.fill(g.coordinates[p]);
      } else if (dim == 1) {
        const auto& e = g.edges[p];
        dir = e.dirichlet;
        bnd = e.boundary;
        frame = {g.coordinates[e.vertices[0]], g.coordinates[e.vertices[1]], g.coordinates[e.vertices[1]],
                 g.coordinates[e.vertices[1]]};
      } else {
        const auto& f = g.faces[p];
        dir = f.dirichlet;
        bnd = f.boundary;
        frame = {g.coordinates[f.vertices[0]], g.coordinates[f.vertices[1]], g.coordinates[f.vertices[2]],
                 g.coordinates[f.vertices[2]]};
      }
      for (std::size_t l = 0; l < per; ++l) {
        const Slot s = kind_begin_[dim] + static_cast<Slot>(p * per + l);
        owner_[s] = s;
        dirichlet_[s] = dir;
        boundary_[s] = bnd;
        position_[s] = lattice_to_point(frame, level_, doubled_position(frame_keys_[dim][l]));
      }
    }
  }

  ghost_begin_.assign(g.cells.size() + 1, 0);
  for (std::size_t c = 0; c < g.cells.size(); ++c) {
    const auto& cell = g.cells[c];
    std::array<Point3, 4> coords;
    for (int r = 0; r < 4; ++r) coords[r] = g.coordinates[cell.vertices[r]];
    auto weights = [n](const Lattice& p) { return std::array<int, 4>{n - p[0] - p[1] - p[2], p[0], p[1], p[2]}; };

    for (DofGroup gr : grp) {
      const int m = extent(gr);
      const Slot block = cell_block(static_cast<int>(c), gr);
      Slot s = block;
      for (int k = 0; k <= m; ++k)
        for (int j = 0; j + k <= m; ++j)
          for (int i = 0; i + j + k <= m; ++i, ++s) {
            const DofKey key{gr, {i, j, k}};
            position_[s] = lattice_to_point(coords, level_, doubled_position(key));
            if (is_cell_interior(key, level_)) {
              owner_[s] = s;
              continue;
            }
            Lattice pa = key.anchor, qa = key.anchor;
            if (gr != DofGroup::Vertex) {
              const auto e = edge_offsets(gr);
              for (int d = 0; d < 3; ++d) {
                pa[d] += e[0][d];
                qa[d] += e[1][d];
              }
            }
            const auto wp = weights(pa), wq = weights(qa);
            struct Entry {
              int gid, wp, wq;
            };
            std::vector<Entry> sup;
            for (int r = 0; r < 4; ++r)
              if (wp[r] + wq[r] > 0) sup.push_back({cell.vertices[r], wp[r], wq[r]});
            std::sort(sup.begin(), sup.end(), [](const Entry& a, const Entry& b) { return a.gid < b.gid; });
            const int dim = static_cast<int>(sup.size()) - 1;
            int prim = -1;
            if (dim == 0) {
              prim = sup[0].gid;
            } else if (dim == 1) {
              prim = g.find_edge(sup[0].gid, sup[1].gid);
            } else {
              prim = g.find_face(sup[0].gid, sup[1].gid, sup[2].gid);
            }
            if (prim < 0) throw std::logic_error("DofSpace: boundary dof without owning primitive");
            const Lattice pf{dim > 0 ? sup[1].wp : 0, dim > 1 ? sup[2].wp : 0, 0};
            const Lattice qf{dim > 0 ? sup[1].wq : 0, dim > 1 ? sup[2].wq : 0, 0};
            DofKey fk{DofGroup::Vertex, pf};
            if (gr != DofGroup::Vertex && !classify_edge(pf, qf, fk))
              throw std::logic_error("DofSpace: boundary edge not in primitive frame");
            auto it = frame_index_[dim].find(pack(fk));
            if (it == frame_index_[dim].end()) throw std::logic_error("DofSpace: frame key not owned");
            const Slot os = kind_begin_[dim] + static_cast<Slot>(prim * frame_keys_[dim].size() + it->second);
            owner_[s] = os;
            ghost_pairs_.push_back({s, os, dirichlet_[os] != 0});
          }
    }
    ghost_begin_[c + 1] = ghost_pairs_.size();
  }

  dof_of_slot_.assign(total, -1);
  for (std::size_t s = 0; s < total; ++s)
    if (owner_[s] == static_cast<Slot>(s)) {
      dof_of_slot_[s] = static_cast<std::int32_t>(owned_slots_.size());
      owned_slots_.push_back(static_cast<Slot>(s));
    }
}

PrimitiveKind DofSpace::owner_kind(Slot owned) const {
  if (owned < kind_begin_[1]) return PrimitiveKind::Vertex;
  if (owned < kind_begin_[2]) return PrimitiveKind::Edge;
  if (owned < kind_begin_[3]) return PrimitiveKind::Face;
  return PrimitiveKind::Cell;
}

std::size_t DofSpace::owned_count(PrimitiveKind kind) const {
  const int k = static_cast<int>(kind);
  if (k < 3) return static_cast<std::size_t>(kind_begin_[k + 1] - kind_begin_[k]);
  return owned_slots_.size() - interface_end_;
}

std::pair<Slot, Slot> DofSpace::primitive_range(PrimitiveKind kind, int id) const {
  const int k = static_cast<int>(kind);
  if (k >= 3) throw std::invalid_argument("primitive_range: cells have no compact owned range");
  const Slot per = static_cast<Slot>(frame_keys_[k].size());
  return {kind_begin_[k] + id * per, kind_begin_[k] + (id + 1) * per};
}

}  // namespace hhg

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hhg/mesh.hpp"

namespace hhg {

// Vertex dofs plus the seven micro-edge orientations of a refined tetrahedron.
enum class DofGroup : std::uint8_t { Vertex, X, Y, Z, XY, XZ, YZ, XYZ };

inline constexpr int kNumGroups = 8;
inline constexpr std::array<DofGroup, 8> kAllGroups{DofGroup::Vertex, DofGroup::X,  DofGroup::Y,  DofGroup::Z,
                                                    DofGroup::XY,     DofGroup::XZ, DofGroup::YZ, DofGroup::XYZ};
inline constexpr std::array<DofGroup, 1> kVertexGroups{DofGroup::Vertex};

inline constexpr int group_index(DofGroup g) { return static_cast<int>(g); }
const char* group_name(DofGroup g);

using Lattice = std::array<int, 3>;

struct MicroIndex {
  int i = 0, j = 0, k = 0;
  DofGroup group = DofGroup::Vertex;
  int level = 0;
};

struct DofKey {
  DofGroup group = DofGroup::Vertex;
  Lattice anchor{};
  friend bool operator==(const DofKey&, const DofKey&) = default;
  friend auto operator<=>(const DofKey&, const DofKey&) = default;
};

// (v+2)(v+1)v/6; throws for v < 0.
std::int64_t n_tet(std::int64_t v);
// Same formula, but 0 for v < 0 (empty index sets at coarse levels).
std::int64_t n_tet_clamped(std::int64_t v);

std::int64_t group_dof_count(DofGroup group, int level, bool with_boundary);

// Largest admissible anchor coordinate sum of the closed lattice of a group.
inline int group_extent(DofGroup g, int level) {
  const int n = 1 << level;
  if (g == DofGroup::Vertex) return n;
  if (g == DofGroup::XYZ) return n - 2;
  return n - 1;
}

inline std::int64_t lattice_size(int extent) {
  const std::int64_t v = extent + 1;
  return extent < 0 ? 0 : (v + 2) * (v + 1) * v / 6;
}

// Lexicographic (k, j, i) position of a point in the closed lattice {i+j+k <= m}.
inline std::int64_t lattice_index(int i, int j, int k, int m) {
  const std::int64_t layer = lattice_size(m) - lattice_size(m - k);
  const std::int64_t row_len0 = m - k + 1;
  return layer + static_cast<std::int64_t>(j) * row_len0 - static_cast<std::int64_t>(j) * (j - 1) / 2 + i;
}

// Endpoint offsets (relative to the anchor) of the micro-edge of a group.
std::array<Lattice, 2> edge_offsets(DofGroup g);

// Maps a micro-edge between two lattice points to its group and anchor.
// Returns false if p and q are not connected by an edge of the tiling.
bool classify_edge(const Lattice& p, const Lattice& q, DofKey& out);

// Doubled lattice position of the node (vertex or edge midpoint).
Lattice doubled_position(const DofKey& key);
// Barycentric weights of the node in units of 1/(2 * 2^level).
std::array<int, 4> doubled_weights(const DofKey& key, int level);
bool is_cell_interior(const DofKey& key, int level);

enum class MicroCellType : std::uint8_t { WhiteUp, Octa0, Octa1, Octa2, Octa3, WhiteDown };
inline constexpr int kNumMicroCellTypes = 6;

struct MicroCell {
  MicroCellType type = MicroCellType::WhiteUp;
  Lattice anchor{};
  int level = 0;
  std::array<Lattice, 4> vertices() const;
};

std::array<Lattice, 4> micro_cell_vertices(MicroCellType type, const Lattice& anchor);
bool micro_cell_exists(MicroCellType type, const Lattice& anchor, int level);
std::vector<MicroCell> refine_micro_cells(int level);

template <class F>
void for_each_micro_cell(int level, F&& f) {
  const int n = 1 << level;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j + k < n; ++j)
      for (int i = 0; i + j + k < n; ++i) {
        const int s = i + j + k;
        f(MicroCell{MicroCellType::WhiteUp, {i, j, k}, level});
        if (s <= n - 2)
          for (auto t : {MicroCellType::Octa0, MicroCellType::Octa1, MicroCellType::Octa2, MicroCellType::Octa3})
            f(MicroCell{t, {i, j, k}, level});
        if (s <= n - 3) f(MicroCell{MicroCellType::WhiteDown, {i, j, k}, level});
      }
}

// Local P2 nodes of a micro-tetrahedron: 4 vertices, then edges 01, 02, 03, 12, 13, 23.
std::array<DofKey, 10> p2_nodes(const std::array<Lattice, 4>& verts);

Point3 micro_coords(const std::array<Point3, 4>& macro_cell, const MicroIndex& idx);
Point3 lattice_to_point(const std::array<Point3, 4>& macro_cell, int level, const Lattice& doubled);

enum class PrimitiveKind { Vertex, Edge, Face, Cell };

// Stencil reach of the dofs a primitive owns, described on a reference cell
// in which the primitive is the sub-simplex spanned by vertices 0..dim.
// Dofs owned by higher-dimensional neighbours are listed per adjacent cell.
struct GhostLayout {
  PrimitiveKind kind = PrimitiveKind::Cell;
  DofGroup group = DofGroup::Vertex;
  int level = 0;
  std::vector<DofKey> owned;
  std::vector<DofKey> from_higher;
  std::vector<DofKey> from_lower;
};

GhostLayout ghost_layout(PrimitiveKind kind, DofGroup group, int level);

}  // namespace hhg

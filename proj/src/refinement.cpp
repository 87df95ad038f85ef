#include "hhg/refinement.hpp"

#include <set>
#include <stdexcept>

namespace hhg {

namespace {

constexpr std::array<std::array<Lattice, 2>, 8> kEdgeOffsets{{
    {{{0, 0, 0}, {0, 0, 0}}},  // vertex group, unused
    {{{0, 0, 0}, {1, 0, 0}}},
    {{{0, 0, 0}, {0, 1, 0}}},
    {{{0, 0, 0}, {0, 0, 1}}},
    {{{1, 0, 0}, {0, 1, 0}}},
    {{{1, 0, 0}, {0, 0, 1}}},
    {{{0, 1, 0}, {0, 0, 1}}},
    {{{0, 1, 0}, {1, 0, 1}}},
}};

constexpr std::array<Lattice, 4> kOctaRing{{{1, 0, 0}, {1, 1, 0}, {0, 1, 1}, {0, 0, 1}}};
constexpr Lattice kOctaD0{0, 1, 0};
constexpr Lattice kOctaD1{1, 0, 1};

Lattice add(const Lattice& a, const Lattice& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Lattice sub(const Lattice& a, const Lattice& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

}  // namespace

const char* group_name(DofGroup g) {
  static constexpr const char* names[] = {"VERTEX", "X", "Y", "Z", "XY", "XZ", "YZ", "XYZ"};
  return names[group_index(g)];
}

std::int64_t n_tet(std::int64_t v) {
  if (v < 0) throw std::invalid_argument("n_tet: negative argument");
  return (v + 2) * (v + 1) * v / 6;
}

std::int64_t n_tet_clamped(std::int64_t v) { return v < 0 ? 0 : n_tet(v); }

std::int64_t group_dof_count(DofGroup group, int level, bool with_boundary) {
  if (level < 0 || level > 30) throw std::invalid_argument("group_dof_count: invalid level");
  if (group != DofGroup::Vertex && level < 1)
    throw std::invalid_argument("group_dof_count: edge groups need level >= 1");
  const std::int64_t n = std::int64_t{1} << level;
  switch (group) {
    case DofGroup::Vertex:
      return with_boundary ? n_tet(n + 1) : n_tet_clamped(n - 3);
    case DofGroup::XYZ:
      return n_tet_clamped(n - 1);
    default:
      return with_boundary ? n_tet(n) : n_tet_clamped(n - 2);
  }
}

std::array<Lattice, 2> edge_offsets(DofGroup g) { return kEdgeOffsets[group_index(g)]; }

bool classify_edge(const Lattice& p, const Lattice& q, DofKey& out) {
  const Lattice d = sub(q, p);
  for (int g = 1; g < kNumGroups; ++g) {
    const auto& e = kEdgeOffsets[g];
    const Lattice dir = sub(e[1], e[0]);
    if (d == dir) {
      out = {static_cast<DofGroup>(g), sub(p, e[0])};
      return true;
    }
    if (d == Lattice{-dir[0], -dir[1], -dir[2]}) {
      out = {static_cast<DofGroup>(g), sub(q, e[0])};
      return true;
    }
  }
  return false;
}

Lattice doubled_position(const DofKey& key) {
  const Lattice& a = key.anchor;
  if (key.group == DofGroup::Vertex) return {2 * a[0], 2 * a[1], 2 * a[2]};
  const auto& e = kEdgeOffsets[group_index(key.group)];
  return {2 * a[0] + e[0][0] + e[1][0], 2 * a[1] + e[0][1] + e[1][1], 2 * a[2] + e[0][2] + e[1][2]};
}

std::array<int, 4> doubled_weights(const DofKey& key, int level) {
  const Lattice p = doubled_position(key);
  return {2 * (1 << level) - p[0] - p[1] - p[2], p[0], p[1], p[2]};
}

bool is_cell_interior(const DofKey& key, int level) {
  for (int w : doubled_weights(key, level))
    if (w <= 0) return false;
  return true;
}

std::array<Lattice, 4> micro_cell_vertices(MicroCellType type, const Lattice& a) {
  switch (type) {
    case MicroCellType::WhiteUp:
      return {a, add(a, {1, 0, 0}), add(a, {0, 1, 0}), add(a, {0, 0, 1})};
    case MicroCellType::WhiteDown:
      return {add(a, {1, 1, 0}), add(a, {1, 0, 1}), add(a, {0, 1, 1}), add(a, {1, 1, 1})};
    default: {
      const int r = static_cast<int>(type) - static_cast<int>(MicroCellType::Octa0);
      return {add(a, kOctaD0), add(a, kOctaD1), add(a, kOctaRing[r]), add(a, kOctaRing[(r + 1) % 4])};
    }
  }
}

std::array<Lattice, 4> MicroCell::vertices() const { return micro_cell_vertices(type, anchor); }

bool micro_cell_exists(MicroCellType type, const Lattice& a, int level) {
  if (a[0] < 0 || a[1] < 0 || a[2] < 0) return false;
  const int s = a[0] + a[1] + a[2];
  const int n = 1 << level;
  switch (type) {
    case MicroCellType::WhiteUp:
      return s <= n - 1;
    case MicroCellType::WhiteDown:
      return s <= n - 3;
    default:
      return s <= n - 2;
  }
}

std::vector<MicroCell> refine_micro_cells(int level) {
  if (level < 0) throw std::invalid_argument("refine_micro_cells: negative level");
  std::vector<MicroCell> out;
  out.reserve(std::size_t{1} << (3 * level));
  for_each_micro_cell(level, [&](const MicroCell& c) { out.push_back(c); });
  return out;
}

std::array<DofKey, 10> p2_nodes(const std::array<Lattice, 4>& v) {
  std::array<DofKey, 10> nodes;
  for (int r = 0; r < 4; ++r) nodes[r] = {DofGroup::Vertex, v[r]};
  for (int e = 0; e < 6; ++e) {
    const auto& pair = kCellEdgeVertices[e];
    if (!classify_edge(v[pair[0]], v[pair[1]], nodes[4 + e]))
      throw std::logic_error("p2_nodes: micro-cell edge outside the tiling");
  }
  return nodes;
}

Point3 lattice_to_point(const std::array<Point3, 4>& macro, int level, const Lattice& doubled) {
  const double inv = 1.0 / (2.0 * (1 << level));
  return macro[0] + (doubled[0] * inv) * (macro[1] - macro[0]) + (doubled[1] * inv) * (macro[2] - macro[0]) +
         (doubled[2] * inv) * (macro[3] - macro[0]);
}

Point3 micro_coords(const std::array<Point3, 4>& macro, const MicroIndex& idx) {
  const DofKey key{idx.group, {idx.i, idx.j, idx.k}};
  if (idx.level < 0 || idx.i < 0 || idx.j < 0 || idx.k < 0 ||
      idx.i + idx.j + idx.k > group_extent(idx.group, idx.level))
    throw std::out_of_range("micro_coords: index outside the group lattice");
  return lattice_to_point(macro, idx.level, doubled_position(key));
}

GhostLayout ghost_layout(PrimitiveKind kind, DofGroup group, int level) {
  if (level < 0) throw std::invalid_argument("ghost_layout: negative level");
  GhostLayout layout;
  layout.kind = kind;
  layout.group = group;
  layout.level = level;
  const int dim = static_cast<int>(kind);

  // Bitmask of reference-cell vertices carrying nonzero weight.
  auto support = [&](const DofKey& key) {
    int mask = 0;
    const auto w = doubled_weights(key, level);
    for (int r = 0; r < 4; ++r)
      if (w[r] != 0) mask |= 1 << r;
    return mask;
  };
  const int prim = (1 << (dim + 1)) - 1;

  std::set<DofKey> owned, higher, lower;
  const int m = group_extent(group, level);
  for (int k = 0; k <= m; ++k)
    for (int j = 0; j + k <= m; ++j)
      for (int i = 0; i + j + k <= m; ++i) {
        const DofKey key{group, {i, j, k}};
        if (support(key) == prim) owned.insert(key);
      }

  for_each_micro_cell(level, [&](const MicroCell& cell) {
    const auto nodes = p2_nodes(cell.vertices());
    bool touches = false;
    for (const auto& nd : nodes) touches |= owned.count(nd) > 0;
    if (!touches) return;
    for (const auto& nd : nodes) {
      const int s = support(nd);
      if (s == prim) continue;
      if ((s & ~prim) == 0) {
        lower.insert(nd);
      } else {
        higher.insert(nd);
      }
    }
  });
  layout.owned.assign(owned.begin(), owned.end());
  layout.from_higher.assign(higher.begin(), higher.end());
  layout.from_lower.assign(lower.begin(), lower.end());
  return layout;
}

}  // namespace hhg

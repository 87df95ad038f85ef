#include "hhg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <Eigen/LU>

namespace hhg {

namespace {

std::array<int, 3> sorted3(std::array<int, 3> a) {
  std::sort(a.begin(), a.end());
  return a;
}

[[noreturn]] void parse_fail(const std::string& source, int line, const std::string& msg) {
  throw MeshError(MeshError::Kind::Parse, source + ":" + std::to_string(line) + ": " + msg);
}

[[noreturn]] void topo_fail(const std::string& msg) {
  throw MeshError(MeshError::Kind::Topology, "topology error: " + msg);
}

}  // namespace

double signed_volume(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  Eigen::Matrix3d m;
  m.col(0) = b - a;
  m.col(1) = c - a;
  m.col(2) = d - a;
  return m.determinant() / 6.0;
}

MacroMesh parse_mesh(std::istream& in, const std::string& source_name) {
  MacroMesh mesh;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (!header) {
      int version = 0;
      if (key != "hhgmesh" || !(ls >> version) || version != 1)
        parse_fail(source_name, lineno, "expected header 'hhgmesh 1'");
      header = true;
      continue;
    }
    if (key == "v") {
      Point3 p;
      if (!(ls >> p[0] >> p[1] >> p[2])) parse_fail(source_name, lineno, "vertex needs 3 coordinates");
      mesh.vertices.push_back(p);
    } else if (key == "c") {
      std::array<int, 4> c{};
      if (!(ls >> c[0] >> c[1] >> c[2] >> c[3])) parse_fail(source_name, lineno, "cell needs 4 indices");
      mesh.cells.push_back(c);
    } else if (key == "bf") {
      BoundaryFacet f;
      std::string tag;
      if (!(ls >> f.vertices[0] >> f.vertices[1] >> f.vertices[2] >> tag))
        parse_fail(source_name, lineno, "boundary facet needs 3 indices and a tag");
      if (tag == "D") {
        f.tag = BoundaryTag::Dirichlet;
      } else if (tag == "N") {
        f.tag = BoundaryTag::Neumann;
      } else {
        parse_fail(source_name, lineno, "unknown boundary tag '" + tag + "'");
      }
      mesh.boundary_facets.push_back(f);
    } else {
      parse_fail(source_name, lineno, "unknown record '" + key + "'");
    }
    std::string extra;
    if (ls >> extra) parse_fail(source_name, lineno, "trailing token '" + extra + "'");
  }
  if (!header) parse_fail(source_name, lineno, "missing header 'hhgmesh 1'");
  validate(mesh);
  return mesh;
}

MacroMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError(MeshError::Kind::Io, "cannot open mesh file " + path);
  return parse_mesh(in, path);
}

void write_mesh(const MacroMesh& mesh, std::ostream& out) {
  out << "hhgmesh 1\n" << std::setprecision(17);
  for (const auto& v : mesh.vertices) out << "v " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  for (const auto& c : mesh.cells) out << "c " << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << '\n';
  for (const auto& f : mesh.boundary_facets)
    out << "bf " << f.vertices[0] << ' ' << f.vertices[1] << ' ' << f.vertices[2] << ' '
        << (f.tag == BoundaryTag::Dirichlet ? 'D' : 'N') << '\n';
}

void save_mesh(const MacroMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw MeshError(MeshError::Kind::Io, "cannot write mesh file " + path);
  write_mesh(mesh, out);
}

void validate(MacroMesh& mesh) {
  const int nv = static_cast<int>(mesh.vertices.size());
  if (mesh.cells.empty()) topo_fail("mesh has no cells");

  Eigen::Vector3d lo = mesh.vertices.front(), hi = lo;
  for (const auto& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double scale = (hi - lo).maxCoeff();
  const double vol_tol = 1e-14 * scale * scale * scale;

  std::map<std::array<int, 3>, int> face_count;
  for (std::size_t ci = 0; ci < mesh.cells.size(); ++ci) {
    const auto& c = mesh.cells[ci];
    for (int a = 0; a < 4; ++a) {
      if (c[a] < 0 || c[a] >= nv)
        topo_fail("cell " + std::to_string(ci) + " references nonexistent vertex " + std::to_string(c[a]));
      for (int b = 0; b < a; ++b)
        if (c[a] == c[b]) topo_fail("cell " + std::to_string(ci) + " has repeated vertices");
    }
    const double vol = signed_volume(mesh.vertices[c[0]], mesh.vertices[c[1]], mesh.vertices[c[2]],
                                     mesh.vertices[c[3]]);
    if (std::abs(vol) <= vol_tol) topo_fail("cell " + std::to_string(ci) + " is degenerate");
    if (vol < 0) topo_fail("cell " + std::to_string(ci) + " is inverted (negative orientation)");
    for (const auto& fv : kCellFaceVertices) ++face_count[sorted3({c[fv[0]], c[fv[1]], c[fv[2]]})];
  }

  std::set<std::array<int, 3>> listed;
  for (std::size_t fi = 0; fi < mesh.boundary_facets.size(); ++fi) {
    const auto& f = mesh.boundary_facets[fi];
    for (int v : f.vertices)
      if (v < 0 || v >= nv)
        topo_fail("boundary facet " + std::to_string(fi) + " references nonexistent vertex " + std::to_string(v));
    const auto key = sorted3(f.vertices);
    auto it = face_count.find(key);
    if (it == face_count.end() || it->second != 1)
      topo_fail("boundary facet " + std::to_string(fi) + " is not a face of exactly one cell");
    if (!listed.insert(key).second) topo_fail("boundary facet " + std::to_string(fi) + " listed twice");
  }
  for (const auto& [key, count] : face_count) {
    if (count > 2) topo_fail("face shared by more than two cells");
    if (count == 1 && !listed.count(key)) mesh.boundary_facets.push_back({key, BoundaryTag::Dirichlet});
  }
}

MacroMesh generate_unit_cube() {
  MacroMesh mesh;
  for (int id = 0; id < 8; ++id) mesh.vertices.emplace_back(id & 1, (id >> 1) & 1, (id >> 2) & 1);
  for (int axis = 0; axis < 3; ++axis)
    for (int side = 0; side < 2; ++side) {
      Point3 p(0.5, 0.5, 0.5);
      p[axis] = side;
      mesh.vertices.push_back(p);
    }
  mesh.vertices.emplace_back(0.5, 0.5, 0.5);
  const int center = 14;

  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3, w = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      const int fc = 8 + 2 * axis + side;
      std::array<int, 4> ring{};
      const int du[4] = {0, 1, 1, 0}, dw[4] = {0, 0, 1, 1};
      for (int r = 0; r < 4; ++r) {
        int bits[3];
        bits[axis] = side;
        bits[u] = du[r];
        bits[w] = dw[r];
        ring[r] = bits[0] + 2 * bits[1] + 4 * bits[2];
      }
      for (int r = 0; r < 4; ++r) {
        std::array<int, 4> c{fc, ring[r], ring[(r + 1) % 4], center};
        if (signed_volume(mesh.vertices[c[0]], mesh.vertices[c[1]], mesh.vertices[c[2]], mesh.vertices[c[3]]) < 0)
          std::swap(c[1], c[2]);
        mesh.cells.push_back(c);
        mesh.boundary_facets.push_back({{c[0], c[1], c[2]}, BoundaryTag::Dirichlet});
      }
    }
  }
  validate(mesh);
  return mesh;
}

MacroMesh generate_single_tet() {
  MacroMesh mesh;
  mesh.vertices = {Point3(0, 0, 0), Point3(1, 0, 0), Point3(0, 1, 0), Point3(0, 0, 1)};
  mesh.cells = {{0, 1, 2, 3}};
  validate(mesh);
  return mesh;
}

std::string mesh_hash(const MacroMesh& mesh) {
  std::ostringstream s;
  write_mesh(mesh, s);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s.str()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << h;
  return hex.str();
}

int PrimitiveGraph::find_edge(int a, int b) const {
  auto it = edge_index.find({std::min(a, b), std::max(a, b)});
  return it == edge_index.end() ? -1 : it->second;
}

int PrimitiveGraph::find_face(int a, int b, int c) const {
  auto it = face_index.find(sorted3({a, b, c}));
  return it == face_index.end() ? -1 : it->second;
}

bool PrimitiveGraph::fully_dirichlet() const {
  return std::all_of(faces.begin(), faces.end(), [](const FacePrimitive& f) { return !f.boundary || f.dirichlet; });
}

bool PrimitiveGraph::connected() const {
  if (cells.empty()) return true;
  std::vector<char> seen(cells.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const int c = stack.back();
    stack.pop_back();
    for (int f : cells[c].faces)
      for (int n : faces[f].cells)
        if (!seen[n]) {
          seen[n] = 1;
          ++count;
          stack.push_back(n);
        }
  }
  return count == cells.size();
}

PrimitiveGraph build_primitive_graph(const MacroMesh& mesh) {
  PrimitiveGraph g;
  g.coordinates = mesh.vertices;
  g.vertices.resize(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) g.vertices[v].mesh_vertex = static_cast<int>(v);

  auto edge_id = [&](int a, int b) {
    std::array<int, 2> key{std::min(a, b), std::max(a, b)};
    auto [it, inserted] = g.edge_index.emplace(key, static_cast<int>(g.edges.size()));
    if (inserted) {
      EdgePrimitive e;
      e.vertices = key;
      g.edges.push_back(e);
      g.vertices[key[0]].edges.push_back(it->second);
      g.vertices[key[1]].edges.push_back(it->second);
    }
    return it->second;
  };
  auto face_id = [&](int a, int b, int c) {
    const auto key = sorted3({a, b, c});
    auto [it, inserted] = g.face_index.emplace(key, static_cast<int>(g.faces.size()));
    if (inserted) {
      FacePrimitive f;
      f.vertices = key;
      f.edges = {edge_id(key[0], key[1]), edge_id(key[0], key[2]), edge_id(key[1], key[2])};
      const int fid = it->second;
      g.faces.push_back(f);
      for (int e : g.faces.back().edges) g.edges[e].faces.push_back(fid);
      for (int v : key) g.vertices[v].faces.push_back(fid);
    }
    return it->second;
  };

  for (std::size_t ci = 0; ci < mesh.cells.size(); ++ci) {
    const auto& c = mesh.cells[ci];
    CellPrimitive cell;
    cell.vertices = c;
    for (int e = 0; e < 6; ++e) cell.edges[e] = edge_id(c[kCellEdgeVertices[e][0]], c[kCellEdgeVertices[e][1]]);
    for (int f = 0; f < 4; ++f)
      cell.faces[f] = face_id(c[kCellFaceVertices[f][0]], c[kCellFaceVertices[f][1]], c[kCellFaceVertices[f][2]]);
    const int cid = static_cast<int>(g.cells.size());
    g.cells.push_back(cell);
    for (int v : c) g.vertices[v].cells.push_back(cid);
    for (int e : cell.edges) g.edges[e].cells.push_back(cid);
    for (int f : cell.faces) g.faces[f].cells.push_back(cid);
  }

  for (const auto& bf : mesh.boundary_facets) {
    const int fid = g.find_face(bf.vertices[0], bf.vertices[1], bf.vertices[2]);
    if (fid < 0) topo_fail("boundary facet is not a mesh face");
    auto& f = g.faces[fid];
    const bool dir = bf.tag == BoundaryTag::Dirichlet;
    f.boundary = true;
    f.dirichlet = dir;
    for (int e : f.edges) {
      g.edges[e].boundary = true;
      g.edges[e].dirichlet |= dir;
    }
    for (int v : f.vertices) {
      g.vertices[v].boundary = true;
      g.vertices[v].dirichlet |= dir;
    }
  }
  return g;
}

}  // namespace hhg

#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "hhg/mesh.hpp"

using namespace hhg;

namespace {

MacroMesh parse(const std::string& text) {
  std::istringstream in(text);
  return parse_mesh(in, "test");
}

const char* kSingleTet = R"(hhgmesh 1
# unit tetrahedron
v 0 0 0
v 1 0 0
v 0 1 0
v 0 0 1
c 0 1 2 3
)";

const char* kTwoTets = R"(hhgmesh 1
v 0 0 0
v 1 0 0
v 0 1 0
v 0 0 1
v 1 1 1
c 0 1 2 3
c 1 2 3 4
bf 0 1 2 N
)";

MeshError::Kind error_kind(const std::string& text) {
  try {
    parse(text);
  } catch (const MeshError& e) {
    return e.kind();
  }
  FAIL("expected a mesh error");
  return MeshError::Kind::Io;
}

}  // namespace

TEST_CASE("single tet file loads with four default Dirichlet facets") {
  const MacroMesh m = parse(kSingleTet);
  CHECK(m.cells.size() == 1);
  CHECK(m.boundary_facets.size() == 4);
  for (const auto& f : m.boundary_facets) CHECK(f.tag == BoundaryTag::Dirichlet);
}

TEST_CASE("parse and topology errors") {
  CHECK(error_kind("v 0 0 0\n") == MeshError::Kind::Parse);
  CHECK(error_kind("hhgmesh 1\nv 0 0\n") == MeshError::Kind::Parse);
  CHECK(error_kind("hhgmesh 1\nq 1\n") == MeshError::Kind::Parse);
  CHECK(error_kind(std::string(kSingleTet) + "bf 0 1 7 D\n") == MeshError::Kind::Topology);
  CHECK(error_kind(std::string(kSingleTet) + "bf 0 1 2 X\n") == MeshError::Kind::Parse);
  CHECK(error_kind("hhgmesh 1\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nc 0 2 1 3\n") == MeshError::Kind::Topology);
  CHECK(error_kind("hhgmesh 1\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nc 0 1 2 3\n") == MeshError::Kind::Topology);
  CHECK(error_kind(std::string(kTwoTets) + "bf 1 2 3 D\n") == MeshError::Kind::Topology);
}

TEST_CASE("parse errors carry line numbers") {
  try {
    parse("hhgmesh 1\nv 0 0 0\nc 0 1\n");
    FAIL("no error");
  } catch (const MeshError& e) {
    CHECK(std::string(e.what()).find("test:3") != std::string::npos);
  }
}

TEST_CASE("unit cube generator") {
  const MacroMesh m = generate_unit_cube();
  CHECK(m.cells.size() == 24);
  CHECK(m.vertices.size() == 15);
  CHECK(m.boundary_facets.size() == 24);
  double vol = 0.0;
  for (const auto& c : m.cells) {
    const double v = signed_volume(m.vertices[c[0]], m.vertices[c[1]], m.vertices[c[2]], m.vertices[c[3]]);
    CHECK(v > 0.0);
    vol += v;
  }
  CHECK(std::abs(vol - 1.0) < 1e-14);
  for (const auto& f : m.boundary_facets) {
    CHECK(f.tag == BoundaryTag::Dirichlet);
    bool on_plane = false;
    for (int axis = 0; axis < 3; ++axis)
      for (double side : {0.0, 1.0}) {
        bool all = true;
        for (int v : f.vertices) all &= m.vertices[v][axis] == side;
        on_plane |= all;
      }
    CHECK(on_plane);
  }
}

TEST_CASE("primitive graph counts") {
  const PrimitiveGraph tet = build_primitive_graph(parse(kSingleTet));
  CHECK(tet.vertices.size() == 4);
  CHECK(tet.edges.size() == 6);
  CHECK(tet.faces.size() == 4);
  CHECK(tet.cells.size() == 1);

  const PrimitiveGraph cube = build_primitive_graph(generate_unit_cube());
  CHECK(cube.cells.size() == 24);
  CHECK(cube.faces.size() == 60);
  CHECK(cube.edges.size() == 50);
  CHECK(cube.vertices.size() == 15);
  CHECK(cube.connected());
  CHECK(cube.fully_dirichlet());
  int interior = 0;
  for (const auto& f : cube.faces) {
    CHECK((f.cells.size() == 1 || f.cells.size() == 2));
    CHECK((f.cells.size() == 2) == !f.boundary);
    interior += f.cells.size() == 2;
  }
  CHECK(interior == 36);
  CHECK(!cube.vertices[14].boundary);

  const PrimitiveGraph two = build_primitive_graph(parse(kTwoTets));
  const int shared = two.find_face(1, 2, 3);
  REQUIRE(shared >= 0);
  CHECK(two.faces[shared].cells.size() == 2);
  CHECK(!two.fully_dirichlet());
  const int neumann = two.find_face(0, 1, 2);
  CHECK(two.faces[neumann].boundary);
  CHECK(!two.faces[neumann].dirichlet);
}

TEST_CASE("cell faces reproduce cell edges") {
  const PrimitiveGraph g = build_primitive_graph(generate_unit_cube());
  for (const auto& c : g.cells) {
    std::set<int> from_faces;
    for (int f : c.faces)
      for (int e : g.faces[f].edges) from_faces.insert(e);
    CHECK(from_faces == std::set<int>(c.edges.begin(), c.edges.end()));
    CHECK(std::set<int>(c.faces.begin(), c.faces.end()).size() == 4);
  }
}

TEST_CASE("boundary closure") {
  const PrimitiveGraph g = build_primitive_graph(parse(kTwoTets));
  for (const auto& f : g.faces) {
    if (!f.boundary) continue;
    for (int e : f.edges) CHECK(g.edges[e].boundary);
    for (int v : f.vertices) CHECK(g.vertices[v].boundary);
  }
}

TEST_CASE("write/load round trip keeps the graph") {
  const MacroMesh m = generate_unit_cube();
  std::ostringstream out;
  write_mesh(m, out);
  const MacroMesh back = parse(out.str());
  CHECK(back.vertices == m.vertices);
  CHECK(back.cells == m.cells);
  const PrimitiveGraph a = build_primitive_graph(m), b = build_primitive_graph(back);
  CHECK(a.edge_index == b.edge_index);
  CHECK(a.face_index == b.face_index);
  CHECK(mesh_hash(m) == mesh_hash(back));
}

#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hhg {

using Point3 = Eigen::Vector3d;

enum class BoundaryTag { Dirichlet, Neumann };

struct BoundaryFacet {
  std::array<int, 3> vertices;
  BoundaryTag tag = BoundaryTag::Dirichlet;
};

// Coarse tetrahedral mesh. After validate() every boundary face of the
// cell complex has exactly one entry in boundary_facets.
struct MacroMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<int, 4>> cells;
  std::vector<BoundaryFacet> boundary_facets;
};

class MeshError : public std::runtime_error {
 public:
  enum class Kind { Parse, Topology, Io };
  MeshError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

MacroMesh parse_mesh(std::istream& in, const std::string& source_name = "<stream>");
MacroMesh load_mesh(const std::string& path);
void write_mesh(const MacroMesh& mesh, std::ostream& out);
void save_mesh(const MacroMesh& mesh, const std::string& path);

// Checks the invariants and appends Dirichlet facets for unlisted boundary faces.
void validate(MacroMesh& mesh);

double signed_volume(const Point3& a, const Point3& b, const Point3& c, const Point3& d);

MacroMesh generate_unit_cube();
MacroMesh generate_single_tet();

// Stable content hash, used to key cached reference solutions.
std::string mesh_hash(const MacroMesh& mesh);

struct VertexPrimitive {
  int mesh_vertex = -1;
  std::vector<int> edges, faces, cells;
  bool boundary = false;
  bool dirichlet = false;
};

struct EdgePrimitive {
  std::array<int, 2> vertices;  // sorted mesh vertex ids
  std::vector<int> faces, cells;
  bool boundary = false;
  bool dirichlet = false;
};

struct FacePrimitive {
  std::array<int, 3> vertices;  // sorted mesh vertex ids
  std::array<int, 3> edges;     // (v0,v1), (v0,v2), (v1,v2)
  std::vector<int> cells;
  bool boundary = false;
  bool dirichlet = false;
};

struct CellPrimitive {
  std::array<int, 4> vertices;  // mesh order, positively oriented
  std::array<int, 6> edges;     // local pairs 01, 02, 03, 12, 13, 23
  std::array<int, 4> faces;     // local triples 012, 013, 023, 123
};

inline constexpr std::array<std::array<int, 2>, 6> kCellEdgeVertices{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
inline constexpr std::array<std::array<int, 3>, 4> kCellFaceVertices{
    {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};

struct PrimitiveGraph {
  std::vector<Point3> coordinates;
  std::vector<VertexPrimitive> vertices;
  std::vector<EdgePrimitive> edges;
  std::vector<FacePrimitive> faces;
  std::vector<CellPrimitive> cells;
  std::map<std::array<int, 2>, int> edge_index;
  std::map<std::array<int, 3>, int> face_index;

  int find_edge(int a, int b) const;
  int find_face(int a, int b, int c) const;
  bool fully_dirichlet() const;
  bool connected() const;
};

PrimitiveGraph build_primitive_graph(const MacroMesh& mesh);

}  // namespace hhg

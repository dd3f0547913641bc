#pragma once

#include "lsfem/common.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lsfem {

using Point = Eigen::Vector2d;

enum class Domain { Square, Lshape };

enum class MeshFamily {
  SquareRight,
  SquareCrossed,
  SquareNonuniform,
  LshapeLeft,
  LshapeUniform,
  LshapeNonuniform,
};

enum class SquareFamily { Right, Crossed, Nonuniform };
enum class LshapeFamily { Left, Uniform, Nonuniform };

enum class BoundaryTag : std::uint8_t { Dirichlet, Neumann };

Domain domain_of(MeshFamily family);
std::string_view to_string(MeshFamily family);
std::string_view to_string(Domain domain);
MeshFamily parse_family(Domain domain, std::string_view name);
Domain parse_domain(std::string_view name);

/// Straight boundary segment [a, b]. A boundary edge whose two endpoints both
/// lie on a segment takes the segment's tag.
struct BoundarySegment {
  Point a;
  Point b;
};

/// Partition of the boundary into Dirichlet and Neumann parts. The default
/// (no Neumann segments) clamps the whole boundary.
struct BoundaryConfig {
  std::vector<BoundarySegment> neumann;

  bool all_dirichlet() const { return neumann.empty(); }

  /// Accepts "dirichlet_all" or "neumann:x0,y0,x1,y1;x0,y0,x1,y1;...".
  static BoundaryConfig parse(std::string_view text);
  std::string to_string() const;
};

struct Edge {
  std::array<Index, 2> vertices;  // sorted ascending
  std::array<Index, 2> cells;     // cells[1] == -1 on the boundary
  bool on_boundary() const { return cells[1] < 0; }
};

struct TriMesh {
  std::vector<Point> vertices;
  std::vector<std::array<Index, 3>> cells;  // counterclockwise

  // Filled by build_topology. Local edge k of a cell is opposite local vertex k.
  std::vector<Edge> edges;
  std::vector<std::array<Index, 3>> cell_edges;
  std::vector<std::array<int, 3>> cell_edge_signs;
  std::vector<BoundaryTag> edge_tags;  // meaningful for boundary edges only

  MeshFamily family = MeshFamily::SquareRight;
  int n_per_side = 0;

  Index num_vertices() const { return static_cast<Index>(vertices.size()); }
  Index num_cells() const { return static_cast<Index>(cells.size()); }
  Index num_edges() const { return static_cast<Index>(edges.size()); }

  double signed_area(Index cell) const;
  double area(Index cell) const { return signed_area(cell); }
  double edge_length(Index edge) const;
  /// Unit normal of the edge, pointing out of edges[e].cells[0].
  Point edge_normal(Index edge) const;
  Point edge_midpoint(Index edge) const;
  double total_area() const;
  double domain_area() const;

  /// Vertex flags derived from boundary edges.
  std::vector<bool> boundary_vertices() const;
  std::vector<bool> dirichlet_vertices() const;
  bool has_neumann() const;
};

/// Deterministic 64-bit mixer used by the Nonuniform vertex perturbation.
std::uint64_t splitmix64(std::uint64_t x);

TriMesh generate_square(SquareFamily family, int n, std::uint64_t seed = 0);
TriMesh generate_lshape(LshapeFamily family, int n, std::uint64_t seed = 0);
TriMesh generate_mesh(MeshFamily family, int n, std::uint64_t seed = 0);

/// Enumerates edges, cell/edge incidence, orientation signs and boundary
/// tags. The sign of a global edge is +1 in its lower-index cell and -1 in
/// the other one; boundary edges are +1 (outward).
TriMesh build_topology(TriMesh mesh, const BoundaryConfig& bc = {});

/// Re-tags boundary edges for a new boundary configuration.
void apply_boundary_config(TriMesh& mesh, const BoundaryConfig& bc);

/// Plain-text export: header "V T E", then V coordinate lines, then T
/// vertex-index triples.
void write_mesh_text(std::ostream& out, const TriMesh& mesh);
TriMesh read_mesh_text(std::istream& in);

struct VtkField {
  std::string name;
  bool point_data = true;
  int components = 1;  // 1 or 3
  std::vector<double> values;
};

/// Legacy ASCII VTK unstructured grid with optional point/cell fields.
void write_vtk(std::ostream& out, const TriMesh& mesh,
               const std::vector<VtkField>& fields = {});

}  // namespace lsfem

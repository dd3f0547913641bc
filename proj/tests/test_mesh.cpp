#include "helpers.hpp"
#include "lsfem/mesh.hpp"

#include <doctest.h>
#include <fmt/format.h>

#include <sstream>

using namespace lsfem;

namespace {

Index count_boundary_edges(const TriMesh& m) {
  Index b = 0;
  for (const auto& e : m.edges) b += e.on_boundary() ? 1 : 0;
  return b;
}

void check_invariants(const TriMesh& m) {
  CHECK(m.num_vertices() - m.num_edges() + m.num_cells() == 1);
  double area = 0;
  for (Index c = 0; c < m.num_cells(); ++c) {
    CHECK(m.signed_area(c) > 0);
    area += m.signed_area(c);
  }
  CHECK(std::abs(area - m.domain_area()) <= 1e-12 * m.domain_area());

  std::vector<int> seen(m.num_edges(), 0);
  for (Index c = 0; c < m.num_cells(); ++c)
    for (int k = 0; k < 3; ++k) {
      const Index e = m.cell_edges[c][k];
      const auto& edge = m.edges[e];
      ++seen[e];
      // Local edge k is opposite local vertex k.
      const Index a = m.cells[c][(k + 1) % 3], b = m.cells[c][(k + 2) % 3];
      CHECK(edge.vertices[0] == std::min(a, b));
      CHECK(edge.vertices[1] == std::max(a, b));
      const int expected = edge.on_boundary() || edge.cells[0] == c ? 1 : -1;
      CHECK(m.cell_edge_signs[c][k] == expected);
    }
  for (Index e = 0; e < m.num_edges(); ++e) {
    const auto& edge = m.edges[e];
    CHECK(edge.vertices[0] < edge.vertices[1]);
    CHECK(seen[e] == (edge.on_boundary() ? 1 : 2));
    if (!edge.on_boundary()) CHECK(edge.cells[0] < edge.cells[1]);
  }
}

}  // namespace

TEST_CASE("square mesh counts") {
  const TriMesh right = generate_mesh(MeshFamily::SquareRight, 4);
  CHECK(right.num_vertices() == 25);
  CHECK(right.num_cells() == 32);
  CHECK(right.num_edges() == 56);

  const TriMesh crossed = generate_mesh(MeshFamily::SquareCrossed, 4);
  CHECK(crossed.num_vertices() == 41);
  CHECK(crossed.num_cells() == 64);
  CHECK(crossed.num_edges() == 104);

  const TriMesh c2 = generate_mesh(MeshFamily::SquareCrossed, 2);
  CHECK(c2.num_vertices() == 13);
  CHECK(c2.num_cells() == 16);
  CHECK(c2.num_edges() == 28);
}

TEST_CASE("right diagonal runs lower-left to upper-right, left diagonal lower-right to upper-left") {
  auto has_edge = [](const TriMesh& m, Point a, Point b) {
    for (const auto& e : m.edges) {
      const Point p = m.vertices[e.vertices[0]], q = m.vertices[e.vertices[1]];
      if (((p - a).norm() < 1e-14 && (q - b).norm() < 1e-14) || ((p - b).norm() < 1e-14 && (q - a).norm() < 1e-14))
        return true;
    }
    return false;
  };
  const TriMesh r = generate_mesh(MeshFamily::SquareRight, 1);
  CHECK(has_edge(r, {0, 0}, {1, 1}));
  CHECK_FALSE(has_edge(r, {1, 0}, {0, 1}));
  const TriMesh l = generate_mesh(MeshFamily::LshapeLeft, 2);
  CHECK(has_edge(l, {0.5, 0}, {0, 0.5}));
  CHECK_FALSE(has_edge(l, {0, 0}, {0.5, 0.5}));
}

TEST_CASE("smallest right mesh has one interior edge with opposite signs") {
  const TriMesh m = generate_mesh(MeshFamily::SquareRight, 1);
  REQUIRE(m.num_edges() == 5);
  CHECK(count_boundary_edges(m) == 4);
  for (Index e = 0; e < m.num_edges(); ++e) {
    if (m.edges[e].on_boundary()) continue;
    int signs[2] = {0, 0};
    for (int side = 0; side < 2; ++side) {
      const Index c = m.edges[e].cells[side];
      for (int k = 0; k < 3; ++k)
        if (m.cell_edges[c][k] == e) signs[side] = m.cell_edge_signs[c][k];
    }
    CHECK(signs[0] == 1);
    CHECK(signs[1] == -1);
  }
}

TEST_CASE("nonuniform mesh keeps right topology and the boundary") {
  const TriMesh right = generate_mesh(MeshFamily::SquareRight, 4);
  const TriMesh m = generate_mesh(MeshFamily::SquareNonuniform, 4, 7);
  CHECK(m.num_cells() == 32);
  CHECK(m.cells == right.cells);
  const auto boundary = m.boundary_vertices();
  bool moved = false;
  for (Index v = 0; v < m.num_vertices(); ++v) {
    const Point p = m.vertices[v];
    if (boundary[v]) {
      const bool on_side = p.x() == 0 || p.x() == 1 || p.y() == 0 || p.y() == 1;
      CHECK(on_side);
      CHECK((p - right.vertices[v]).norm() == 0.0);
    } else {
      const Point d = p - right.vertices[v];
      CHECK(std::abs(d.x()) <= 0.25 / 4 + 1e-15);
      CHECK(std::abs(d.y()) <= 0.25 / 4 + 1e-15);
      moved = moved || d.norm() > 0;
    }
  }
  CHECK(moved);
  const TriMesh other = generate_mesh(MeshFamily::SquareNonuniform, 4, 8);
  CHECK(other.vertices != m.vertices);
}

TEST_CASE("L-shape counts") {
  const TriMesh left = generate_mesh(MeshFamily::LshapeLeft, 4);
  CHECK(left.num_cells() == 24);
  CHECK(std::abs(left.total_area() - 0.75) <= 1e-12);
  CHECK(generate_mesh(MeshFamily::LshapeUniform, 4).num_cells() == 48);

  const TriMesh smallest = generate_mesh(MeshFamily::LshapeLeft, 2);
  CHECK(smallest.num_cells() == 6);
  bool corner = false;
  for (const auto& p : smallest.vertices) corner = corner || (p - Point(0.5, 0.5)).norm() == 0.0;
  CHECK(corner);
  for (const auto& p : generate_mesh(MeshFamily::LshapeUniform, 8).vertices)
    CHECK_FALSE((p.x() > 0.5 + 1e-14 && p.y() > 0.5 + 1e-14));
}

TEST_CASE("invariants over the refinement sweep") {
  for (auto fam : {MeshFamily::SquareRight, MeshFamily::SquareCrossed, MeshFamily::SquareNonuniform})
    for (int n : {1, 2, 4, 8, 16}) {
      if (fam == MeshFamily::SquareNonuniform && n < 2) continue;
      CAPTURE(to_string(fam));
      CAPTURE(n);
      check_invariants(generate_mesh(fam, n, 3));
    }
  for (auto fam : {MeshFamily::LshapeLeft, MeshFamily::LshapeUniform, MeshFamily::LshapeNonuniform})
    for (int n : {2, 4, 8, 16}) {
      CAPTURE(to_string(fam));
      CAPTURE(n);
      check_invariants(generate_mesh(fam, n, 3));
    }
}

TEST_CASE("generation is deterministic") {
  for (auto fam : {MeshFamily::SquareNonuniform, MeshFamily::LshapeNonuniform}) {
    const TriMesh a = generate_mesh(fam, 8, 42), b = generate_mesh(fam, 8, 42);
    REQUIRE(a.vertices.size() == b.vertices.size());
    for (std::size_t i = 0; i < a.vertices.size(); ++i) {
      CHECK(a.vertices[i].x() == b.vertices[i].x());
      CHECK(a.vertices[i].y() == b.vertices[i].y());
    }
    CHECK(a.cells == b.cells);
  }
}

TEST_CASE("invalid sizes are rejected") {
  CHECK_THROWS_AS(generate_mesh(MeshFamily::SquareRight, 0), InputError);
  CHECK_THROWS_AS(generate_mesh(MeshFamily::SquareNonuniform, 1), InputError);
  CHECK_THROWS_AS(generate_mesh(MeshFamily::LshapeLeft, 3), InputError);
  CHECK_THROWS_AS(generate_mesh(MeshFamily::LshapeUniform, 0), InputError);
}

TEST_CASE("non-manifold edge is a hard error") {
  TriMesh m;
  m.vertices = {{0, 0}, {1, 0}, {0.5, 1}, {0.5, -1}, {2, 0.5}};
  m.cells = {{0, 1, 2}, {0, 3, 1}, {0, 1, 4}};
  CHECK_THROWS_AS(build_topology(m), InputError);
}

TEST_CASE("splitmix64 matches the reference generator") {
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("family and domain names") {
  CHECK(parse_family(Domain::Square, "right") == MeshFamily::SquareRight);
  CHECK(parse_family(Domain::Square, "crossed") == MeshFamily::SquareCrossed);
  CHECK(parse_family(Domain::Lshape, "left") == MeshFamily::LshapeLeft);
  CHECK(parse_family(Domain::Lshape, "uniform") == MeshFamily::LshapeUniform);
  CHECK(parse_family(Domain::Lshape, "nonuniform") == MeshFamily::LshapeNonuniform);
  CHECK_THROWS_AS(parse_family(Domain::Square, "left"), InputError);
  CHECK(parse_domain("lshape") == Domain::Lshape);
  CHECK_THROWS_AS(parse_domain("circle"), InputError);
}

TEST_CASE("boundary configuration tags Neumann segments") {
  const BoundaryConfig bc = BoundaryConfig::parse("neumann:1,0,1,1");
  REQUIRE(bc.neumann.size() == 1);
  CHECK(BoundaryConfig::parse(bc.to_string()).neumann.size() == 1);
  CHECK(BoundaryConfig::parse("dirichlet_all").all_dirichlet());
  CHECK_THROWS_AS(BoundaryConfig::parse("neumann:1,0,1"), InputError);

  TriMesh m = generate_mesh(MeshFamily::SquareRight, 4);
  apply_boundary_config(m, bc);
  CHECK(m.has_neumann());
  int neumann = 0;
  for (Index e = 0; e < m.num_edges(); ++e) {
    if (!m.edges[e].on_boundary() || m.edge_tags[e] != BoundaryTag::Neumann) continue;
    ++neumann;
    CHECK(m.vertices[m.edges[e].vertices[0]].x() == 1.0);
    CHECK(m.vertices[m.edges[e].vertices[1]].x() == 1.0);
  }
  CHECK(neumann == 4);
  // Vertices on the Neumann side stay Dirichlet only at the corners.
  const auto dir = m.dirichlet_vertices();
  int free_on_right = 0;
  for (Index v = 0; v < m.num_vertices(); ++v)
    if (m.vertices[v].x() == 1.0 && !dir[v]) ++free_on_right;
  CHECK(free_on_right == 3);
}

TEST_CASE("plain-text round trip and VTK header") {
  const TriMesh m = generate_mesh(MeshFamily::LshapeNonuniform, 4, 5);
  std::stringstream ss;
  write_mesh_text(ss, m);
  std::string first;
  std::getline(ss, first);
  CHECK(first == fmt::format("{} {} {}", m.num_vertices(), m.num_cells(), m.num_edges()));
  ss.seekg(0);
  const TriMesh back = read_mesh_text(ss);
  CHECK(back.cells == m.cells);
  REQUIRE(back.vertices.size() == m.vertices.size());
  for (std::size_t i = 0; i < m.vertices.size(); ++i) CHECK((back.vertices[i] - m.vertices[i]).norm() == 0.0);
  CHECK(back.num_edges() == m.num_edges());

  std::ostringstream vtk;
  write_vtk(vtk, m, {VtkField{"id", false, 1, std::vector<double>(m.num_cells(), 1.0)}});
  CHECK(vtk.str().find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(vtk.str().find("CELL_DATA 24") != std::string::npos);
}

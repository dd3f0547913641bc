#include "lsfem/mesh.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

namespace lsfem {

namespace {

constexpr double kAreaFloor = 1e-14;

bool is_lshape(MeshFamily f) {
  return f == MeshFamily::LshapeLeft || f == MeshFamily::LshapeUniform ||
         f == MeshFamily::LshapeNonuniform;
}

enum class Split { RightDiagonal, LeftDiagonal, Crossed };

// Grid coordinates of every generated vertex; used to key the perturbation.
struct GridMesh {
  TriMesh mesh;
  std::vector<std::array<std::int64_t, 2>> grid;  // centers use 2i+1 coordinates
};

GridMesh grid_mesh(int n, bool lshape, Split split) {
  const int half = n / 2;
  auto keep_square = [&](int i, int j) { return !(lshape && i >= half && j >= half); };
  auto keep_vertex = [&](int i, int j) { return !(lshape && i > half && j > half); };

  GridMesh g;
  std::vector<Index> id((n + 1) * (n + 1), -1);
  const double h = 1.0 / n;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      if (!keep_vertex(i, j)) continue;
      id[j * (n + 1) + i] = g.mesh.num_vertices();
      g.mesh.vertices.emplace_back(i * h, j * h);
      g.grid.push_back({2 * i, 2 * j});
    }
  }
  auto v = [&](int i, int j) { return id[j * (n + 1) + i]; };

  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (!keep_square(i, j)) continue;
      const Index ll = v(i, j), lr = v(i + 1, j), ur = v(i + 1, j + 1), ul = v(i, j + 1);
      switch (split) {
        case Split::RightDiagonal:
          g.mesh.cells.push_back({ll, lr, ur});
          g.mesh.cells.push_back({ll, ur, ul});
          break;
        case Split::LeftDiagonal:
          g.mesh.cells.push_back({ll, lr, ul});
          g.mesh.cells.push_back({lr, ur, ul});
          break;
        case Split::Crossed: {
          const Index c = g.mesh.num_vertices();
          g.mesh.vertices.emplace_back((i + 0.5) * h, (j + 0.5) * h);
          g.grid.push_back({2 * i + 1, 2 * j + 1});
          g.mesh.cells.push_back({ll, lr, c});
          g.mesh.cells.push_back({lr, ur, c});
          g.mesh.cells.push_back({ur, ul, c});
          g.mesh.cells.push_back({ul, ll, c});
          break;
        }
      }
    }
  }
  g.mesh.n_per_side = n;
  return g;
}

double hash_offset(std::uint64_t seed, std::int64_t i, std::int64_t j, int axis) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(i));
  h = splitmix64(h ^ static_cast<std::uint64_t>(j));
  h = splitmix64(h ^ static_cast<std::uint64_t>(axis));
  const double unit = static_cast<double>(h >> 11) * 0x1.0p-53;
  return 2.0 * unit - 1.0;
}

bool all_cells_positive(const TriMesh& mesh) {
  for (Index c = 0; c < mesh.num_cells(); ++c)
    if (!(mesh.signed_area(c) > kAreaFloor)) return false;
  return true;
}

// Displaces interior vertices by at most 0.25/n per coordinate; the magnitude
// is halved until no cell is inverted.
void perturb_interior(GridMesh& g, int n, std::uint64_t seed) {
  const auto boundary = g.mesh.boundary_vertices();
  const std::vector<Point> original = g.mesh.vertices;
  double amplitude = 0.25 / n;
  for (int attempt = 0; attempt < 40; ++attempt, amplitude *= 0.5) {
    for (Index k = 0; k < g.mesh.num_vertices(); ++k) {
      if (boundary[k]) continue;
      const auto [gi, gj] = g.grid[k];
      g.mesh.vertices[k] = original[k] + amplitude * Point(hash_offset(seed, gi, gj, 0),
                                                           hash_offset(seed, gi, gj, 1));
    }
    if (all_cells_positive(g.mesh)) return;
  }
  throw NumericalError("nonuniform perturbation cannot keep all cell areas positive");
}

bool on_segment(const Point& p, const BoundarySegment& s) {
  const Point d = s.b - s.a;
  const double len2 = d.squaredNorm();
  const double scale = std::max(1.0, std::sqrt(len2));
  if (len2 == 0.0) return (p - s.a).norm() <= 1e-12 * scale;
  const double t = (p - s.a).dot(d) / len2;
  if (t < -1e-12 || t > 1.0 + 1e-12) return false;
  return (s.a + t * d - p).norm() <= 1e-12 * scale;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Domain domain_of(MeshFamily family) { return is_lshape(family) ? Domain::Lshape : Domain::Square; }

std::string_view to_string(MeshFamily family) {
  switch (family) {
    case MeshFamily::SquareRight: return "right";
    case MeshFamily::SquareCrossed: return "crossed";
    case MeshFamily::SquareNonuniform: return "nonuniform";
    case MeshFamily::LshapeLeft: return "left";
    case MeshFamily::LshapeUniform: return "uniform";
    case MeshFamily::LshapeNonuniform: return "nonuniform";
  }
  return "?";
}

std::string_view to_string(Domain domain) { return domain == Domain::Square ? "square" : "lshape"; }

Domain parse_domain(std::string_view name) {
  if (name == "square") return Domain::Square;
  if (name == "lshape" || name == "l-shape" || name == "L") return Domain::Lshape;
  throw InputError(fmt::format("unknown domain '{}'", name));
}

MeshFamily parse_family(Domain domain, std::string_view name) {
  if (domain == Domain::Square) {
    if (name == "right") return MeshFamily::SquareRight;
    if (name == "crossed") return MeshFamily::SquareCrossed;
    if (name == "nonuniform") return MeshFamily::SquareNonuniform;
  } else {
    if (name == "left") return MeshFamily::LshapeLeft;
    if (name == "uniform") return MeshFamily::LshapeUniform;
    if (name == "nonuniform") return MeshFamily::LshapeNonuniform;
  }
  throw InputError(fmt::format("unknown mesh family '{}' for domain {}", name, to_string(domain)));
}

BoundaryConfig BoundaryConfig::parse(std::string_view text) {
  BoundaryConfig bc;
  if (text == "dirichlet_all" || text.empty()) return bc;
  constexpr std::string_view prefix = "neumann:";
  if (!text.starts_with(prefix))
    throw InputError(fmt::format("unrecognized boundary configuration '{}'", text));
  std::stringstream segments{std::string(text.substr(prefix.size()))};
  std::string item;
  while (std::getline(segments, item, ';')) {
    if (item.empty()) continue;
    std::replace(item.begin(), item.end(), ',', ' ');
    std::istringstream in(item);
    double x0, y0, x1, y1;
    if (!(in >> x0 >> y0 >> x1 >> y1))
      throw InputError(fmt::format("malformed Neumann segment '{}'", item));
    bc.neumann.push_back({Point(x0, y0), Point(x1, y1)});
  }
  if (bc.neumann.empty()) throw InputError("Neumann boundary configuration lists no segments");
  return bc;
}

std::string BoundaryConfig::to_string() const {
  if (neumann.empty()) return "dirichlet_all";
  std::string out = "neumann:";
  for (std::size_t k = 0; k < neumann.size(); ++k) {
    if (k) out += ';';
    const auto& s = neumann[k];
    out += fmt::format("{},{},{},{}", s.a.x(), s.a.y(), s.b.x(), s.b.y());
  }
  return out;
}

double TriMesh::signed_area(Index cell) const {
  const auto& c = cells[cell];
  const Point e1 = vertices[c[1]] - vertices[c[0]];
  const Point e2 = vertices[c[2]] - vertices[c[0]];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

double TriMesh::edge_length(Index edge) const {
  const auto& e = edges[edge];
  return (vertices[e.vertices[1]] - vertices[e.vertices[0]]).norm();
}

Point TriMesh::edge_midpoint(Index edge) const {
  const auto& e = edges[edge];
  return 0.5 * (vertices[e.vertices[0]] + vertices[e.vertices[1]]);
}

Point TriMesh::edge_normal(Index edge) const {
  const auto& e = edges[edge];
  const Point d = vertices[e.vertices[1]] - vertices[e.vertices[0]];
  Point n(d.y(), -d.x());
  n.normalize();
  // Orient out of the first adjacent cell: the opposite vertex lies behind.
  const auto& c = cells[e.cells[0]];
  Index opposite = c[0];
  for (Index v : c)
    if (v != e.vertices[0] && v != e.vertices[1]) opposite = v;
  if (n.dot(vertices[opposite] - vertices[e.vertices[0]]) > 0) n = -n;
  return n;
}

double TriMesh::total_area() const {
  double sum = 0;
  for (Index c = 0; c < num_cells(); ++c) sum += signed_area(c);
  return sum;
}

double TriMesh::domain_area() const { return domain_of(family) == Domain::Square ? 1.0 : 0.75; }

std::vector<bool> TriMesh::boundary_vertices() const {
  std::vector<bool> flag(vertices.size(), false);
  for (const auto& e : edges)
    if (e.on_boundary()) flag[e.vertices[0]] = flag[e.vertices[1]] = true;
  return flag;
}

std::vector<bool> TriMesh::dirichlet_vertices() const {
  std::vector<bool> flag(vertices.size(), false);
  for (Index k = 0; k < num_edges(); ++k) {
    const auto& e = edges[k];
    if (e.on_boundary() && edge_tags[k] == BoundaryTag::Dirichlet)
      flag[e.vertices[0]] = flag[e.vertices[1]] = true;
  }
  return flag;
}

bool TriMesh::has_neumann() const {
  for (Index k = 0; k < num_edges(); ++k)
    if (edges[k].on_boundary() && edge_tags[k] == BoundaryTag::Neumann) return true;
  return false;
}

TriMesh build_topology(TriMesh mesh, const BoundaryConfig& bc) {
  struct Incidence {
    Index a, b, cell;
    int local;
  };
  std::vector<Incidence> inc;
  inc.reserve(3 * mesh.cells.size());
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cells[c];
    for (int k = 0; k < 3; ++k) {
      const Index p = t[(k + 1) % 3], q = t[(k + 2) % 3];
      inc.push_back({std::min(p, q), std::max(p, q), c, k});
    }
  }
  std::sort(inc.begin(), inc.end(), [](const Incidence& x, const Incidence& y) {
    return std::tie(x.a, x.b, x.cell) < std::tie(y.a, y.b, y.cell);
  });

  mesh.edges.clear();
  mesh.cell_edges.assign(mesh.cells.size(), {-1, -1, -1});
  mesh.cell_edge_signs.assign(mesh.cells.size(), {0, 0, 0});
  for (std::size_t k = 0; k < inc.size();) {
    std::size_t end = k + 1;
    while (end < inc.size() && inc[end].a == inc[k].a && inc[end].b == inc[k].b) ++end;
    if (end - k > 2)
      throw InputError(fmt::format("non-manifold edge ({}, {}) shared by {} cells", inc[k].a,
                                   inc[k].b, end - k));
    const Index e = mesh.num_edges();
    Edge edge{{inc[k].a, inc[k].b}, {inc[k].cell, -1}};
    mesh.cell_edges[inc[k].cell][inc[k].local] = e;
    mesh.cell_edge_signs[inc[k].cell][inc[k].local] = +1;
    if (end - k == 2) {
      edge.cells[1] = inc[k + 1].cell;
      mesh.cell_edges[inc[k + 1].cell][inc[k + 1].local] = e;
      mesh.cell_edge_signs[inc[k + 1].cell][inc[k + 1].local] = -1;
    }
    mesh.edges.push_back(edge);
    k = end;
  }
  apply_boundary_config(mesh, bc);
  return mesh;
}

void apply_boundary_config(TriMesh& mesh, const BoundaryConfig& bc) {
  mesh.edge_tags.assign(mesh.edges.size(), BoundaryTag::Dirichlet);
  for (Index k = 0; k < mesh.num_edges(); ++k) {
    const auto& e = mesh.edges[k];
    if (!e.on_boundary()) continue;
    const Point& p = mesh.vertices[e.vertices[0]];
    const Point& q = mesh.vertices[e.vertices[1]];
    for (const auto& seg : bc.neumann) {
      if (on_segment(p, seg) && on_segment(q, seg)) {
        mesh.edge_tags[k] = BoundaryTag::Neumann;
        break;
      }
    }
  }
}

TriMesh generate_square(SquareFamily family, int n, std::uint64_t seed) {
  if (n < 1) throw InputError(fmt::format("square mesh needs N >= 1 (got {})", n));
  if (family == SquareFamily::Nonuniform && n < 2)
    throw InputError("Nonuniform square mesh needs N >= 2");
  const Split split = family == SquareFamily::Crossed ? Split::Crossed : Split::RightDiagonal;
  GridMesh g = grid_mesh(n, false, split);
  g.mesh.family = family == SquareFamily::Right     ? MeshFamily::SquareRight
                  : family == SquareFamily::Crossed ? MeshFamily::SquareCrossed
                                                    : MeshFamily::SquareNonuniform;
  g.mesh = build_topology(std::move(g.mesh));
  if (family == SquareFamily::Nonuniform) perturb_interior(g, n, seed);
  return std::move(g.mesh);
}

TriMesh generate_lshape(LshapeFamily family, int n, std::uint64_t seed) {
  if (n < 2 || n % 2 != 0)
    throw InputError(fmt::format("L-shape mesh needs an even N >= 2 (got {})", n));
  const Split split = family == LshapeFamily::Uniform ? Split::Crossed : Split::LeftDiagonal;
  GridMesh g = grid_mesh(n, true, split);
  g.mesh.family = family == LshapeFamily::Left      ? MeshFamily::LshapeLeft
                  : family == LshapeFamily::Uniform ? MeshFamily::LshapeUniform
                                                    : MeshFamily::LshapeNonuniform;
  g.mesh = build_topology(std::move(g.mesh));
  if (family == LshapeFamily::Nonuniform) perturb_interior(g, n, seed);
  return std::move(g.mesh);
}

TriMesh generate_mesh(MeshFamily family, int n, std::uint64_t seed) {
  switch (family) {
    case MeshFamily::SquareRight: return generate_square(SquareFamily::Right, n, seed);
    case MeshFamily::SquareCrossed: return generate_square(SquareFamily::Crossed, n, seed);
    case MeshFamily::SquareNonuniform: return generate_square(SquareFamily::Nonuniform, n, seed);
    case MeshFamily::LshapeLeft: return generate_lshape(LshapeFamily::Left, n, seed);
    case MeshFamily::LshapeUniform: return generate_lshape(LshapeFamily::Uniform, n, seed);
    case MeshFamily::LshapeNonuniform: return generate_lshape(LshapeFamily::Nonuniform, n, seed);
  }
  throw InputError("unknown mesh family");
}

void write_mesh_text(std::ostream& out, const TriMesh& mesh) {
  fmt::print(out, "{} {} {}\n", mesh.num_vertices(), mesh.num_cells(), mesh.num_edges());
  for (const auto& p : mesh.vertices) fmt::print(out, "{:.17g} {:.17g}\n", p.x(), p.y());
  for (const auto& c : mesh.cells) fmt::print(out, "{} {} {}\n", c[0], c[1], c[2]);
}

TriMesh read_mesh_text(std::istream& in) {
  Index nv = 0, nt = 0, ne = 0;
  if (!(in >> nv >> nt >> ne) || nv <= 0 || nt <= 0)
    throw InputError("mesh text: malformed header");
  TriMesh mesh;
  mesh.vertices.resize(nv);
  mesh.cells.resize(nt);
  for (auto& p : mesh.vertices)
    if (!(in >> p.x() >> p.y())) throw InputError("mesh text: truncated vertex list");
  for (auto& c : mesh.cells) {
    if (!(in >> c[0] >> c[1] >> c[2])) throw InputError("mesh text: truncated cell list");
    for (Index v : c)
      if (v < 0 || v >= nv) throw InputError("mesh text: vertex index out of range");
  }
  mesh = build_topology(std::move(mesh));
  if (mesh.num_edges() != ne) throw InputError("mesh text: edge count does not match header");
  return mesh;
}

void write_vtk(std::ostream& out, const TriMesh& mesh, const std::vector<VtkField>& fields) {
  fmt::print(out, "# vtk DataFile Version 3.0\nlsfem {} N={}\nASCII\nDATASET UNSTRUCTURED_GRID\n",
             to_string(mesh.family), mesh.n_per_side);
  fmt::print(out, "POINTS {} double\n", mesh.num_vertices());
  for (const auto& p : mesh.vertices) fmt::print(out, "{:.17g} {:.17g} 0\n", p.x(), p.y());
  fmt::print(out, "CELLS {} {}\n", mesh.num_cells(), 4 * mesh.num_cells());
  for (const auto& c : mesh.cells) fmt::print(out, "3 {} {} {}\n", c[0], c[1], c[2]);
  fmt::print(out, "CELL_TYPES {}\n", mesh.num_cells());
  for (Index c = 0; c < mesh.num_cells(); ++c) out << "5\n";

  auto emit = [&](bool point_data) {
    bool header = false;
    for (const auto& f : fields) {
      if (f.point_data != point_data) continue;
      const Index count = point_data ? mesh.num_vertices() : mesh.num_cells();
      if (static_cast<Index>(f.values.size()) != count * f.components)
        throw InputError(fmt::format("VTK field '{}' has the wrong length", f.name));
      if (!header) {
        fmt::print(out, "{} {}\n", point_data ? "POINT_DATA" : "CELL_DATA", count);
        header = true;
      }
      if (f.components == 1)
        fmt::print(out, "SCALARS {} double 1\nLOOKUP_TABLE default\n", f.name);
      else
        fmt::print(out, "VECTORS {} double\n", f.name);
      for (Index k = 0; k < count; ++k) {
        for (int c = 0; c < f.components; ++c)
          fmt::print(out, c ? " {:.17g}" : "{:.17g}", f.values[k * f.components + c]);
        out << '\n';
      }
    }
  };
  emit(true);
  emit(false);
}

}  // namespace lsfem

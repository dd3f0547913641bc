#include "lsfem/dof.hpp"

#include <fmt/format.h>

#include <cmath>

namespace lsfem {

ElasticParams::ElasticParams(double mu, double lambda) : mu_(mu), lambda_(lambda) {
  if (!(mu > 0) || !std::isfinite(mu)) throw InputError(fmt::format("mu must be > 0 (got {})", mu));
  if (!(lambda > 0) || !std::isfinite(lambda))
    throw InputError(fmt::format("lambda must be finite and > 0 (got {})", lambda));
}

DofMap::DofMap(const TriMesh& mesh, bool mean_constraints)
    : n_cells_(mesh.num_cells()), mean_constraints_(mean_constraints), has_neumann_(mesh.has_neumann()) {
  if (mesh.edges.empty() || mesh.edge_tags.size() != mesh.edges.size())
    throw InputError("build_dofmap: mesh topology has not been built");
  if (mean_constraints && has_neumann_)
    throw InputError("mean-value constraints apply only when the whole boundary is Dirichlet");

  edge_slot_.assign(mesh.edges.size(), -1);
  for (Index e = 0; e < mesh.num_edges(); ++e) {
    const bool neumann = mesh.edges[e].on_boundary() && mesh.edge_tags[e] == BoundaryTag::Neumann;
    if (!neumann) edge_slot_[e] = n_stress_edges_++;
  }

  const auto clamped = mesh.dirichlet_vertices();
  vertex_slot_.assign(mesh.vertices.size(), -1);
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    if (clamped[v]) continue;
    vertex_slot_[v] = n_free_vertices_++;
    free_vertices_.push_back(v);
  }
  if (n_free_vertices_ == 0) throw InputError("empty displacement space: every vertex is clamped");
}

Index DofMap::stress_index(int row, Index edge) const {
  const Index slot = edge_slot_[edge];
  return slot < 0 ? -1 : row * n_stress_edges_ + slot;
}

Index DofMap::disp_local(int component, Index vertex) const {
  const Index slot = vertex_slot_[vertex];
  return slot < 0 ? -1 : component * n_free_vertices_ + slot;
}

Index DofMap::disp_index(int component, Index vertex) const {
  const Index local = disp_local(component, vertex);
  return local < 0 ? -1 : disp_offset() + local;
}

Index DofMap::rot_index(Index cell) const { return rot_offset() + cell; }

DofMap build_dofmap(const TriMesh& mesh, bool mean_constraints) {
  return DofMap(mesh, mean_constraints);
}

Rt0CellBasis rt0_basis_on_cell(const TriMesh& mesh, Index cell) {
  if (cell < 0 || cell >= mesh.num_cells()) throw InputError("rt0_basis_on_cell: bad cell index");
  const auto& c = mesh.cells[cell];
  const double area = mesh.signed_area(cell);
  Rt0CellBasis basis;
  for (int k = 0; k < 3; ++k) {
    const Point& a = mesh.vertices[c[(k + 1) % 3]];
    const Point& b = mesh.vertices[c[(k + 2) % 3]];
    basis.anchor[k] = mesh.vertices[c[k]];
    basis.scale[k] = mesh.cell_edge_signs[cell][k] * (b - a).norm() / (2.0 * area);
  }
  return basis;
}

Eigen::Vector3d P1CellBasis::barycentric(const Point& x) const {
  Eigen::Vector3d l;
  for (int k = 0; k < 3; ++k) l[k] = gradient[k].dot(x - vertex[(k + 1) % 3]);
  return l;
}

P1CellBasis p1_basis_on_cell(const TriMesh& mesh, Index cell) {
  const auto& c = mesh.cells[cell];
  P1CellBasis basis;
  basis.area = mesh.signed_area(cell);
  for (int k = 0; k < 3; ++k) basis.vertex[k] = mesh.vertices[c[k]];
  for (int k = 0; k < 3; ++k) {
    // grad lambda_k = rot90(opposite edge) / (2|K|), pointing toward vertex k
    const Point d = basis.vertex[(k + 2) % 3] - basis.vertex[(k + 1) % 3];
    basis.gradient[k] = Eigen::Vector2d(-d.y(), d.x()) / (2.0 * basis.area);
  }
  return basis;
}

TriangleRule midpoint_rule(const TriMesh& mesh, Index cell) {
  const auto& c = mesh.cells[cell];
  TriangleRule rule;
  for (int k = 0; k < 3; ++k)
    rule.points[k] = 0.5 * (mesh.vertices[c[(k + 1) % 3]] + mesh.vertices[c[(k + 2) % 3]]);
  rule.weight = mesh.signed_area(cell) / 3.0;
  return rule;
}

}  // namespace lsfem

#pragma once

#include "lsfem/common.hpp"
#include "lsfem/mesh.hpp"

#include <array>
#include <vector>

namespace lsfem {

/// Lamé parameters of an isotropic material in two dimensions.
class ElasticParams {
 public:
  static constexpr int dim = 2;

  ElasticParams() = default;
  ElasticParams(double mu, double lambda);

  double mu() const { return mu_; }
  double lambda() const { return lambda_; }

 private:
  double mu_ = 1.0;
  double lambda_ = 1.0;
};

/// Global unknown layout: stress (RT0, two tensor rows), then displacement
/// (vector P1 at free vertices), then rotation (P0 per cell).
///
/// Stress DOFs on Neumann edges are constrained to zero and dropped;
/// displacement DOFs at Dirichlet vertices are dropped.
class DofMap {
 public:
  DofMap(const TriMesh& mesh, bool mean_constraints);

  Index n_stress() const { return 2 * n_stress_edges_; }
  Index n_disp() const { return 2 * n_free_vertices_; }
  Index n_rot() const { return n_cells_; }
  Index total() const { return n_stress() + n_disp() + n_rot(); }

  Index disp_offset() const { return n_stress(); }
  Index rot_offset() const { return n_stress() + n_disp(); }

  /// Global index or -1 when the edge carries no stress unknown.
  Index stress_index(int row, Index edge) const;
  /// Global index or -1 when the vertex is clamped.
  Index disp_index(int component, Index vertex) const;
  Index rot_index(Index cell) const;

  /// Block-local variants, as used inside BlockSystem.
  Index stress_local(int row, Index edge) const { return stress_index(row, edge); }
  Index disp_local(int component, Index vertex) const;
  Index rot_local(Index cell) const { return cell; }

  const std::vector<Index>& free_vertices() const { return free_vertices_; }
  Index num_edges() const { return static_cast<Index>(edge_slot_.size()); }
  Index num_vertices() const { return static_cast<Index>(vertex_slot_.size()); }
  Index num_cells() const { return n_cells_; }

  /// Zero-mean constraints on tr(stress) and rotation (pure Dirichlet only).
  bool mean_constraints() const { return mean_constraints_; }
  bool has_neumann() const { return has_neumann_; }

 private:
  std::vector<Index> edge_slot_;
  std::vector<Index> vertex_slot_;
  std::vector<Index> free_vertices_;
  Index n_stress_edges_ = 0;
  Index n_free_vertices_ = 0;
  Index n_cells_ = 0;
  bool mean_constraints_ = false;
  bool has_neumann_ = false;
};

DofMap build_dofmap(const TriMesh& mesh, bool mean_constraints = false);

/// Lowest-order Raviart-Thomas basis on one cell,
///   phi_k(x) = s_k |e_k| / (2|K|) (x - p_k),
/// with p_k the vertex opposite local edge k and s_k the global orientation
/// sign. The normal component of phi_k is 1 on edge k (global normal) and 0
/// on the other two edges.
struct Rt0CellBasis {
  std::array<double, 3> scale{};
  std::array<Point, 3> anchor;

  Eigen::Vector2d value(int k, const Point& x) const { return scale[k] * (x - anchor[k]); }
  double divergence(int k) const { return 2.0 * scale[k]; }
};

Rt0CellBasis rt0_basis_on_cell(const TriMesh& mesh, Index cell);

/// Linear nodal basis on one cell.
struct P1CellBasis {
  std::array<Point, 3> vertex;
  std::array<Eigen::Vector2d, 3> gradient;
  double area = 0;

  Eigen::Vector3d barycentric(const Point& x) const;
};

P1CellBasis p1_basis_on_cell(const TriMesh& mesh, Index cell);

/// Degree-2 exact rule on a triangle: the three edge midpoints, equal weights.
struct TriangleRule {
  std::array<Point, 3> points;
  double weight = 0;  // per point
};

TriangleRule midpoint_rule(const TriMesh& mesh, Index cell);

}  // namespace lsfem

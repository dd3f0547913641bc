#pragma once

#include "lsfem/common.hpp"
#include "lsfem/dof.hpp"
#include "lsfem/mesh.hpp"

#include <span>
#include <string>
#include <vector>

namespace lsfem {

/// Smallest eigenvalues of the primal elasticity problem
///   (2 mu eps(u), eps(v)) + (lambda div u, div v) = gamma (u, v)
/// with continuous vector P2 elements on a crossed mesh (Crossed on the
/// square, Uniform on the L-shape), clamped on the whole boundary.
///
/// Conforming, so every value is an upper bound that decreases under nested
/// refinement. Suffers from volumetric locking once lambda >> mu; treat
/// values at lambda >= 1e4 as unreliable.
std::vector<double> primal_oracle(Domain domain, int n, const ElasticParams& params, int n_eigs);

/// P2 element matrices on one cell; node order: 3 vertices, then the
/// midpoints of local edges 0..2 (edge k opposite vertex k). Local DOF index
/// 6*component + node.
struct P2Element {
  Eigen::Matrix<double, 12, 12> stiffness;
  Eigen::Matrix<double, 12, 12> mass;
};

P2Element p2_element(const TriMesh& mesh, Index cell, const ElasticParams& params);

/// Reference eigenvalue with uncertainty and provenance.
struct ReferenceEigen {
  Domain domain = Domain::Square;
  double lambda = 1;
  double mu = 1;
  int index = 1;  // 1-based position in the sorted spectrum
  double value = 0;
  double uncertainty = 0;
  double observed_order = 0;
  std::vector<int> levels;
  std::vector<double> level_values;
  std::string provenance;
  bool reliable = true;
};

/// Richardson extrapolation from three levels with ratio 2 and the observed
/// order p = log2((g1 - g2) / (g2 - g3)). The uncertainty is the size of the
/// extrapolation correction. Non-monotone data falls back to the finest value
/// with |g2 - g3| as uncertainty.
ReferenceEigen richardson_reference(std::span<const int> levels, std::span<const double> values);

}  // namespace lsfem

#pragma once

#include "lsfem/common.hpp"
#include "lsfem/dof.hpp"
#include "lsfem/mesh.hpp"

#include <Eigen/Dense>

#include <iosfwd>

namespace lsfem {

using Tensor2 = Eigen::Matrix2d;
using ElementMatrix = Eigen::Matrix<double, 6, 6>;
using ElementRow = Eigen::Matrix<double, 1, 6>;

/// (1/(2 mu)) (tau - lambda/(2 lambda + 2 mu) tr(tau) I)
Tensor2 compliance_apply(const Tensor2& tau, const ElasticParams& params);

/// Scalar skew coordinate s(tau) = tau_21 - tau_12; (as sigma, as tau) = s(sigma) s(tau) / 2.
inline double skew_coordinate(const Tensor2& t) { return t(1, 0) - t(0, 1); }

/// Element matrices of one cell. Local stress index 3*row + edge, local
/// displacement index 3*component + vertex.
struct LocalBlocks {
  ElementMatrix A;  // stress x stress
  ElementMatrix B;  // disp x stress:   -(A sigma, grad v)
  ElementRow C;     // rot x stress:    (A sigma, chi phi)
  ElementMatrix D;  // disp x disp:     (grad u, grad v)
  ElementRow E;     // rot x disp:      -(grad u, chi phi)
  double F = 0;     // rot x rot:       (chi psi, chi phi) = 2 psi phi
  ElementMatrix G;  // stress x disp:   -(u, div tau)
};

/// The three pieces of the stress-stress block, kept apart for verification.
struct StressTerms {
  ElementMatrix compliance;  // (A sigma, A tau)
  ElementMatrix divergence;  // (div sigma, div tau)
  ElementMatrix skew;        // (as sigma, as tau)
};

StressTerms local_stress_terms(const TriMesh& mesh, Index cell, const ElasticParams& params);
LocalBlocks local_blocks(const TriMesh& mesh, Index cell, const ElasticParams& params);

/// The seven sparse blocks of the three-field least-squares eigenproblem
///
///   [A B^t C^t] [sigma]         [0 G 0] [sigma]
///   [B D   E^t] [u    ] = gamma [0 0 0] [u    ]
///   [C E   F  ] [psi  ]         [0 0 0] [psi  ]
struct BlockSystem {
  SparseMatrix A, B, C, D, E, F, G;
  ElasticParams params;

  // Integrals of tr(tau) per stress basis function and of each rotation
  // basis function; used by the optional zero-mean constraints.
  Eigen::VectorXd trace_moments;
  Eigen::VectorXd rotation_moments;
  bool mean_constraints = false;

  Index n_stress() const { return A.rows(); }
  Index n_disp() const { return D.rows(); }
  Index n_rot() const { return F.rows(); }
};

BlockSystem assemble_blocks(const TriMesh& mesh, const DofMap& dofmap, const ElasticParams& params,
                            int threads = 1);

/// Full block pencil (LHS, RHS). With mean constraints enabled, two
/// multiplier rows/columns are appended (both zero on the right-hand side).
struct FullPencil {
  SparseMatrix lhs;
  SparseMatrix rhs;
};

FullPencil assemble_full_pencil(const BlockSystem& blocks);

/// "%%MatrixMarket matrix coordinate real general"
void write_matrix_market(std::ostream& out, const SparseMatrix& m);
void write_matrix_market(std::ostream& out, const Eigen::MatrixXd& m);

}  // namespace lsfem

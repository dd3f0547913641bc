#pragma once

#include "lsfem/assemble.hpp"
#include "lsfem/common.hpp"

#include <Eigen/Dense>

#include <complex>
#include <memory>
#include <string>

namespace lsfem {

/// Blocks left after eliminating the rotation,
///   At = A - C^t F^-1 C,   Bt = B^t - C^t F^-1 E,
///   Ct = B - E^t F^-1 C,   Dt = D - E^t F^-1 E.
/// With the zero-mean constraints, F^-1 is replaced by the constrained
/// inverse W = F^-1 - q q^t / rho (q = F^-1 m, rho = m^t q), which adds the
/// rank-one terms w w^t / rho, w e^t / rho, e w^t / rho, e e^t / rho with
/// w = C^t q, e = E^t q. They are kept as vectors, not merged.
struct TildeMatrices {
  SparseMatrix A;  // n_stress x n_stress
  SparseMatrix B;  // n_stress x n_disp
  SparseMatrix C;  // n_disp x n_stress
  SparseMatrix D;  // n_disp x n_disp
  Eigen::VectorXd f_inv;

  bool mean_constraints = false;
  Eigen::VectorXd q, w, e, trace;
  double rho = 1.0;

  Index n_stress() const { return A.rows(); }
  Index n_disp() const { return D.rows(); }

  /// W x for a rotation-space vector.
  Eigen::VectorXd apply_rotation_inverse(const Eigen::VectorXd& x) const;
};

TildeMatrices eliminate_rotation(const BlockSystem& blocks);

/// Factorization of At (bordered by the trace constraint when enabled).
/// Cholesky first; a pivoted LU takes over when Cholesky breaks down.
class StressSolver {
 public:
  explicit StressSolver(const TildeMatrices& tilde);
  ~StressSolver();
  StressSolver(const StressSolver&) = delete;
  StressSolver& operator=(const StressSolver&) = delete;

  /// Solves At X = R (columns of R live in stress space). Thread-safe.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

  /// "cholesky", "lu (cholesky failed at pivot k)" or "lu (bordered)".
  const std::string& kind() const { return kind_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string kind_;
  Index n_ = 0;
  bool bordered_ = false;
};

struct SchurPencil {
  Eigen::MatrixXd M;  // Ct At^-1 Bt - Dt
  Eigen::MatrixXd N;  // Ct At^-1 G
  std::shared_ptr<const TildeMatrices> tilde;
  std::shared_ptr<const StressSolver> solver;
  SparseMatrix G;

  Index size() const { return M.rows(); }
};

/// Dense pencil (M, N), built block-column by block-column against one
/// shared factorization. Columns may be split across threads; each column is
/// computed identically regardless of the split.
SchurPencil build_schur_pencil(std::shared_ptr<const TildeMatrices> tilde, const SparseMatrix& G,
                               int threads = 1);
SchurPencil build_schur_pencil(const BlockSystem& blocks, int threads = 1);

struct RecoveredFields {
  Eigen::VectorXcd sigma;
  Eigen::VectorXcd u;
  Eigen::VectorXcd psi;
  // Relative residuals of the three block rows (row 1 scaled by |gamma| |G u|).
  std::array<double, 3> residual{};
};

/// Back-substitution: At sigma = gamma G u - Bt u, psi = -W (C sigma + E u).
RecoveredFields recover_fields(const BlockSystem& blocks, const SchurPencil& pencil,
                               std::complex<double> gamma, const Eigen::VectorXcd& u_hat);

/// Rough 2-norm condition estimate of At by power / inverse power iteration.
double estimate_condition(const TildeMatrices& tilde, const StressSolver& solver, int iterations = 30);

}  // namespace lsfem

#pragma once

#include "lsfem/common.hpp"
#include "lsfem/reduce.hpp"

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace lsfem {

using Complex = std::complex<double>;

enum class PencilMethod {
  Qz,         // LAPACK dggev on (M, N)
  Reduction,  // -M = L L^t, eigenvalues of L^-1 N L^-t, gamma = -1/kappa
  Auto,       // Qz up to kAutoQzLimit unknowns, Reduction above
};

inline constexpr Index kAutoQzLimit = 800;

struct SolveOptions {
  double filter_ratio = 1e10;
  PencilMethod method = PencilMethod::Qz;
  bool eigenvectors = false;
};

struct SpectrumMeta {
  std::string family;
  int n = 0;
  double lambda = 0;
  std::string bc_mode;
  std::string method;
  double beta_threshold = 0;
  double median_modulus = 0;
  Index n_beta_infinite = 0;
  Index n_outlier_infinite = 0;
};

/// Finite eigenvalues sorted by modulus, then imaginary part (negative
/// first); eigvecs columns are aligned with finite_eigs when requested.
struct Spectrum {
  std::vector<Complex> finite_eigs;
  Index n_infinite = 0;
  Eigen::MatrixXcd eigvecs;
  SpectrumMeta meta;

  Index size() const { return static_cast<Index>(finite_eigs.size()) + n_infinite; }
};

/// Total order used for every eigenvalue list.
bool modulus_order(const Complex& a, const Complex& b);

/// Generalized eigenvalues of M v = gamma N v. Modes with |beta| below
/// n * eps * ||N||_F, or with |gamma| above filter_ratio times the median
/// finite modulus, are counted as infinite.
Spectrum solve_pencil(const Eigen::MatrixXd& M, const Eigen::MatrixXd& N, const SolveOptions& options = {});
Spectrum solve_pencil(const SchurPencil& pencil, const SolveOptions& options = {});

/// The `count` smallest-modulus eigenvalues of (M, N), by subspace iteration
/// on L^-1 N L^-t where -M = L L^t. Requires M negative definite.
struct PartialSpectrum {
  std::vector<Complex> eigs;
  std::vector<double> residuals;  // ||M v - gamma N v|| / (||M|| ||v||)
  Eigen::MatrixXcd eigvecs;
  int iterations = 0;
};

PartialSpectrum smallest_eigenvalues(const Eigen::MatrixXd& M, const Eigen::MatrixXd& N, int count,
                                     double tolerance = 1e-11, int max_iterations = 2000);

/// Smallest-modulus eigenvalue that is real to |Im|/|gamma| < 1e-6. A
/// complex pair in the first position is an error, never resolved silently.
Complex first_eigenvalue(std::span<const Complex> sorted_eigs);

Index count_in_disk(std::span<const Complex> eigs, double radius);
inline Index count_in_disk(const Spectrum& s, double radius) { return count_in_disk(s.finite_eigs, radius); }

/// Largest relative distance between conj(gamma) and its nearest partner,
/// over the eigenvalues with a non-negligible imaginary part.
double conjugate_pairing_defect(std::span<const Complex> eigs, double real_tolerance = 1e-10);

/// max_i ||M v_i - gamma_i N v_i|| / (||M|| ||v_i||)
double max_eigenpair_residual(const Eigen::MatrixXd& M, const Eigen::MatrixXd& N,
                              std::span<const Complex> eigs, const Eigen::MatrixXcd& vecs);

/// Normwise backward error,
///   max_i ||M v_i - gamma_i N v_i|| / ((||M|| + |gamma_i| ||N||) ||v_i||).
double max_backward_error(const Eigen::MatrixXd& M, const Eigen::MatrixXd& N, std::span<const Complex> eigs,
                          const Eigen::MatrixXcd& vecs);

struct ErrorSample {
  double h;
  double err;
};

struct RateEstimate {
  double slope = 0;                 // least-squares slope of log(err) vs log(h)
  std::vector<double> pairwise;     // between consecutive retained samples
  std::vector<std::string> warnings;
  std::vector<ErrorSample> used;
};

RateEstimate estimate_rate(std::span<const ErrorSample> samples);

}  // namespace lsfem

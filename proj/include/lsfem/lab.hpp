#pragma once

#include "lsfem/assemble.hpp"
#include "lsfem/config.hpp"
#include "lsfem/dof.hpp"
#include "lsfem/mesh.hpp"
#include "lsfem/oracle.hpp"
#include "lsfem/reduce.hpp"
#include "lsfem/spectrum.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lsfem {

/// mesh -> dofmap -> blocks -> Schur pencil for one (family, N, lambda).
struct Pipeline {
  TriMesh mesh;
  DofMap dofs;
  BlockSystem blocks;
  SchurPencil pencil;
};

Pipeline run_pipeline(MeshFamily family, int n, const ElasticParams& params, const BoundaryConfig& bc = {},
                      bool mean_constraints = false, std::uint64_t seed = 0, int threads = 1);

/// Runs job(0..count-1) on up to `threads` workers. Every job runs even if
/// another one throws; the exception of the lowest failing index is
/// rethrown afterwards.
void parallel_jobs(int count, int threads, const std::function<void(int)>& job);

// ---------------------------------------------------------------------------
// Reference eigenvalues

struct ReferenceTable {
  std::vector<ReferenceEigen> entries;

  /// Matching entry (lambda and mu compared to 1e-12 relative) or nullptr.
  const ReferenceEigen* find(Domain domain, double lambda, double mu, int index = 1) const;
};

ReferenceTable read_reference_table(const std::filesystem::path& path);
void write_reference_table(const std::filesystem::path& path, const ReferenceTable& table);

/// Oracle levels n_list (three doubling values) for every lambda; results
/// are merged into <out>/reference_eigenvalues.json, replacing entries with
/// the same (domain, lambda, mu).
ReferenceTable run_oracle(const ExperimentConfig& config, int threads = 1);

// ---------------------------------------------------------------------------
// Experiments. Each writes its files under config.out.

/// Writes mesh_N<n>.txt, mesh_N<n>.vtk and mesh.json.
void run_mesh_export(const ExperimentConfig& config);

struct ConvergenceRow {
  int n = 0;
  double h = 0;
  Complex gamma1;
  double err = 0;
  std::optional<double> rate;  // against the previous row
  Index n_disp = 0;
  std::string solver;
  double residual = 0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::optional<double> rate;  // least squares over all rows
  ReferenceEigen reference;
  std::vector<std::string> warnings;
  bool complete = true;
  std::string failure;
};

/// First-eigenvalue convergence for the single lambda of the config. Writes
/// report.json, report.csv and rate.svg; a failing N leaves the rows before
/// it on disk, marked incomplete, and the error is rethrown.
ConvergenceReport run_convergence(const ExperimentConfig& config, int threads = 1);

struct SpectrumRun {
  int n = 0;
  double lambda = 0;
  Index n_disp = 0;
  std::string solver;
  Spectrum spectrum;
  double m_symmetry = 0;
  double pairing_defect = 0;
};

/// Full spectra for every (N, lambda): spectrum_N<n>_lam<lambda>.csv and
/// solve.json.
std::vector<SpectrumRun> run_solve(const ExperimentConfig& config, int threads = 1);

/// run_solve plus spread.json and scatter plots: spread_lam<lambda>.svg
/// (auto-scaled) and spread_lam<lambda>_fixed.svg (axes shared across lambda).
std::vector<SpectrumRun> run_spread(const ExperimentConfig& config, int threads = 1);

struct EigenfunctionRun {
  int n = 0;
  double lambda = 0;
  Complex gamma;
  bool complex_mode = false;
  RecoveredFields fields;
  Eigen::MatrixXcd vertex_displacement;  // num_vertices x 2, clamped rows zero
  std::vector<std::string> warnings;
};

/// Scales u, sigma and psi so that max_x |u(x)| = 1 and the largest-magnitude
/// displacement component is positive real. Returns the complex factor.
Complex normalize_eigenfunction(RecoveredFields& fields, Eigen::MatrixXcd& vertex_displacement);

/// Eigenfunction `config.which` for every (N, lambda): eigen_N<n>_lam<lambda>.vtk,
/// eigen_N<n>_lam<lambda>.csv and eigenfunction.json.
std::vector<EigenfunctionRun> run_eigenfunction(const ExperimentConfig& config, int threads = 1);

/// "1", "100", "1e+08": the lambda tag used in file names.
std::string lambda_tag(double lambda);

}  // namespace lsfem

#pragma once

#include "lsfem/mesh.hpp"
#include "lsfem/spectrum.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lsfem {

/// One experiment: a mesh family swept over N and lambda.
///
/// File format: one `key = value` per line, `#` comments, strings in double
/// quotes, lists in brackets. Relative `reference_file` paths resolve against
/// the config file's directory; `out` resolves against the working directory.
struct ExperimentConfig {
  Domain domain = Domain::Square;
  MeshFamily family = MeshFamily::SquareRight;
  std::vector<int> n_list{4, 8, 16, 32};
  std::vector<double> lambda_list{1.0};
  double mu = 1.0;
  BoundaryConfig bc;
  bool mean_constraints = false;
  std::uint64_t seed = 0;
  double filter_ratio = 1e10;
  int n_eigs_report = 10;
  int which = 1;  // eigenfunction index, 1-based
  PencilMethod method = PencilMethod::Auto;
  std::filesystem::path out = "out";
  std::filesystem::path reference_file;

  /// Throws InputError on a violated invariant.
  void validate() const;
};

/// Parses config text. `base_dir` anchors relative reference paths.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

/// Reads and parses a config file; a missing file is an InputError.
ExperimentConfig load_config(const std::filesystem::path& path);

std::string_view to_string(PencilMethod method);
PencilMethod parse_method(std::string_view name);

}  // namespace lsfem

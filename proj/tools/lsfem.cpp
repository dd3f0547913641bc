// Command-line driver: mesh, solve, converge, spread, eigenfunction, oracle.

#include "lsfem/config.hpp"
#include "lsfem/lab.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

struct Globals {
  std::string config;
  std::string out;
  int threads = 1;
  std::optional<std::uint64_t> seed;
};

lsfem::ExperimentConfig load(const Globals& g) {
  if (g.config.empty()) throw lsfem::InputError("--config is required");
  lsfem::ExperimentConfig c = lsfem::load_config(g.config);
  if (!g.out.empty()) c.out = g.out;
  if (g.seed) c.seed = *g.seed;
  return c;
}

void summarize_spectra(const std::vector<lsfem::SpectrumRun>& runs) {
  for (const auto& r : runs) {
    const auto& s = r.spectrum;
    std::cout << fmt::format("N={} lambda={} n_disp={} finite={} infinite={}", r.n, lsfem::lambda_tag(r.lambda),
                             r.n_disp, s.finite_eigs.size(), s.n_infinite);
    if (!s.finite_eigs.empty())
      std::cout << fmt::format(" gamma1={:.10g}{:+.3g}i", s.finite_eigs[0].real(), s.finite_eigs[0].imag() + 0.0);
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Least-squares FEM eigenvalue laboratory for three-field linear elasticity"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "experiment config file")->option_text("PATH");
  app.add_option("--out", g.out, "output directory (overrides the config)")->option_text("DIR");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "mesh perturbation seed (overrides the config)");

  auto* mesh = app.add_subcommand("mesh", "export meshes for every N");
  auto* solve = app.add_subcommand("solve", "full spectra for every (N, lambda)");
  std::optional<int> solve_n;
  solve->add_option("--n", solve_n, "single N instead of the config's n_list")->check(CLI::PositiveNumber);
  auto* converge = app.add_subcommand("converge", "first-eigenvalue convergence study");
  auto* spread = app.add_subcommand("spread", "spectrum spread sweep with scatter plots");
  auto* eigen = app.add_subcommand("eigenfunction", "recover and export an eigenfunction");
  std::optional<int> which;
  eigen->add_option("--which", which, "1-based eigenvalue index")->check(CLI::PositiveNumber);
  auto* oracle = app.add_subcommand("oracle", "primal P2 reference eigenvalues");

  // Global flags may follow the subcommand too.
  for (auto* sub : {mesh, solve, converge, spread, eigen, oracle}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    lsfem::ExperimentConfig c = load(g);
    if (*mesh) {
      lsfem::run_mesh_export(c);
    } else if (*solve) {
      if (solve_n) {
        c.n_list = {*solve_n};
        c.validate();
      }
      summarize_spectra(lsfem::run_solve(c, g.threads));
    } else if (*converge) {
      const auto report = lsfem::run_convergence(c, g.threads);
      for (const auto& r : report.rows)
        std::cout << fmt::format("N={} gamma1={:.12g} err={:.4e}{}\n", r.n, r.gamma1.real(), r.err,
                                 r.rate ? fmt::format(" rate={:.3f}", *r.rate) : "");
      if (report.rate) std::cout << fmt::format("overall rate {:.4f}\n", *report.rate);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    } else if (*spread) {
      summarize_spectra(lsfem::run_spread(c, g.threads));
    } else if (*eigen) {
      if (which) {
        c.which = *which;
        c.validate();
      }
      for (const auto& r : lsfem::run_eigenfunction(c, g.threads))
        std::cout << fmt::format("N={} lambda={} gamma={:.12g}{:+.3g}i{}\n", r.n, lsfem::lambda_tag(r.lambda),
                                 r.gamma.real(), r.gamma.imag() + 0.0, r.complex_mode ? " (complex)" : "");
    } else if (*oracle) {
      const auto table = lsfem::run_oracle(c, g.threads);
      for (const auto& r : table.entries)
        if (r.domain == c.domain && r.index <= 3)
          std::cout << fmt::format("{} lambda={} #{}: {:.12g} +/- {:.2e}\n", lsfem::to_string(r.domain),
                                   lsfem::lambda_tag(r.lambda), r.index, r.value, r.uncertainty);
    }
    std::cout << "output: " << c.out.string() << "\n";
    return 0;
  } catch (const lsfem::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const lsfem::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

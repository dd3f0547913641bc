#include "lsfem/lab.hpp"

#include "lsfem/svg.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace lsfem {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kComplexTolerance = 1e-6;

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw InputError(fmt::format("write failed for '{}'", path.string()));
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string spectrum_csv(const std::vector<Complex>& eigs) {
  std::string out = "re,im\n";
  for (const Complex& g : eigs) out += fmt::format("{:.17g},{:.17g}\n", g.real(), g.imag() == 0.0 ? 0.0 : g.imag());
  return out;
}

json complex_json(const Complex& g) { return json::array({g.real(), g.imag() == 0.0 ? 0.0 : g.imag()}); }

json config_json(const ExperimentConfig& c) {
  return json{{"domain", to_string(c.domain)},
              {"family", to_string(c.family)},
              {"n_list", c.n_list},
              {"lambda_list", c.lambda_list},
              {"mu", c.mu},
              {"bc", c.bc.to_string()},
              {"mean_constraints", c.mean_constraints},
              {"seed", c.seed},
              {"filter_ratio", c.filter_ratio},
              {"method", to_string(c.method)}};
}

json reference_json(const ReferenceEigen& r) {
  return json{{"domain", to_string(r.domain)},
              {"lambda", r.lambda},
              {"mu", r.mu},
              {"index", r.index},
              {"value", r.value},
              {"uncertainty", r.uncertainty},
              {"observed_order", r.observed_order},
              {"levels", r.levels},
              {"level_values", r.level_values},
              {"provenance", r.provenance},
              {"reliable", r.reliable}};
}

bool same_value(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

SolveOptions solve_options(const ExperimentConfig& c, bool vectors) {
  SolveOptions o;
  o.filter_ratio = c.filter_ratio;
  o.method = c.method;
  o.eigenvectors = vectors;
  return o;
}

}  // namespace

std::string lambda_tag(double lambda) { return fmt::format("{:g}", lambda); }

Pipeline run_pipeline(MeshFamily family, int n, const ElasticParams& params, const BoundaryConfig& bc,
                      bool mean_constraints, std::uint64_t seed, int threads) {
  TriMesh mesh = generate_mesh(family, n, seed);
  if (!bc.all_dirichlet()) apply_boundary_config(mesh, bc);
  DofMap dofs = build_dofmap(mesh, mean_constraints);
  BlockSystem blocks = assemble_blocks(mesh, dofs, params, threads);
  SchurPencil pencil = build_schur_pencil(blocks, threads);
  return Pipeline{std::move(mesh), std::move(dofs), std::move(blocks), std::move(pencil)};
}

void parallel_jobs(int count, int threads, const std::function<void(int)>& job) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(count, 0)));
  auto guarded = [&](int i) {
    try {
      job(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const int workers = std::clamp(threads, 1, std::max(count, 1));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) guarded(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int i = next++; i < count; i = next++) guarded(i);
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------

const ReferenceEigen* ReferenceTable::find(Domain domain, double lambda, double mu, int index) const {
  for (const auto& r : entries)
    if (r.domain == domain && r.index == index && same_value(r.lambda, lambda) && same_value(r.mu, mu)) return &r;
  return nullptr;
}

ReferenceTable read_reference_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open reference file '{}'", path.string()));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(fmt::format("reference file '{}': {}", path.string(), e.what()));
  }
  ReferenceTable t;
  try {
    for (const auto& e : j.at("entries")) {
      ReferenceEigen r;
      r.domain = parse_domain(e.at("domain").get<std::string>());
      r.lambda = e.at("lambda").get<double>();
      r.mu = e.at("mu").get<double>();
      r.index = e.at("index").get<int>();
      r.value = e.at("value").get<double>();
      r.uncertainty = e.at("uncertainty").get<double>();
      r.observed_order = e.value("observed_order", 0.0);
      r.levels = e.value("levels", std::vector<int>{});
      r.level_values = e.value("level_values", std::vector<double>{});
      r.provenance = e.value("provenance", std::string{});
      r.reliable = e.value("reliable", true);
      t.entries.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw InputError(fmt::format("reference file '{}': {}", path.string(), e.what()));
  }
  return t;
}

void write_reference_table(const fs::path& path, const ReferenceTable& table) {
  std::vector<ReferenceEigen> sorted = table.entries;
  std::stable_sort(sorted.begin(), sorted.end(), [](const ReferenceEigen& a, const ReferenceEigen& b) {
    if (a.domain != b.domain) return a.domain < b.domain;
    if (a.mu != b.mu) return a.mu < b.mu;
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    return a.index < b.index;
  });
  json entries = json::array();
  for (const auto& r : sorted) entries.push_back(reference_json(r));
  write_json(path, json{{"generator", "lsfem oracle"},
                        {"oracle", "vector P2 primal elasticity, crossed meshes, clamped boundary, shift-invert "
                                   "subspace iteration"},
                        {"entries", entries}});
}

ReferenceTable run_oracle(const ExperimentConfig& c, int threads) {
  if (c.n_list.size() != 3) throw InputError("oracle: n_list must hold exactly three levels");
  if (c.n_list[1] != 2 * c.n_list[0] || c.n_list[2] != 2 * c.n_list[1])
    throw InputError("oracle: n_list levels must double");
  if (!c.bc.all_dirichlet()) throw InputError("oracle: only the fully clamped boundary is supported");

  const int nl = static_cast<int>(c.lambda_list.size());
  std::vector<std::vector<double>> values(static_cast<std::size_t>(3 * nl));
  parallel_jobs(3 * nl, threads, [&](int job) {
    const double lambda = c.lambda_list[job / 3];
    values[job] = primal_oracle(c.domain, c.n_list[job % 3], ElasticParams(c.mu, lambda), c.n_eigs_report);
  });

  std::vector<ReferenceEigen> fresh;
  for (int l = 0; l < nl; ++l) {
    const double lambda = c.lambda_list[l];
    for (int k = 0; k < c.n_eigs_report; ++k) {
      const double level_values[3] = {values[3 * l][k], values[3 * l + 1][k], values[3 * l + 2][k]};
      ReferenceEigen r = richardson_reference(c.n_list, level_values);
      r.domain = c.domain;
      r.lambda = lambda;
      r.mu = c.mu;
      r.index = k + 1;
      r.reliable = lambda < 1e4;
      if (!r.reliable) r.provenance += "; unreliable: volumetric locking at lambda >= 1e4";
      fresh.push_back(std::move(r));
    }
  }

  const fs::path path = c.out / "reference_eigenvalues.json";
  ReferenceTable table;
  if (fs::exists(path)) table = read_reference_table(path);
  std::erase_if(table.entries, [&](const ReferenceEigen& r) {
    return r.domain == c.domain && same_value(r.mu, c.mu) &&
           std::any_of(c.lambda_list.begin(), c.lambda_list.end(),
                       [&](double l) { return same_value(l, r.lambda); });
  });
  table.entries.insert(table.entries.end(), fresh.begin(), fresh.end());
  write_reference_table(path, table);
  return table;
}

// ---------------------------------------------------------------------------

void run_mesh_export(const ExperimentConfig& c) {
  json meshes = json::array();
  for (int n : c.n_list) {
    TriMesh mesh = generate_mesh(c.family, n, c.seed);
    if (!c.bc.all_dirichlet()) apply_boundary_config(mesh, c.bc);
    std::ostringstream txt, vtk;
    write_mesh_text(txt, mesh);
    write_vtk(vtk, mesh);
    write_text(c.out / fmt::format("mesh_N{}.txt", n), txt.str());
    write_text(c.out / fmt::format("mesh_N{}.vtk", n), vtk.str());
    Index boundary = 0;
    for (const auto& e : mesh.edges) boundary += e.on_boundary() ? 1 : 0;
    meshes.push_back(json{{"n", n},
                          {"vertices", mesh.num_vertices()},
                          {"cells", mesh.num_cells()},
                          {"edges", mesh.num_edges()},
                          {"boundary_edges", boundary},
                          {"area", mesh.total_area()}});
  }
  write_json(c.out / "mesh.json", json{{"config", config_json(c)}, {"meshes", meshes}});
}

ConvergenceReport run_convergence(const ExperimentConfig& c, int threads) {
  if (c.lambda_list.size() != 1) throw InputError("converge: lambda_list must hold exactly one value");
  const double lambda = c.lambda_list.front();
  if (c.reference_file.empty()) throw InputError("converge: no reference_file given; run the oracle first");
  const ReferenceTable table = read_reference_table(c.reference_file);
  const ReferenceEigen* ref = table.find(c.domain, lambda, c.mu, 1);
  if (!ref)
    throw InputError(fmt::format("converge: '{}' has no first eigenvalue for domain {}, lambda {}, mu {}",
                                 c.reference_file.string(), to_string(c.domain), lambda, c.mu));
  if (ref->provenance.empty())
    throw InputError("converge: reference entry carries no provenance; regenerate it with the oracle");

  ConvergenceReport report;
  report.reference = *ref;
  if (!ref->reliable) report.warnings.push_back("reference flagged unreliable: " + ref->provenance);

  const int count = static_cast<int>(c.n_list.size());
  const int inner = count > 1 && threads > 1 ? 1 : threads;
  std::vector<std::optional<ConvergenceRow>> rows(count);
  std::vector<std::string> errors(count);
  std::exception_ptr first_error;
  int first_failed = count;
  try {
    parallel_jobs(count, threads, [&](int i) {
      try {
        const int n = c.n_list[i];
        const Pipeline p =
            run_pipeline(c.family, n, ElasticParams(c.mu, lambda), c.bc, c.mean_constraints, c.seed, inner);
        const PartialSpectrum ps = smallest_eigenvalues(p.pencil.M, p.pencil.N, 3);
        ConvergenceRow row;
        row.n = n;
        row.h = 1.0 / n;
        row.gamma1 = first_eigenvalue(ps.eigs);
        row.err = std::abs(row.gamma1 - ref->value);
        row.n_disp = p.pencil.size();
        row.solver = p.pencil.solver->kind();
        row.residual = ps.residuals.front();
        rows[i] = row;
      } catch (const std::exception& e) {
        errors[i] = e.what();
        throw;
      }
    });
  } catch (...) {
    first_error = std::current_exception();
  }
  for (int i = 0; i < count; ++i)
    if (!rows[i]) {
      first_failed = i;
      break;
    }

  std::vector<ErrorSample> samples;
  for (int i = 0; i < first_failed; ++i) {
    ConvergenceRow row = *rows[i];
    if (i > 0 && row.err > 0 && rows[i - 1]->err > 0)
      row.rate = std::log(rows[i - 1]->err / row.err) / std::log(rows[i - 1]->h / row.h);
    samples.push_back({row.h, row.err});
    report.rows.push_back(row);
  }
  if (first_failed < count) {
    report.complete = false;
    report.failure = fmt::format("N={}: {}", c.n_list[first_failed], errors[first_failed]);
  }
  if (samples.size() >= 2) {
    try {
      const RateEstimate rate = estimate_rate(samples);
      report.rate = rate.slope;
      report.warnings.insert(report.warnings.end(), rate.warnings.begin(), rate.warnings.end());
    } catch (const InputError& e) {
      report.warnings.push_back(e.what());
    }
  }

  std::string csv = "N,h,gamma1,err,rate\n";
  json jrows = json::array();
  for (const auto& r : report.rows) {
    csv += fmt::format("{},{:.17g},{:.17g},{:.17g},{}\n", r.n, r.h, r.gamma1.real(), r.err,
                       r.rate ? fmt::format("{:.17g}", *r.rate) : "");
    jrows.push_back(json{{"N", r.n},
                         {"h", r.h},
                         {"gamma1", complex_json(r.gamma1)},
                         {"err", r.err},
                         {"rate", r.rate ? json(*r.rate) : json(nullptr)},
                         {"n_disp", r.n_disp},
                         {"stress_solver", r.solver},
                         {"eigenpair_residual", r.residual}});
  }
  write_text(c.out / "report.csv", csv);
  write_json(c.out / "report.json", json{{"config", config_json(c)},
                                         {"reference", reference_json(report.reference)},
                                         {"rows", jrows},
                                         {"rate", report.rate ? json(*report.rate) : json(nullptr)},
                                         {"complete", report.complete},
                                         {"failure", report.failure},
                                         {"warnings", report.warnings}});
  svg::Series s{fmt::format("{} lambda={}", to_string(c.family), lambda_tag(lambda)), {}};
  for (const auto& r : report.rows) s.points.emplace_back(r.h, r.err);
  std::vector<svg::Series> series{s};
  if (report.rows.size() >= 2) {
    // h^2 guide through the first point
    const auto& r0 = report.rows.front();
    svg::Series guide{"h^2", {}};
    for (const auto& r : report.rows) guide.points.emplace_back(r.h, r0.err * (r.h / r0.h) * (r.h / r0.h));
    series.push_back(guide);
  }
  write_text(c.out / "rate.svg",
             svg::loglog(series,
                         report.rate ? fmt::format("first eigenvalue error, rate {:.3f}", *report.rate)
                                     : std::string("first eigenvalue error"),
                         "h", "|gamma1 - gamma_ref|"));

  if (first_error) std::rethrow_exception(first_error);
  return report;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<SpectrumRun> solve_all(const ExperimentConfig& c, int threads, json& jruns) {
  const int nn = static_cast<int>(c.n_list.size()), nl = static_cast<int>(c.lambda_list.size());
  const int count = nn * nl;
  const int inner = count > 1 && threads > 1 ? 1 : threads;
  std::vector<SpectrumRun> runs(count);
  parallel_jobs(count, threads, [&](int job) {
    SpectrumRun& r = runs[job];
    r.n = c.n_list[job / nl];
    r.lambda = c.lambda_list[job % nl];
    const Pipeline p = run_pipeline(c.family, r.n, ElasticParams(c.mu, r.lambda), c.bc, c.mean_constraints,
                                    c.seed, inner);
    r.n_disp = p.pencil.size();
    r.solver = p.pencil.solver->kind();
    r.spectrum = solve_pencil(p.pencil, solve_options(c, false));
    r.spectrum.meta.family = std::string(to_string(c.family));
    r.spectrum.meta.n = r.n;
    r.spectrum.meta.lambda = r.lambda;
    r.spectrum.meta.bc_mode = c.bc.to_string();
    r.m_symmetry = (p.pencil.M - p.pencil.M.transpose()).norm() / p.pencil.M.norm();
    r.pairing_defect = conjugate_pairing_defect(r.spectrum.finite_eigs);
    write_text(c.out / fmt::format("spectrum_N{}_lam{}.csv", r.n, lambda_tag(r.lambda)),
               spectrum_csv(r.spectrum.finite_eigs));
  });

  jruns = json::array();
  for (const auto& r : runs) {
    const auto& s = r.spectrum;
    Index negative = 0, complex_count = 0;
    for (const Complex& g : s.finite_eigs) {
      negative += g.real() < 0 ? 1 : 0;
      complex_count += std::abs(g.imag()) >= kComplexTolerance * std::abs(g) ? 1 : 0;
    }
    json first = json::array();
    for (std::size_t k = 0; k < s.finite_eigs.size() && k < static_cast<std::size_t>(c.n_eigs_report); ++k)
      first.push_back(complex_json(s.finite_eigs[k]));
    jruns.push_back(json{{"N", r.n},
                         {"lambda", r.lambda},
                         {"n_disp", r.n_disp},
                         {"n_finite", s.finite_eigs.size()},
                         {"n_infinite", s.n_infinite},
                         {"n_beta_infinite", s.meta.n_beta_infinite},
                         {"n_outlier_infinite", s.meta.n_outlier_infinite},
                         {"n_negative_real", negative},
                         {"n_complex", complex_count},
                         {"eigen_method", s.meta.method},
                         {"stress_solver", r.solver},
                         {"beta_threshold", s.meta.beta_threshold},
                         {"median_modulus", s.meta.median_modulus},
                         {"m_symmetry_residual", r.m_symmetry},
                         {"conjugate_pairing_defect", r.pairing_defect},
                         {"smallest", first},
                         {"csv", fmt::format("spectrum_N{}_lam{}.csv", r.n, lambda_tag(r.lambda))}});
  }
  return runs;
}

}  // namespace

std::vector<SpectrumRun> run_solve(const ExperimentConfig& c, int threads) {
  json jruns;
  auto runs = solve_all(c, threads, jruns);
  write_json(c.out / "solve.json", json{{"config", config_json(c)}, {"runs", jruns}});
  return runs;
}

std::vector<SpectrumRun> run_spread(const ExperimentConfig& c, int threads) {
  json jruns;
  auto runs = solve_all(c, threads, jruns);
  write_json(c.out / "spread.json", json{{"config", config_json(c)}, {"runs", jruns}});

  std::map<double, std::vector<svg::Series>> by_lambda;
  std::vector<svg::Series> all;
  for (const auto& r : runs) {
    svg::Series s{fmt::format("N={}", r.n), {}};
    for (const Complex& g : r.spectrum.finite_eigs) s.points.emplace_back(g.real(), g.imag());
    by_lambda[r.lambda].push_back(s);
    all.push_back(std::move(s));
  }
  const svg::Bounds shared = svg::data_bounds(all);
  for (const auto& [lambda, series] : by_lambda) {
    const std::string title = fmt::format("{} mesh, lambda = {}", to_string(c.family), lambda_tag(lambda));
    write_text(c.out / fmt::format("spread_lam{}.svg", lambda_tag(lambda)),
               svg::scatter(series, title, "Re gamma", "Im gamma"));
    write_text(c.out / fmt::format("spread_lam{}_fixed.svg", lambda_tag(lambda)),
               svg::scatter(series, title + " (shared axes)", "Re gamma", "Im gamma", shared));
  }
  return runs;
}

// ---------------------------------------------------------------------------

Complex normalize_eigenfunction(RecoveredFields& f, Eigen::MatrixXcd& vd) {
  Index bi = 0, bj = 0;
  double best = -1;
  for (Index i = 0; i < vd.rows(); ++i)
    for (Index j = 0; j < vd.cols(); ++j)
      if (std::abs(vd(i, j)) > best) {
        best = std::abs(vd(i, j));
        bi = i;
        bj = j;
      }
  double peak = 0;
  for (Index i = 0; i < vd.rows(); ++i) peak = std::max(peak, vd.row(i).norm());
  if (!(best > 0) || !(peak > 0)) throw NumericalError("eigenfunction normalization: zero displacement");
  const Complex z = vd(bi, bj);
  const Complex factor = std::conj(z) / std::abs(z) / peak;
  vd *= factor;
  vd(bi, bj) = Complex(std::abs(vd(bi, bj)), 0.0);
  f.u *= factor;
  f.sigma *= factor;
  f.psi *= factor;
  return factor;
}

std::vector<EigenfunctionRun> run_eigenfunction(const ExperimentConfig& c, int threads) {
  const int nn = static_cast<int>(c.n_list.size()), nl = static_cast<int>(c.lambda_list.size());
  const int count = nn * nl;
  const int inner = count > 1 && threads > 1 ? 1 : threads;
  std::vector<EigenfunctionRun> runs(count);
  std::vector<Index> n_disp(count);
  std::mutex log_mutex;
  parallel_jobs(count, threads, [&](int job) {
    EigenfunctionRun& r = runs[job];
    r.n = c.n_list[job / nl];
    r.lambda = c.lambda_list[job % nl];
    const Pipeline p = run_pipeline(c.family, r.n, ElasticParams(c.mu, r.lambda), c.bc, c.mean_constraints,
                                    c.seed, inner);
    n_disp[job] = p.pencil.size();
    const PartialSpectrum ps = smallest_eigenvalues(p.pencil.M, p.pencil.N, c.which + 1);
    if (static_cast<int>(ps.eigs.size()) < c.which)
      throw InputError(fmt::format("eigenfunction: only {} eigenvalues available, which = {}", ps.eigs.size(),
                                   c.which));
    r.gamma = ps.eigs[c.which - 1];
    r.complex_mode = std::abs(r.gamma.imag()) >= kComplexTolerance * std::abs(r.gamma);
    if (r.complex_mode) {
      r.warnings.push_back(fmt::format("eigenvalue {} is complex ({:.10g}{:+.10g}i); exporting real and "
                                       "imaginary parts",
                                       c.which, r.gamma.real(), r.gamma.imag()));
      std::lock_guard lock(log_mutex);
      std::cerr << "warning: N=" << r.n << " lambda=" << lambda_tag(r.lambda) << ": " << r.warnings.back() << "\n";
    }
    r.fields = recover_fields(p.blocks, p.pencil, r.gamma, ps.eigvecs.col(c.which - 1));

    const TriMesh& mesh = p.mesh;
    r.vertex_displacement = Eigen::MatrixXcd::Zero(mesh.num_vertices(), 2);
    for (Index v = 0; v < mesh.num_vertices(); ++v)
      for (int comp = 0; comp < 2; ++comp) {
        const Index k = p.dofs.disp_local(comp, v);
        if (k >= 0) r.vertex_displacement(v, comp) = r.fields.u[k];
      }
    normalize_eigenfunction(r.fields, r.vertex_displacement);

    std::vector<VtkField> fields;
    auto add = [&](const std::string& part, auto pick) {
      VtkField u{"displacement_" + part, true, 3, {}};
      for (Index v = 0; v < mesh.num_vertices(); ++v) {
        u.values.push_back(pick(r.vertex_displacement(v, 0)));
        u.values.push_back(pick(r.vertex_displacement(v, 1)));
        u.values.push_back(0.0);
      }
      VtkField psi{"rotation_" + part, false, 1, {}};
      for (Index cell = 0; cell < mesh.num_cells(); ++cell) psi.values.push_back(pick(r.fields.psi[cell]));
      fields.push_back(std::move(u));
      fields.push_back(std::move(psi));
    };
    add("re", [](const Complex& z) { return z.real(); });
    if (r.complex_mode) add("im", [](const Complex& z) { return z.imag(); });
    std::ostringstream vtk;
    write_vtk(vtk, mesh, fields);
    const std::string stem = fmt::format("eigen_N{}_lam{}", r.n, lambda_tag(r.lambda));
    write_text(c.out / (stem + ".vtk"), vtk.str());

    std::string csv = "vertex,x,y,u1_re,u2_re,u1_im,u2_im\n";
    for (Index v = 0; v < mesh.num_vertices(); ++v) {
      const auto& u = r.vertex_displacement;
      csv += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", v, mesh.vertices[v].x(),
                         mesh.vertices[v].y(), u(v, 0).real(), u(v, 1).real(), u(v, 0).imag() + 0.0,
                         u(v, 1).imag() + 0.0);
    }
    write_text(c.out / (stem + ".csv"), csv);
  });

  json jruns = json::array();
  for (int job = 0; job < count; ++job) {
    const auto& r = runs[job];
    double psi_min = 0, psi_max = 0;
    if (r.fields.psi.size() > 0) {
      psi_min = r.fields.psi.real().minCoeff();
      psi_max = r.fields.psi.real().maxCoeff();
    }
    jruns.push_back(json{{"N", r.n},
                         {"lambda", r.lambda},
                         {"which", c.which},
                         {"n_disp", n_disp[job]},
                         {"gamma", complex_json(r.gamma)},
                         {"complex", r.complex_mode},
                         {"recovery_residuals", r.fields.residual},
                         {"rotation_range", json::array({psi_min, psi_max})},
                         {"files", json::array({fmt::format("eigen_N{}_lam{}.vtk", r.n, lambda_tag(r.lambda)),
                                                fmt::format("eigen_N{}_lam{}.csv", r.n, lambda_tag(r.lambda))})},
                         {"warnings", r.warnings}});
  }
  write_json(c.out / "eigenfunction.json", json{{"config", config_json(c)}, {"runs", jruns}});
  return runs;
}

}  // namespace lsfem

#include "helpers.hpp"
#include "lsfem/lab.hpp"
#include "lsfem/svg.hpp"

#include <doctest.h>
#include <json.hpp>

#include <atomic>
#include <fstream>
#include <sstream>

using namespace lsfem;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lsfem_test_lab_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

const fs::path kReference = fs::path(LSFEM_DATA_DIR) / "reference_eigenvalues.json";

ExperimentConfig square_config(const fs::path& out) {
  ExperimentConfig c;
  c.domain = Domain::Square;
  c.family = MeshFamily::SquareRight;
  c.n_list = {4, 8};
  c.lambda_list = {1.0};
  c.out = out;
  c.reference_file = kReference;
  return c;
}

std::size_t count_of(const std::string& s, const std::string& what) {
  std::size_t n = 0;
  for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(R"(
# comment line
domain = "lshape"   # trailing comment
family = "uniform"
n_list = [4, 8, 16]
lambda_list = [1, 1e2, 1e+08]
mu = 2.5
bc = "dirichlet_all"
seed = 17
filter_ratio = 1e9
n_eigs_report = 4
which = 2
method = "qz"
out = "results/x"
reference_file = "refs/r.json"
)",
                                          "/base/dir");
  CHECK(c.domain == Domain::Lshape);
  CHECK(c.family == MeshFamily::LshapeUniform);
  CHECK(c.n_list == std::vector<int>{4, 8, 16});
  CHECK(c.lambda_list == std::vector<double>{1, 100, 1e8});
  CHECK(c.mu == 2.5);
  CHECK(c.seed == 17);
  CHECK(c.filter_ratio == 1e9);
  CHECK(c.n_eigs_report == 4);
  CHECK(c.which == 2);
  CHECK(c.method == PencilMethod::Qz);
  CHECK(c.out == fs::path("results/x"));
  CHECK(c.reference_file == fs::path("/base/dir/refs/r.json"));

  const ExperimentConfig d = parse_config("reference_file = \"/abs/r.json\"\n", "/base");
  CHECK(d.reference_file == fs::path("/abs/r.json"));
  CHECK(d.family == MeshFamily::SquareRight);
  CHECK(d.method == PencilMethod::Auto);

  const ExperimentConfig neu = parse_config("bc = \"neumann:1,0,1,1\"\n");
  CHECK_FALSE(neu.bc.all_dirichlet());
}

TEST_CASE("config errors name the line") {
  CHECK_THROWS_WITH_AS(parse_config("domain = \"square\"\ncolour = \"red\"\n"), doctest::Contains("line 2"),
                       InputError);
  CHECK_THROWS_WITH_AS(parse_config("mu = 1\nmu = 2\n"), doctest::Contains("duplicate"), InputError);
  CHECK_THROWS_WITH_AS(parse_config("n_list = [4, x]\n"), doctest::Contains("line 1"), InputError);
  CHECK_THROWS_AS(parse_config("n_list = 4\n"), InputError);
  CHECK_THROWS_AS(parse_config("domain = square\n"), InputError);
  CHECK_THROWS_AS(parse_config("just some words\n"), InputError);
  CHECK_THROWS_AS(parse_config("family = \"left\"\n"), InputError);
  CHECK_THROWS_AS(parse_config("domain = \"lshape\"\nn_list = [3]\n"), InputError);
  CHECK_THROWS_AS(parse_config("n_list = [8, 4]\n"), InputError);
  CHECK_THROWS_AS(parse_config("lambda_list = [0]\n"), InputError);
  CHECK_THROWS_AS(parse_config("mean_constraints = yes\n"), InputError);
  CHECK_THROWS_AS(parse_config("bc = \"neumann:1,0,1,1\"\nmean_constraints = true\n"), InputError);
  CHECK_THROWS_AS(parse_config("method = \"lanczos\"\n"), InputError);
  CHECK_THROWS_AS(parse_config("seed = -1\n"), InputError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.toml"), InputError);
}

TEST_CASE("shipped configs load") {
  for (const auto& entry : fs::directory_iterator(LSFEM_CONFIG_DIR)) {
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path()));
  }
}

TEST_CASE("svg output") {
  const std::vector<svg::Series> s{{"a", {{0, 0}, {1, 2}}}, {"b & c", {{-1, 3}}}};
  const svg::Bounds b = svg::data_bounds(s);
  CHECK(b.xmin == doctest::Approx(-1.1));
  CHECK(b.xmax == doctest::Approx(1.1));
  CHECK(b.ymin == doctest::Approx(-0.15));
  CHECK(b.ymax == doctest::Approx(3.15));
  const svg::Bounds flat = svg::data_bounds({{"x", {{2, 5}}}});
  CHECK(flat.xmax > flat.xmin);
  CHECK(flat.ymax > flat.ymin);

  const std::string plot = svg::scatter(s, "title", "x", "y");
  CHECK(plot.rfind("<svg", 0) == 0);
  CHECK(plot.find("</svg>") != std::string::npos);
  CHECK(plot.find("b &amp; c") != std::string::npos);
  CHECK(count_of(plot, "<circle") >= 3);

  const std::string ll = svg::loglog({{"e", {{0.5, 1.0}, {0.25, 0.0}, {0.125, 0.0625}}}}, "t", "h", "err");
  CHECK(ll.find("<svg") != std::string::npos);
  CHECK(count_of(ll, "<circle") == 3);  // two points plus the legend marker
}

TEST_CASE("parallel jobs run everything and rethrow the lowest failure") {
  for (int threads : {1, 4}) {
    std::atomic<int> ran{0};
    try {
      parallel_jobs(10, threads, [&](int i) {
        ++ran;
        if (i == 3 || i == 7) throw InputError(std::to_string(i));
      });
      FAIL("no exception");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()) == "3");
    }
    CHECK(ran == 10);
  }
}

TEST_CASE("eigenfunction normalization") {
  RecoveredFields f;
  f.u = Eigen::VectorXcd::Constant(2, Complex(0, 2));
  f.sigma = Eigen::VectorXcd::Constant(3, Complex(0, 1));
  f.psi = Eigen::VectorXcd::Constant(1, Complex(0, -1));
  Eigen::MatrixXcd vd(3, 2);
  vd << Complex(0, 0), Complex(0, 0), Complex(0, 2), Complex(0, 1), Complex(0, -1), Complex(0, 0);
  normalize_eigenfunction(f, vd);
  double peak = 0;
  for (Index i = 0; i < vd.rows(); ++i) peak = std::max(peak, vd.row(i).norm());
  CHECK(std::abs(peak - 1.0) < 1e-15);
  CHECK(vd(1, 0).imag() == 0.0);
  CHECK(vd(1, 0).real() > 0);
  CHECK(std::abs(vd(1, 1) - Complex(1 / std::sqrt(5.0), 0)) < 1e-15);
  CHECK(std::abs(f.sigma[0] - Complex(1 / std::sqrt(5.0), 0)) < 1e-15);

  Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(2, 2);
  CHECK_THROWS_AS(normalize_eigenfunction(f, zero), NumericalError);
}

TEST_CASE("reference table round trip") {
  const fs::path dir = scratch("reference");
  ReferenceTable t;
  ReferenceEigen a;
  a.domain = Domain::Lshape;
  a.lambda = 100;
  a.value = 128.5;
  a.uncertainty = 0.01;
  a.levels = {8, 16, 32};
  a.level_values = {130, 129, 128.6};
  a.provenance = "synthetic";
  ReferenceEigen b = a;
  b.domain = Domain::Square;
  b.lambda = 1;
  b.index = 2;
  b.reliable = false;
  t.entries = {a, b};
  write_reference_table(dir / "r.json", t);
  const ReferenceTable back = read_reference_table(dir / "r.json");
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[0].domain == Domain::Square);
  const ReferenceEigen* r = back.find(Domain::Lshape, 100.0 * (1 + 1e-14), 1.0);
  REQUIRE(r != nullptr);
  CHECK(r->value == 128.5);
  CHECK(r->levels == a.levels);
  CHECK(r->level_values == a.level_values);
  CHECK(back.find(Domain::Square, 1, 1, 2)->reliable == false);
  CHECK(back.find(Domain::Square, 1, 1, 1) == nullptr);
  CHECK(back.find(Domain::Lshape, 100.1, 1.0) == nullptr);

  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK_THROWS_AS(read_reference_table(dir / "broken.json"), InputError);
  std::ofstream(dir / "partial.json") << R"({"entries": [{"domain": "square"}]})";
  CHECK_THROWS_AS(read_reference_table(dir / "partial.json"), InputError);
  CHECK_THROWS_AS(read_reference_table(dir / "missing.json"), InputError);
}

TEST_CASE("shipped reference data") {
  const ReferenceTable t = read_reference_table(kReference);
  const ReferenceEigen* sq = t.find(Domain::Square, 1, 1);
  REQUIRE(sq != nullptr);
  CHECK(std::abs(sq->value - 37.266) < 0.01);
  CHECK_FALSE(sq->provenance.empty());
  CHECK(sq->levels.size() == 3);
  CHECK(t.find(Domain::Lshape, 1, 1) != nullptr);
  CHECK(t.find(Domain::Lshape, 100, 1) != nullptr);
  CHECK(t.find(Domain::Square, 100, 1) != nullptr);
}

TEST_CASE("oracle merges into an existing table") {
  const fs::path dir = scratch("oracle");
  ExperimentConfig c;
  c.n_list = {2, 4, 8};
  c.lambda_list = {1.0};
  c.n_eigs_report = 2;
  c.out = dir;
  run_oracle(c, 2);
  c.lambda_list = {1.0, 10.0};
  const ReferenceTable t = run_oracle(c, 2);
  CHECK(t.entries.size() == 4);
  const ReferenceTable back = read_reference_table(dir / "reference_eigenvalues.json");
  CHECK(back.entries.size() == 4);
  const ReferenceEigen* r = back.find(Domain::Square, 10, 1, 2);
  REQUIRE(r != nullptr);
  CHECK(r->level_values.size() == 3);
  CHECK(r->level_values[2] < r->level_values[0]);

  c.n_list = {2, 4, 6};
  CHECK_THROWS_AS(run_oracle(c), InputError);
}

TEST_CASE("mesh export") {
  const fs::path dir = scratch("mesh");
  ExperimentConfig c = square_config(dir);
  c.family = MeshFamily::SquareCrossed;
  run_mesh_export(c);
  for (const char* f : {"mesh_N4.txt", "mesh_N4.vtk", "mesh_N8.txt", "mesh_N8.vtk", "mesh.json"})
    CHECK(fs::exists(dir / f));
  const json j = read_json(dir / "mesh.json");
  CHECK(j["meshes"][0]["cells"] == 64);
  CHECK(j["meshes"][1]["vertices"] == 145);
  std::ifstream in(dir / "mesh_N4.txt");
  CHECK(read_mesh_text(in).num_cells() == 64);
}

TEST_CASE("convergence needs a reference") {
  const fs::path dir = scratch("converge_ref");
  ExperimentConfig c = square_config(dir);
  c.reference_file.clear();
  CHECK_THROWS_WITH_AS(run_convergence(c), doctest::Contains("oracle"), InputError);
  c.reference_file = dir / "none.json";
  CHECK_THROWS_AS(run_convergence(c), InputError);

  ReferenceTable t;
  ReferenceEigen r;
  r.value = 37.0;
  t.entries = {r};
  write_reference_table(dir / "bare.json", t);
  c.reference_file = dir / "bare.json";
  CHECK_THROWS_WITH_AS(run_convergence(c), doctest::Contains("provenance"), InputError);

  c.reference_file = kReference;
  c.mu = 3.0;
  CHECK_THROWS_AS(run_convergence(c), InputError);
  c.mu = 1.0;
  c.lambda_list = {1.0, 100.0};
  CHECK_THROWS_AS(run_convergence(c), InputError);
}

TEST_CASE("convergence report") {
  const fs::path dir = scratch("converge");
  ExperimentConfig c = square_config(dir);
  c.n_list = {4, 8, 16};
  const ConvergenceReport rep = run_convergence(c, 2);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.complete);
  CHECK_FALSE(rep.rows[0].rate.has_value());
  CHECK(rep.rows[1].err < rep.rows[0].err);
  REQUIRE(rep.rate.has_value());
  CHECK(*rep.rate > 1.8);
  CHECK(*rep.rate < 2.3);

  const std::string csv = slurp(dir / "report.csv");
  CHECK(csv.rfind("N,h,gamma1,err,rate\n4,0.25,", 0) == 0);
  CHECK(count_of(csv, "\n") == 4);
  const json j = read_json(dir / "report.json");
  CHECK(j["complete"] == true);
  CHECK(j["rows"].size() == 3);
  CHECK(j["rows"][0]["rate"].is_null());
  CHECK(j["rows"][2]["eigenpair_residual"].get<double>() < 1e-8);
  CHECK(j["reference"]["value"].get<double>() == doctest::Approx(37.266).epsilon(1e-4));
  CHECK(fs::exists(dir / "rate.svg"));

  c.n_list = {8};
  const ConvergenceReport single = run_convergence(c);
  CHECK_FALSE(single.rate.has_value());
  CHECK(read_json(dir / "report.json")["rate"].is_null());
}

TEST_CASE("solve writes spectra") {
  const fs::path dir = scratch("solve");
  ExperimentConfig c = square_config(dir);
  c.n_list = {4};
  c.lambda_list = {1.0, 1e8};
  const auto runs = run_solve(c);
  REQUIRE(runs.size() == 2);
  for (const auto& r : runs) {
    CHECK(r.spectrum.finite_eigs.size() == 18);
    CHECK(r.spectrum.n_infinite == 0);
    CHECK(r.m_symmetry < 1e-12);
  }
  const std::string csv = slurp(dir / "spectrum_N4_lam1.csv");
  CHECK(csv.rfind("re,im\n", 0) == 0);
  CHECK(count_of(csv, "\n") == 19);
  CHECK(fs::exists(dir / "spectrum_N4_lam1e+08.csv"));
  const json j = read_json(dir / "solve.json");
  CHECK(j["runs"][0]["n_finite"] == 18);
  CHECK(j["runs"][0]["smallest"].size() == 10);
}

TEST_CASE("spread writes plots") {
  const fs::path dir = scratch("spread");
  ExperimentConfig c = square_config(dir);
  c.lambda_list = {1.0, 100.0};
  const auto runs = run_spread(c, 3);
  CHECK(runs.size() == 4);
  for (const char* f : {"spread.json", "spread_lam1.svg", "spread_lam1_fixed.svg", "spread_lam100.svg",
                        "spread_lam100_fixed.svg", "spectrum_N8_lam100.csv"})
    CHECK(fs::exists(dir / f));
  CHECK(read_json(dir / "spread.json")["runs"].size() == 4);
}

TEST_CASE("eigenfunction on the nonuniform L-shape") {
  const fs::path dir = scratch("eigen");
  ExperimentConfig c;
  c.domain = Domain::Lshape;
  c.family = MeshFamily::LshapeNonuniform;
  c.n_list = {16, 64};
  c.lambda_list = {100.0};
  c.out = dir;
  const auto runs = run_eigenfunction(c, 2);
  REQUIRE(runs.size() == 2);
  for (const auto& r : runs) {
    CAPTURE(r.n);
    CHECK_FALSE(r.complex_mode);
    for (double res : r.fields.residual) CHECK(res < 1e-8);
    const TriMesh mesh = generate_mesh(c.family, r.n, c.seed);
    const auto boundary = mesh.boundary_vertices();
    double peak = 0;
    for (Index v = 0; v < mesh.num_vertices(); ++v) {
      if (boundary[v]) CHECK(r.vertex_displacement.row(v).norm() == 0.0);
      peak = std::max(peak, r.vertex_displacement.row(v).norm());
    }
    CHECK(std::abs(peak - 1.0) < 1e-14);
  }
  CHECK(std::abs(runs[1].gamma.real() - 126.933) < 0.01);
  const Eigen::VectorXd psi = runs[1].fields.psi.real();
  CHECK(psi.minCoeff() < 0);
  CHECK(psi.maxCoeff() > 0);
  const std::string vtk = slurp(dir / "eigen_N64_lam100.vtk");
  CHECK(vtk.find("displacement_re") != std::string::npos);
  CHECK(vtk.find("rotation_re") != std::string::npos);
  CHECK(slurp(dir / "eigen_N16_lam100.csv").rfind("vertex,x,y,u1_re,u2_re,u1_im,u2_im\n", 0) == 0);
  const json j = read_json(dir / "eigenfunction.json");
  CHECK(j["runs"][1]["rotation_range"][0].get<double>() < 0);

  c.n_list = {4};
  c.which = 100;
  CHECK_THROWS_AS(run_eigenfunction(c), InputError);
}

TEST_CASE("outputs do not depend on the run or the thread count") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  ExperimentConfig c = square_config(a);
  c.family = MeshFamily::SquareNonuniform;
  c.seed = 9;
  c.lambda_list = {1.0, 1e4};
  run_spread(c, 1);
  c.out = b;
  run_spread(c, 4);
  for (const auto& entry : fs::directory_iterator(a)) {
    CAPTURE(entry.path().filename().string());
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  }
}

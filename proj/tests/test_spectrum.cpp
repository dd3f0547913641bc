#include "helpers.hpp"
#include "lsfem/spectrum.hpp"

#include <doctest.h>

#include <random>

using namespace lsfem;

namespace {

// Random pencil with M symmetric negative definite.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> random_pencil(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n), nm(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      a(i, j) = g(rng);
      nm(i, j) = g(rng);
    }
  Eigen::MatrixXd m = -(a * a.transpose() + double(n) * Eigen::MatrixXd::Identity(n, n));
  return {m, nm};
}

}  // namespace

TEST_CASE("two-by-two examples") {
  const Spectrum a = solve_pencil(Eigen::Matrix2d::Identity(), Eigen::Vector2d(1, 0).asDiagonal().toDenseMatrix());
  REQUIRE(a.finite_eigs.size() == 1);
  CHECK(std::abs(a.finite_eigs[0] - 1.0) < 1e-15);
  CHECK(a.n_infinite == 1);
  CHECK(a.meta.n_beta_infinite == 1);

  const Spectrum b = solve_pencil(Eigen::Vector2d(3, 2).asDiagonal().toDenseMatrix(), Eigen::Matrix2d::Identity());
  REQUIRE(b.finite_eigs.size() == 2);
  CHECK(std::abs(b.finite_eigs[0] - 2.0) < 1e-15);
  CHECK(std::abs(b.finite_eigs[1] - 3.0) < 1e-15);
  CHECK(b.n_infinite == 0);
}

TEST_CASE("outlier filter") {
  const Eigen::Matrix3d m = Eigen::Vector3d(1, 2, 1e14).asDiagonal();
  const Spectrum s = solve_pencil(m, Eigen::Matrix3d::Identity());
  CHECK(s.finite_eigs.size() == 2);
  CHECK(s.meta.n_outlier_infinite == 1);
  SolveOptions tight;
  tight.filter_ratio = 1e-300;
  CHECK_THROWS_WITH_AS(solve_pencil(m, Eigen::Matrix3d::Identity(), tight), doctest::Contains("empty finite spectrum"),
                       NumericalError);
  CHECK_THROWS_AS(solve_pencil(Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Zero()), NumericalError);
  CHECK_THROWS_AS(solve_pencil(Eigen::Matrix2d::Identity(), Eigen::Matrix3d::Identity()), InputError);
}

TEST_CASE("ordering is by modulus, then imaginary part") {
  CHECK(modulus_order({1, 0}, {0, 2}));
  CHECK(modulus_order({1, -1}, {1, 1}));
  CHECK_FALSE(modulus_order({1, 1}, {1, -1}));
}

TEST_CASE("disk count") {
  const std::vector<Complex> eigs{{1, 0}, {2, 1}, {2, -1}, {50, 0}};
  CHECK(count_in_disk(eigs, 10.0) == 3);
  CHECK(count_in_disk(eigs, 0.5) == 0);
  CHECK_THROWS_AS(count_in_disk(eigs, 0.0), InputError);
}

TEST_CASE("conjugate pairing") {
  const std::vector<Complex> paired{{1, 0}, {2, 1}, {2, -1}};
  CHECK(conjugate_pairing_defect(paired) == 0.0);
  const std::vector<Complex> broken{{2, 1}, {2, -1.1}};
  CHECK(conjugate_pairing_defect(broken) > 0.04);
}

TEST_CASE("first eigenvalue refuses a complex pair") {
  const std::vector<Complex> real_first{{3, 1e-9}, {4, 1}};
  CHECK(first_eigenvalue(real_first).real() == 3.0);
  const std::vector<Complex> pair_first{{3, 1}, {3, -1}, {10, 0}};
  CHECK_THROWS_WITH_AS(first_eigenvalue(pair_first), doctest::Contains("complex pair"), NumericalError);
  CHECK_THROWS_AS(first_eigenvalue(std::vector<Complex>{}), NumericalError);
}

TEST_CASE("convergence rate estimate") {
  const std::vector<ErrorSample> quad{{0.5, 1.0}, {0.25, 0.25}, {0.125, 0.0625}};
  const RateEstimate r2 = estimate_rate(quad);
  CHECK(std::abs(r2.slope - 2.0) < 1e-12);
  REQUIRE(r2.pairwise.size() == 2);
  CHECK(std::abs(r2.pairwise[1] - 2.0) < 1e-12);
  CHECK(r2.warnings.empty());

  const std::vector<ErrorSample> lin{{1.0, 3.0}, {0.5, 1.5}, {0.25, 0.75}};
  CHECK(std::abs(estimate_rate(lin).slope - 1.0) < 1e-12);

  const std::vector<ErrorSample> with_zero{{0.5, 1.0}, {0.25, 0.0}, {0.125, 0.0625}};
  const RateEstimate d = estimate_rate(with_zero);
  CHECK(d.used.size() == 2);
  CHECK(d.warnings.size() == 1);
  CHECK(std::abs(d.slope - 2.0) < 1e-12);

  const std::vector<ErrorSample> one{{0.5, 1.0}, {0.25, 0.0}};
  CHECK_THROWS_AS(estimate_rate(one), InputError);
  const std::vector<ErrorSample> unordered{{0.25, 1.0}, {0.5, 0.5}};
  CHECK_THROWS_AS(estimate_rate(unordered), InputError);
}

TEST_CASE("reduction agrees with QZ") {
  auto [m, n] = random_pencil(60, 7);
  SolveOptions qz, red;
  qz.eigenvectors = red.eigenvectors = true;
  red.method = PencilMethod::Reduction;
  const Spectrum a = solve_pencil(m, n, qz);
  const Spectrum b = solve_pencil(m, n, red);
  CHECK(a.meta.method == "qz");
  CHECK(b.meta.method == "reduction");
  REQUIRE(a.finite_eigs.size() == b.finite_eigs.size());
  for (std::size_t i = 0; i < a.finite_eigs.size(); ++i)
    CHECK(std::abs(a.finite_eigs[i] - b.finite_eigs[i]) < 1e-9 * std::abs(a.finite_eigs[i]));
  CHECK(max_eigenpair_residual(m, n, a.finite_eigs, a.eigvecs) < 1e-10);
  CHECK(max_eigenpair_residual(m, n, b.finite_eigs, b.eigvecs) < 1e-10);
  CHECK(max_backward_error(m, n, b.finite_eigs, b.eigvecs) <= max_eigenpair_residual(m, n, b.finite_eigs, b.eigvecs));
  CHECK(conjugate_pairing_defect(a.finite_eigs) < 1e-10);
}

TEST_CASE("reduction falls back to QZ when M is not negative definite") {
  SolveOptions red;
  red.method = PencilMethod::Reduction;
  const Spectrum s = solve_pencil(Eigen::Vector2d(3, 2).asDiagonal().toDenseMatrix(), Eigen::Matrix2d::Identity(), red);
  CHECK(s.meta.method == "qz");
  CHECK(s.finite_eigs.size() == 2);
}

TEST_CASE("partial eigensolver matches the dense spectrum") {
  auto [m, n] = random_pencil(200, 11);
  const Spectrum full = solve_pencil(m, n);
  const PartialSpectrum part = smallest_eigenvalues(m, n, 6);
  REQUIRE(part.eigs.size() == 6);
  CHECK(part.iterations > 0);
  for (int k = 0; k < 6; ++k) {
    CHECK(std::abs(part.eigs[k] - full.finite_eigs[k]) < 1e-9 * std::abs(full.finite_eigs[k]));
    CHECK(part.residuals[k] < 1e-10);
  }
  // Small pencils take the dense route.
  auto [ms, ns] = random_pencil(12, 3);
  const PartialSpectrum small = smallest_eigenvalues(ms, ns, 3);
  const Spectrum fs = solve_pencil(ms, ns);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(small.eigs[k] - fs.finite_eigs[k]) < 1e-12 * std::abs(fs.finite_eigs[k]));
  CHECK_THROWS_AS(smallest_eigenvalues(ms, ns, 0), InputError);
}

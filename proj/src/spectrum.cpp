#include "lsfem/spectrum.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <fmt/format.h>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

namespace lsfem {

bool modulus_order(const Complex& a, const Complex& b) {
  const double ma = std::abs(a), mb = std::abs(b);
  if (ma != mb) return ma < mb;
  if (a.imag() != b.imag()) return a.imag() < b.imag();
  return a.real() < b.real();
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct RawModes {
  std::vector<Complex> alpha;
  std::vector<double> beta;
  Eigen::MatrixXcd vecs;  // empty unless requested
  double beta_scale = 0;
  std::string method;
};

// Columns of a LAPACK real eigenvector matrix, with conjugate pairs stored as
// (re, im) column couples.
Eigen::MatrixXcd unpack_vectors(const Eigen::MatrixXd& vr, const std::vector<double>& imag) {
  const Index n = vr.rows();
  Eigen::MatrixXcd v(n, vr.cols());
  for (Index j = 0; j < vr.cols(); ++j) {
    if (imag[j] == 0.0) {
      v.col(j) = vr.col(j).cast<Complex>();
    } else if (imag[j] > 0.0 && j + 1 < vr.cols()) {
      v.col(j).real() = vr.col(j);
      v.col(j).imag() = vr.col(j + 1);
      v.col(j + 1) = v.col(j).conjugate();
      ++j;
    }
  }
  return v;
}

RawModes qz_modes(const Eigen::MatrixXd& M, const Eigen::MatrixXd& N, bool vectors) {
  const Index n = M.rows();
  Eigen::MatrixXd a = M, b = N, vr;
  std::vector<double> ar(n), ai(n), be(n);
  if (vectors) vr.resize(n, n);
  const lapack_int info = LAPACKE_dggev(
      LAPACK_COL_MAJOR, 'N', vectors ? 'V' : 'N', static_cast<lapack_int>(n), a.data(),
      static_cast<lapack_int>(n), b.data(), static_cast<lapack_int>(n), ar.data(), ai.data(), be.data(),
      nullptr, 1, vectors ? vr.data() : nullptr, static_cast<lapack_int>(vectors ? n : 1));
  if (info != 0)
    throw NumericalError(fmt::format("QZ iteration failed (dggev info {}, pencil size {})", info, n));
  RawModes r;
  r.method = "qz";
  r.alpha.resize(n);
  r.beta = be;
  for (Index i = 0; i < n; ++i) r.alpha[i] = Complex(ar[i], ai[i]);
  // The two halves of a conjugate pair may carry different beta scalings;
  // rescale the second so the pair is conjugate to the last bit.
  for (Index i = 0; i + 1 < n; ++i)
    if (ai[i] > 0.0) {
      r.alpha[i + 1] = std::conj(r.alpha[i]);
      r.beta[i + 1] = r.beta[i];
      ++i;
    }
  r.beta_scale = N.norm();
  if (vectors) r.vecs = unpack_vectors(vr, ai);
  return r;
}

// gamma = -1/kappa for the eigenvalues kappa of L^-1 N L^-t, -M = L L^t.
std::optional<RawModes> reduction_modes(const Eigen::MatrixXd& M, const Eigen::MatrixXd& N, bool vectors) {
  const Index n = M.rows();
  Eigen::LLT<Eigen::MatrixXd> llt(-M);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Eigen::MatrixXd k = llt.matrixL().solve(N);
  k = llt.matrixL().solve(k.transpose()).transpose();

  std::vector<double> wr(n), wi(n);
  Eigen::MatrixXd vr;
  if (vectors) vr.resize(n, n);
  const lapack_int info =
      LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', vectors ? 'V' : 'N', static_cast<lapack_int>(n), k.data(),
                    static_cast<lapack_int>(n), wr.data(), wi.data(), nullptr, 1,
                    vectors ? vr.data() : nullptr, static_cast<lapack_int>(vectors ? n : 1));
  if (info != 0)
    throw NumericalError(fmt::format("Hessenberg QR failed (dgeev info {}, size {})", info, n));

  RawModes r;
  r.method = "reduction";
  r.alpha.assign(n, Complex(-1.0, 0.0));
  r.beta.resize(n);
  // (alpha, beta) = (-conj(kappa)/|kappa|, |kappa|), so alpha/beta = -1/kappa
  // and beta carries the magnitude the infinite-mode test looks at.
  for (Index i = 0; i < n; ++i) {
    const Complex kappa(wr[i], wi[i]);
    const double mod = std::abs(kappa);
    r.beta[i] = mod;
    r.alpha[i] = mod > 0 ? -std::conj(kappa) / mod : Complex(-1.0, 0.0);
  }
  // ||K||_F is not available after dgeev overwrote k; the spectral radius
  // bounds it from below and is what the threshold needs.
  double radius = 0;
  for (Index i = 0; i < n; ++i) radius = std::max(radius, std::abs(Complex(wr[i], wi[i])));
  r.beta_scale = radius;
  if (vectors) {
    Eigen::MatrixXcd w = unpack_vectors(vr, wi);
    const Eigen::MatrixXcd lt = llt.matrixU().toDenseMatrix().cast<Complex>();
    r.vecs = lt.triangularView<Eigen::Upper>().solve(w);
  }
  return r;
}

Spectrum classify(const RawModes& raw, Index n, const SolveOptions& opt) {
  Spectrum s;
  s.meta.method = raw.method;
  s.meta.beta_threshold = static_cast<double>(n) * kEps * raw.beta_scale;

  std::vector<Index> survivors;
  for (Index i = 0; i < n; ++i) {
    if (std::abs(raw.beta[i]) > s.meta.beta_threshold)
      survivors.push_back(i);
    else
      ++s.meta.n_beta_infinite;
  }
  if (survivors.empty()) throw NumericalError("empty finite spectrum: every mode is infinite");

  std::vector<double> mod;
  for (Index i : survivors) mod.push_back(std::abs(raw.alpha[i] / raw.beta[i]));
  std::vector<double> sorted = mod;
  const auto mid = sorted.begin() + sorted.size() / 2;
  std::nth_element(sorted.begin(), mid, sorted.end());
  s.meta.median_modulus = *mid;

  std::vector<std::pair<Complex, Index>> finite;
  for (std::size_t k = 0; k < survivors.size(); ++k) {
    if (mod[k] > opt.filter_ratio * s.meta.median_modulus) {
      ++s.meta.n_outlier_infinite;
      continue;
    }
    finite.emplace_back(raw.alpha[survivors[k]] / raw.beta[survivors[k]], survivors[k]);
  }
  if (finite.empty()) throw NumericalError("empty finite spectrum: every mode was cut by the outlier filter");
  std::stable_sort(finite.begin(), finite.end(),
                   [](const auto& x, const auto& y) { return modulus_order(x.first, y.first); });

  s.n_infinite = s.meta.n_beta_infinite + s.meta.n_outlier_infinite;
  s.finite_eigs.reserve(finite.size());
  for (const auto& f : finite) s.finite_eigs.push_back(f.first);
  if (raw.vecs.size() > 0) {
    s.eigvecs.resize(n, static_cast<Index>(finite.size()));
    for (std::size_t k = 0; k < finite.size(); ++k) s.eigvecs.col(k) = raw.vecs.col(finite[k].second);
  }
  return s;
}

}  // namespace

Spectrum solve_pencil(const Eigen::MatrixXd& M, const Eigen::MatrixXd& N, const SolveOptions& opt) {
  const Index n = M.rows();
  if (n == 0 || M.cols() != n || N.rows() != n || N.cols() != n)
    throw InputError("solve_pencil: M and N must be square and of equal size");
  if (!(opt.filter_ratio > 0)) throw InputError("solve_pencil: filter_ratio must be positive");

  PencilMethod method = opt.method;
  if (method == PencilMethod::Auto) method = n <= kAutoQzLimit ? PencilMethod::Qz : PencilMethod::Reduction;
  if (method == PencilMethod::Reduction) {
    if (auto raw = reduction_modes(M, N, opt.eigenvectors)) return classify(*raw, n, opt);
    // M not negative definite: the reduction does not apply.
  }
  return classify(qz_modes(M, N, opt.eigenvectors), n, opt);
}

Spectrum solve_pencil(const SchurPencil& pencil, const SolveOptions& options) {
  return solve_pencil(pencil.M, pencil.N, options);
}

PartialSpectrum smallest_eigenvalues(const Eigen::MatrixXd& M, const Eigen::MatrixXd& N, int count,
                                     double tolerance, int max_iterations) {
  const Index n = M.rows();
  if (count < 1) throw InputError("smallest_eigenvalues: count must be positive");
  const Index p = std::min<Index>(n, count + std::max(10, count));
  if (p >= n || n <= 2 * p) {
    // Small pencil: the dense route is cheaper and exact.
    SolveOptions opt;
    opt.eigenvectors = true;
    const Spectrum s = solve_pencil(M, N, opt);
    PartialSpectrum out;
    const Index k = std::min<Index>(count, static_cast<Index>(s.finite_eigs.size()));
    out.eigs.assign(s.finite_eigs.begin(), s.finite_eigs.begin() + k);
    out.eigvecs = s.eigvecs.leftCols(k);
    for (Index i = 0; i < k; ++i)
      out.residuals.push_back(max_eigenpair_residual(M, N, std::span(&out.eigs[i], 1), out.eigvecs.col(i)));
    return out;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(-M);
  if (llt.info() != Eigen::Success)
    throw NumericalError("smallest_eigenvalues: M is not negative definite");
  auto apply = [&](const Eigen::MatrixXd& q) {
    Eigen::MatrixXd y = llt.matrixU().solve(q);
    y = N * y;
    return Eigen::MatrixXd(llt.matrixL().solve(y));
  };
  auto orthonormal = [](const Eigen::MatrixXd& z) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
    return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(z.rows(), z.cols()));
  };

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd q(n, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < n; ++i) q(i, j) = normal(rng);
  q = orthonormal(q);

  PartialSpectrum out;
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::MatrixXd z = apply(q);
    const Eigen::MatrixXd h = q.transpose() * z;
    Eigen::EigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("smallest_eigenvalues: Ritz problem failed");
    std::vector<Index> order(p);
    std::iota(order.begin(), order.end(), 0);
    const Eigen::VectorXcd theta = es.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return modulus_order(-1.0 / theta[a], -1.0 / theta[b]);
    });

    const Eigen::MatrixXcd y = es.eigenvectors();
    const Eigen::MatrixXcd zc = z.cast<Complex>(), qc = q.cast<Complex>();
    double worst = 0;
    for (int k = 0; k < count; ++k) {
      const Index j = order[k];
      const Eigen::VectorXcd r = zc * y.col(j) - theta[j] * (qc * y.col(j));
      worst = std::max(worst, r.norm() / (std::abs(theta[j]) * (qc * y.col(j)).norm()));
    }
    if (worst < tolerance || it == max_iterations) {
      if (worst >= tolerance)
        throw NumericalError(fmt::format("subspace iteration did not converge (residual {:.3e})", worst));
      out.iterations = it;
      out.eigvecs.resize(n, count);
      const Eigen::MatrixXcd ut = llt.matrixU().toDenseMatrix().cast<Complex>();
      for (int k = 0; k < count; ++k) {
        const Index j = order[k];
        out.eigs.push_back(-1.0 / theta[j]);
        out.eigvecs.col(k) = ut.triangularView<Eigen::Upper>().solve(qc * y.col(j));
      }
      break;
    }
    q = orthonormal(z);
  }
  for (int k = 0; k < count; ++k)
    out.residuals.push_back(max_eigenpair_residual(M, N, std::span(&out.eigs[k], 1), out.eigvecs.col(k)));
  return out;
}

Complex first_eigenvalue(std::span<const Complex> eigs) {
  if (eigs.empty()) throw NumericalError("first eigenvalue requested from an empty spectrum");
  const Complex g = eigs.front();
  if (std::abs(g.imag()) >= 1e-6 * std::abs(g))
    throw NumericalError(fmt::format(
        "smallest-modulus eigenvalue is a complex pair ({:.12g} +/- {:.12g}i); refusing to pick one",
        g.real(), std::abs(g.imag())));
  return g;
}

Index count_in_disk(std::span<const Complex> eigs, double radius) {
  if (!(radius > 0)) throw InputError("count_in_disk: radius must be positive");
  return std::count_if(eigs.begin(), eigs.end(), [&](const Complex& g) { return std::abs(g) < radius; });
}

double conjugate_pairing_defect(std::span<const Complex> eigs, double real_tolerance) {
  double worst = 0;
  for (const Complex& g : eigs) {
    if (std::abs(g.imag()) <= real_tolerance * std::abs(g)) continue;
    const Complex target = std::conj(g);
    double best = std::numeric_limits<double>::infinity();
    for (const Complex& other : eigs) best = std::min(best, std::abs(other - target));
    worst = std::max(worst, best / std::abs(g));
  }
  return worst;
}

namespace {

double worst_residual(const Eigen::MatrixXd& M, const Eigen::MatrixXd& N, std::span<const Complex> eigs,
                      const Eigen::MatrixXcd& vecs, bool backward) {
  if (static_cast<Index>(eigs.size()) != vecs.cols())
    throw InputError("eigenpair residual: eigenvalue and eigenvector counts differ");
  const double mnorm = M.norm(), nnorm = N.norm();
  double worst = 0;
  for (Index k = 0; k < vecs.cols(); ++k) {
    const Eigen::VectorXcd v = vecs.col(k);
    const Eigen::VectorXcd r = M * v - eigs[k] * (N * v);
    const double scale = backward ? mnorm + std::abs(eigs[k]) * nnorm : mnorm;
    worst = std::max(worst, r.norm() / (scale * v.norm()));
  }
  return worst;
}

}  // namespace

double max_eigenpair_residual(const Eigen::MatrixXd& M, const Eigen::MatrixXd& N, std::span<const Complex> eigs,
                              const Eigen::MatrixXcd& vecs) {
  return worst_residual(M, N, eigs, vecs, false);
}

double max_backward_error(const Eigen::MatrixXd& M, const Eigen::MatrixXd& N, std::span<const Complex> eigs,
                          const Eigen::MatrixXcd& vecs) {
  return worst_residual(M, N, eigs, vecs, true);
}

RateEstimate estimate_rate(std::span<const ErrorSample> samples) {
  RateEstimate out;
  for (std::size_t k = 1; k < samples.size(); ++k)
    if (!(samples[k].h < samples[k - 1].h)) throw InputError("estimate_rate: h must be strictly decreasing");
  for (const auto& s : samples) {
    if (s.err > 0 && std::isfinite(s.err))
      out.used.push_back(s);
    else
      out.warnings.push_back(fmt::format("dropped sample h={} with non-positive error {}", s.h, s.err));
  }
  if (out.used.size() < 2) throw InputError("estimate_rate: fewer than two usable samples");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(out.used.size());
  for (const auto& s : out.used) {
    const double x = std::log(s.h), y = std::log(s.err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  for (std::size_t k = 1; k < out.used.size(); ++k)
    out.pairwise.push_back(std::log(out.used[k - 1].err / out.used[k].err) /
                           std::log(out.used[k - 1].h / out.used[k].h));
  return out;
}

}  // namespace lsfem

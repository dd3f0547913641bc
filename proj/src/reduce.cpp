#include "lsfem/reduce.hpp"

#include <Eigen/SparseLU>
#include <cholmod.h>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <thread>

namespace lsfem {

Eigen::VectorXd TildeMatrices::apply_rotation_inverse(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = f_inv.cwiseProduct(x);
  if (mean_constraints) y -= q * (q.dot(x) / rho);
  return y;
}

TildeMatrices eliminate_rotation(const BlockSystem& b) {
  const Index nr = b.n_rot();
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(nr);
  for (Index k = 0; k < b.F.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(b.F, k); it; ++it) {
      if (it.row() != it.col() && it.value() != 0.0)
        throw NumericalError("rotation mass matrix not invertible: F is not diagonal");
      if (it.row() == it.col()) diag[it.row()] += it.value();
    }
  for (Index i = 0; i < nr; ++i)
    if (!(diag[i] > 0))
      throw NumericalError(fmt::format("rotation mass matrix not invertible: F({0},{0}) = {1}", i, diag[i]));

  TildeMatrices t;
  t.f_inv = diag.cwiseInverse();
  const auto finv = t.f_inv.asDiagonal();
  const SparseMatrix Ct = b.C.transpose();
  const SparseMatrix Et = b.E.transpose();
  t.A = b.A - SparseMatrix(Ct * finv * b.C);
  t.B = SparseMatrix(b.B.transpose()) - SparseMatrix(Ct * finv * b.E);
  t.C = b.B - SparseMatrix(Et * finv * b.C);
  t.D = b.D - SparseMatrix(Et * finv * b.E);
  for (auto* m : {&t.A, &t.B, &t.C, &t.D}) {
    m->prune(0.0);
    m->makeCompressed();
  }

  t.mean_constraints = b.mean_constraints;
  if (b.mean_constraints) {
    t.q = t.f_inv.cwiseProduct(b.rotation_moments);
    t.rho = b.rotation_moments.dot(t.q);
    t.w = Ct * t.q;
    t.e = Et * t.q;
    t.trace = b.trace_moments;
  }
  return t;
}

// ---------------------------------------------------------------------------

struct StressSolver::Impl {
  cholmod_common common{};
  cholmod_factor* factor = nullptr;
  SparseMatrix lower;  // keeps the analysed pattern alive
  std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu;

  Impl() { cholmod_start(&common); }
  ~Impl() {
    if (factor) cholmod_free_factor(&factor, &common);
    cholmod_finish(&common);
  }
};

namespace {

cholmod_sparse view_lower(SparseMatrix& m) {
  cholmod_sparse s{};
  s.nrow = m.rows();
  s.ncol = m.cols();
  s.nzmax = m.nonZeros();
  s.p = m.outerIndexPtr();
  s.i = m.innerIndexPtr();
  s.x = m.valuePtr();
  s.stype = -1;
  s.itype = CHOLMOD_INT;
  s.xtype = CHOLMOD_REAL;
  s.dtype = CHOLMOD_DOUBLE;
  s.sorted = 1;
  s.packed = 1;
  return s;
}

SparseMatrix bordered_matrix(const TildeMatrices& t) {
  const Index n = t.n_stress();
  std::vector<Triplet> trip;
  trip.reserve(t.A.nonZeros() + 4 * n + 1);
  for (Index k = 0; k < t.A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(t.A, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  for (Index i = 0; i < n; ++i) {
    if (t.w[i] != 0.0) {
      trip.emplace_back(i, n, t.w[i]);
      trip.emplace_back(n, i, t.w[i]);
    }
    if (t.trace[i] != 0.0) {
      trip.emplace_back(i, n + 1, t.trace[i]);
      trip.emplace_back(n + 1, i, t.trace[i]);
    }
  }
  trip.emplace_back(n, n, -t.rho);
  SparseMatrix m(n + 2, n + 2);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

}  // namespace

StressSolver::StressSolver(const TildeMatrices& t) : impl_(std::make_unique<Impl>()), n_(t.n_stress()) {
  if (t.mean_constraints) {
    bordered_ = true;
    impl_->lu = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
    impl_->lu->compute(bordered_matrix(t));
    if (impl_->lu->info() != Eigen::Success)
      throw NumericalError("factorization of the bordered stress operator failed: " +
                           impl_->lu->lastErrorMessage());
    kind_ = "lu (bordered)";
    return;
  }

  impl_->lower = t.A.triangularView<Eigen::Lower>();
  cholmod_sparse view = view_lower(impl_->lower);
  impl_->common.supernodal = CHOLMOD_AUTO;
  impl_->factor = cholmod_analyze(&view, &impl_->common);
  if (!impl_->factor) throw NumericalError("CHOLMOD analysis of the stress operator failed");
  cholmod_factorize(&view, impl_->factor, &impl_->common);
  if (impl_->common.status == CHOLMOD_OK && impl_->factor->minor == impl_->factor->n) {
    kind_ = "cholesky";
    return;
  }
  const auto pivot = static_cast<Index>(impl_->factor->minor);
  cholmod_free_factor(&impl_->factor, &impl_->common);

  impl_->lu = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
  impl_->lu->compute(t.A);
  if (impl_->lu->info() != Eigen::Success)
    throw NumericalError(fmt::format(
        "stress operator factorization broke down: cholesky at pivot {} of {}, pivoted LU: {}", pivot,
        n_, impl_->lu->lastErrorMessage()));
  kind_ = fmt::format("lu (cholesky failed at pivot {})", pivot);
}

StressSolver::~StressSolver() = default;

Eigen::MatrixXd StressSolver::solve(const Eigen::MatrixXd& rhs) const {
  if (rhs.rows() != n_) throw InputError("StressSolver::solve: dimension mismatch");
  if (impl_->lu) {
    if (!bordered_) return impl_->lu->solve(rhs);
    Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(n_ + 2, rhs.cols());
    padded.topRows(n_) = rhs;
    Eigen::MatrixXd x = impl_->lu->solve(padded);
    return x.topRows(n_);
  }
  // A private workspace per call lets several threads share the factor.
  cholmod_common common{};
  cholmod_start(&common);
  Eigen::MatrixXd b = rhs;
  cholmod_dense view{};
  view.nrow = b.rows();
  view.ncol = b.cols();
  view.nzmax = b.size();
  view.d = b.rows();
  view.x = b.data();
  view.xtype = CHOLMOD_REAL;
  view.dtype = CHOLMOD_DOUBLE;
  cholmod_dense* x = cholmod_solve(CHOLMOD_A, impl_->factor, &view, &common);
  if (!x) {
    cholmod_finish(&common);
    throw NumericalError("CHOLMOD solve failed");
  }
  Eigen::MatrixXd out = Eigen::Map<Eigen::MatrixXd>(static_cast<double*>(x->x), b.rows(), b.cols());
  cholmod_free_dense(&x, &common);
  cholmod_finish(&common);
  return out;
}

// ---------------------------------------------------------------------------

SchurPencil build_schur_pencil(std::shared_ptr<const TildeMatrices> tilde, const SparseMatrix& G,
                               int threads) {
  const TildeMatrices& t = *tilde;
  const Index ns = t.n_stress(), nd = t.n_disp();
  if (G.rows() != ns || G.cols() != nd) throw InputError("build_schur_pencil: G has the wrong shape");

  SchurPencil p;
  p.tilde = tilde;
  p.solver = std::make_shared<const StressSolver>(t);
  p.G = G;
  p.M.resize(nd, nd);
  p.N.resize(nd, nd);

  constexpr Index kBlock = 64;
  const Index n_blocks = (nd + kBlock - 1) / kBlock;
  auto do_block = [&](Index blk) {
    const Index c0 = blk * kBlock, width = std::min(kBlock, nd - c0);
    Eigen::MatrixXd rb = Eigen::MatrixXd(t.B.middleCols(c0, width));
    Eigen::MatrixXd rg = Eigen::MatrixXd(G.middleCols(c0, width));
    if (t.mean_constraints) rb += t.w * (t.e.segment(c0, width).transpose() / t.rho);
    const Eigen::MatrixXd x = p.solver->solve(rb);
    const Eigen::MatrixXd y = p.solver->solve(rg);
    Eigen::MatrixXd m = t.C * x - Eigen::MatrixXd(t.D.middleCols(c0, width));
    Eigen::MatrixXd n = t.C * y;
    if (t.mean_constraints) {
      m += t.e * ((t.w.transpose() * x) / t.rho);
      m -= t.e * (t.e.segment(c0, width).transpose() / t.rho);
      n += t.e * ((t.w.transpose() * y) / t.rho);
    }
    p.M.middleCols(c0, width) = m;
    p.N.middleCols(c0, width) = n;
  };

  const int workers = static_cast<int>(std::clamp<Index>(threads, 1, std::max<Index>(1, n_blocks)));
  if (workers == 1) {
    for (Index blk = 0; blk < n_blocks; ++blk) do_block(blk);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (Index blk = w; blk < n_blocks; blk += workers) do_block(blk);
      });
  }
  return p;
}

SchurPencil build_schur_pencil(const BlockSystem& blocks, int threads) {
  return build_schur_pencil(std::make_shared<const TildeMatrices>(eliminate_rotation(blocks)), blocks.G,
                            threads);
}

namespace {

Eigen::VectorXcd solve_complex(const StressSolver& s, const Eigen::VectorXcd& rhs) {
  Eigen::MatrixXd parts(rhs.size(), 2);
  parts.col(0) = rhs.real();
  parts.col(1) = rhs.imag();
  const Eigen::MatrixXd x = s.solve(parts);
  Eigen::VectorXcd out(rhs.size());
  out.real() = x.col(0);
  out.imag() = x.col(1);
  return out;
}

Eigen::VectorXcd apply_w(const TildeMatrices& t, const Eigen::VectorXcd& x) {
  Eigen::VectorXcd out(x.size());
  out.real() = t.apply_rotation_inverse(x.real());
  out.imag() = t.apply_rotation_inverse(x.imag());
  return out;
}

Eigen::VectorXcd remove_direction(Eigen::VectorXcd r, const Eigen::VectorXd& dir) {
  const double nn = dir.squaredNorm();
  if (nn > 0) r -= dir.cast<std::complex<double>>() * (dir.cast<std::complex<double>>().dot(r) / nn);
  return r;
}

}  // namespace

RecoveredFields recover_fields(const BlockSystem& b, const SchurPencil& p, std::complex<double> gamma,
                               const Eigen::VectorXcd& u_hat) {
  const TildeMatrices& t = *p.tilde;
  if (u_hat.size() != t.n_disp()) throw InputError("recover_fields: displacement vector has the wrong size");
  if (u_hat.norm() == 0.0) throw InputError("recover_fields: the zero vector is not an eigenvector");

  using CMat = Eigen::SparseMatrix<std::complex<double>>;
  const CMat Bt = t.B.cast<std::complex<double>>();
  const CMat Gc = p.G.cast<std::complex<double>>();

  Eigen::VectorXcd rhs = gamma * (Gc * u_hat) - Bt * u_hat;
  if (t.mean_constraints) rhs -= t.w.cast<std::complex<double>>() * (t.e.cast<std::complex<double>>().dot(u_hat) / t.rho);

  RecoveredFields f;
  f.u = u_hat;
  f.sigma = solve_complex(*p.solver, rhs);
  const CMat C = b.C.cast<std::complex<double>>();
  const CMat E = b.E.cast<std::complex<double>>();
  f.psi = -apply_w(t, C * f.sigma + E * u_hat);

  // Residuals of the unreduced block rows.
  const CMat A = b.A.cast<std::complex<double>>();
  const CMat B = b.B.cast<std::complex<double>>();
  const CMat D = b.D.cast<std::complex<double>>();
  const CMat F = b.F.cast<std::complex<double>>();
  const Eigen::VectorXcd gu = gamma * (Gc * u_hat);
  Eigen::VectorXcd r1 = A * f.sigma + B.adjoint() * u_hat + C.adjoint() * f.psi - gu;
  Eigen::VectorXcd r2 = B * f.sigma + D * u_hat + E.adjoint() * f.psi;
  Eigen::VectorXcd r3 = C * f.sigma + E * u_hat + F * f.psi;
  if (t.mean_constraints) {
    r1 = remove_direction(r1, t.trace);
    r3 = remove_direction(r3, b.rotation_moments);
  }
  const double un = u_hat.norm();
  f.residual[0] = r1.norm() / std::max(gu.norm(), un);
  f.residual[1] = r2.norm() / un;
  f.residual[2] = r3.norm() / un;
  return f;
}

double estimate_condition(const TildeMatrices& t, const StressSolver& solver, int iterations) {
  const Index n = t.n_stress();
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n) / std::sqrt(double(n));
  double big = 0, small_inv = 0;
  for (int k = 0; k < iterations; ++k) {
    Eigen::VectorXd y = t.A * x;
    big = y.norm();
    x = y / big;
  }
  x = Eigen::VectorXd::Ones(n) / std::sqrt(double(n));
  for (int k = 0; k < iterations; ++k) {
    Eigen::VectorXd y = solver.solve(x);
    small_inv = y.norm();
    x = y / small_inv;
  }
  return big * small_inv;
}

}  // namespace lsfem

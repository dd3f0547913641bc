#include "lsfem/assemble.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <ostream>
#include <thread>

namespace lsfem {

namespace {

constexpr double kDegenerateArea = 1e-14;

struct CellFields {
  // Values of the six stress basis tensors and six displacement gradients at
  // each quadrature point.
  std::array<std::array<Tensor2, 6>, 3> stress;
  std::array<std::array<Tensor2, 6>, 3> compliance;
  std::array<std::array<double, 6>, 3> disp_value;  // scalar part lambda_a
  std::array<double, 6> stress_div{};                // div of the active row
  std::array<Tensor2, 6> disp_grad;
  TriangleRule rule;
};

CellFields evaluate_cell(const TriMesh& mesh, Index cell, const ElasticParams& params) {
  const double area = mesh.signed_area(cell);
  if (!(area > kDegenerateArea))
    throw NumericalError(fmt::format("degenerate cell {} (area {:.3e})", cell, area));

  const Rt0CellBasis rt = rt0_basis_on_cell(mesh, cell);
  const P1CellBasis p1 = p1_basis_on_cell(mesh, cell);
  CellFields f;
  f.rule = midpoint_rule(mesh, cell);
  for (int row = 0; row < 2; ++row) {
    for (int k = 0; k < 3; ++k) {
      const int i = 3 * row + k;
      f.stress_div[i] = rt.divergence(k);
      for (int q = 0; q < 3; ++q) {
        Tensor2 t = Tensor2::Zero();
        t.row(row) = rt.value(k, f.rule.points[q]).transpose();
        f.stress[q][i] = t;
        f.compliance[q][i] = compliance_apply(t, params);
      }
    }
  }
  for (int comp = 0; comp < 2; ++comp) {
    for (int a = 0; a < 3; ++a) {
      const int i = 3 * comp + a;
      Tensor2 g = Tensor2::Zero();
      g.row(comp) = p1.gradient[a].transpose();
      f.disp_grad[i] = g;
      for (int q = 0; q < 3; ++q) f.disp_value[q][i] = p1.barycentric(f.rule.points[q])[a];
    }
  }
  return f;
}

double frobenius(const Tensor2& a, const Tensor2& b) { return (a.array() * b.array()).sum(); }

const Tensor2& chi() {
  static const Tensor2 c = (Tensor2() << 0, -1, 1, 0).finished();
  return c;
}

}  // namespace

Tensor2 compliance_apply(const Tensor2& tau, const ElasticParams& params) {
  const double mu = params.mu(), lambda = params.lambda();
  const double trace_factor = lambda / (ElasticParams::dim * lambda + 2.0 * mu);
  return (tau - trace_factor * tau.trace() * Tensor2::Identity()) / (2.0 * mu);
}

StressTerms local_stress_terms(const TriMesh& mesh, Index cell, const ElasticParams& params) {
  const CellFields f = evaluate_cell(mesh, cell, params);
  const double area = mesh.signed_area(cell);
  StressTerms t;
  t.compliance.setZero();
  t.skew.setZero();
  t.divergence.setZero();
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      for (int q = 0; q < 3; ++q) {
        t.compliance(i, j) += f.rule.weight * frobenius(f.compliance[q][i], f.compliance[q][j]);
        t.skew(i, j) += f.rule.weight * 0.5 * skew_coordinate(f.stress[q][i]) *
                        skew_coordinate(f.stress[q][j]);
      }
      // div(e_r (x) phi) = e_r div phi: rows must match
      if (i / 3 == j / 3) t.divergence(i, j) = area * f.stress_div[i] * f.stress_div[j];
    }
  }
  return t;
}

LocalBlocks local_blocks(const TriMesh& mesh, Index cell, const ElasticParams& params) {
  const CellFields f = evaluate_cell(mesh, cell, params);
  const StressTerms terms = local_stress_terms(mesh, cell, params);
  const double area = mesh.signed_area(cell);
  const double w = f.rule.weight;

  LocalBlocks b;
  b.A = terms.compliance + terms.divergence + terms.skew;
  b.B.setZero();
  b.C.setZero();
  b.D.setZero();
  b.E.setZero();
  b.G.setZero();
  for (int q = 0; q < 3; ++q) {
    for (int s = 0; s < 6; ++s) {
      b.C(s) += w * frobenius(f.compliance[q][s], chi());
      for (int d = 0; d < 6; ++d) {
        b.B(d, s) -= w * frobenius(f.compliance[q][s], f.disp_grad[d]);
        // -(u, div tau): the displacement component must match the stress row
        if (s / 3 == d / 3) b.G(s, d) -= w * f.disp_value[q][d] * f.stress_div[s];
      }
    }
  }
  for (int d = 0; d < 6; ++d) {
    b.E(d) = -area * frobenius(f.disp_grad[d], chi());
    for (int e = 0; e < 6; ++e) b.D(d, e) = area * frobenius(f.disp_grad[d], f.disp_grad[e]);
  }
  b.F = area * frobenius(chi(), chi());
  return b;
}

namespace {

struct TripletBuffers {
  std::vector<Triplet> A, B, C, D, E, F, G;
};

void scatter_cell(const TriMesh& mesh, const DofMap& dofs, const ElasticParams& params, Index cell,
                  TripletBuffers& out) {
  const LocalBlocks lb = local_blocks(mesh, cell, params);
  std::array<Index, 6> s{}, d{};
  for (int r = 0; r < 2; ++r)
    for (int k = 0; k < 3; ++k) {
      s[3 * r + k] = dofs.stress_local(r, mesh.cell_edges[cell][k]);
      d[3 * r + k] = dofs.disp_local(r, mesh.cells[cell][k]);
    }
  const Index rot = dofs.rot_local(cell);
  for (int i = 0; i < 6; ++i) {
    if (s[i] >= 0) {
      out.C.emplace_back(rot, s[i], lb.C(i));
      for (int j = 0; j < 6; ++j) {
        if (s[j] >= 0) out.A.emplace_back(s[i], s[j], lb.A(i, j));
        if (d[j] >= 0) {
          out.B.emplace_back(d[j], s[i], lb.B(j, i));
          out.G.emplace_back(s[i], d[j], lb.G(i, j));
        }
      }
    }
    if (d[i] >= 0) {
      out.E.emplace_back(rot, d[i], lb.E(i));
      for (int j = 0; j < 6; ++j)
        if (d[j] >= 0) out.D.emplace_back(d[i], d[j], lb.D(i, j));
    }
  }
  out.F.emplace_back(rot, rot, lb.F);
}

SparseMatrix compress(Index rows, Index cols, const std::vector<Triplet>& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

BlockSystem assemble_blocks(const TriMesh& mesh, const DofMap& dofs, const ElasticParams& params,
                            int threads) {
  if (dofs.num_cells() != mesh.num_cells() || dofs.num_edges() != mesh.num_edges() ||
      dofs.num_vertices() != mesh.num_vertices())
    throw InputError("assemble_blocks: dof map does not belong to this mesh");

  // Chunks are concatenated in cell order, so the triplet sequence (and the
  // summation order of duplicates) does not depend on the thread count.
  const Index n_cells = mesh.num_cells();
  const int workers = static_cast<int>(std::clamp<Index>(threads, 1, std::max<Index>(1, n_cells)));
  std::vector<TripletBuffers> chunks(workers);
  auto work = [&](int w) {
    const Index begin = n_cells * w / workers, end = n_cells * (w + 1) / workers;
    for (Index c = begin; c < end; ++c) scatter_cell(mesh, dofs, params, c, chunks[w]);
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  TripletBuffers all;
  using Field = std::vector<Triplet> TripletBuffers::*;
  for (Field field : {&TripletBuffers::A, &TripletBuffers::B, &TripletBuffers::C, &TripletBuffers::D,
                      &TripletBuffers::E, &TripletBuffers::F, &TripletBuffers::G})
    for (auto& c : chunks) (all.*field).insert((all.*field).end(), (c.*field).begin(), (c.*field).end());

  const Index ns = dofs.n_stress(), nd = dofs.n_disp(), nr = dofs.n_rot();
  BlockSystem sys;
  sys.params = params;
  sys.A = compress(ns, ns, all.A);
  sys.B = compress(nd, ns, all.B);
  sys.C = compress(nr, ns, all.C);
  sys.D = compress(nd, nd, all.D);
  sys.E = compress(nr, nd, all.E);
  sys.F = compress(nr, nr, all.F);
  sys.G = compress(ns, nd, all.G);

  sys.trace_moments = Eigen::VectorXd::Zero(ns);
  sys.rotation_moments = Eigen::VectorXd::Zero(nr);
  for (Index c = 0; c < n_cells; ++c) {
    const Rt0CellBasis rt = rt0_basis_on_cell(mesh, c);
    const auto& v = mesh.cells[c];
    const Point centroid = (mesh.vertices[v[0]] + mesh.vertices[v[1]] + mesh.vertices[v[2]]) / 3.0;
    const double area = mesh.signed_area(c);
    for (int r = 0; r < 2; ++r)
      for (int k = 0; k < 3; ++k) {
        const Index s = dofs.stress_local(r, mesh.cell_edges[c][k]);
        // tr(e_r (x) phi) = phi_r, linear, so the centroid value is exact
        if (s >= 0) sys.trace_moments[s] += area * rt.value(k, centroid)[r];
      }
    sys.rotation_moments[dofs.rot_local(c)] = area;
  }
  sys.mean_constraints = dofs.mean_constraints();
  return sys;
}

FullPencil assemble_full_pencil(const BlockSystem& b) {
  const Index ns = b.n_stress(), nd = b.n_disp(), nr = b.n_rot();
  const Index extra = b.mean_constraints ? 2 : 0;
  const Index n = ns + nd + nr + extra;
  std::vector<Triplet> lhs, rhs;
  auto put = [](std::vector<Triplet>& t, const SparseMatrix& m, Index r0, Index c0, bool transpose) {
    for (Index k = 0; k < m.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
        if (transpose)
          t.emplace_back(c0 + it.col(), r0 + it.row(), it.value());
        else
          t.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
      }
  };
  put(lhs, b.A, 0, 0, false);
  put(lhs, b.B, ns, 0, false);
  put(lhs, b.B, ns, 0, true);
  put(lhs, b.C, ns + nd, 0, false);
  put(lhs, b.C, ns + nd, 0, true);
  put(lhs, b.D, ns, ns, false);
  put(lhs, b.E, ns + nd, ns, false);
  put(lhs, b.E, ns + nd, ns, true);
  put(lhs, b.F, ns + nd, ns + nd, false);
  put(rhs, b.G, 0, ns, false);
  if (b.mean_constraints) {
    const Index t_row = ns + nd + nr, m_row = t_row + 1;
    for (Index i = 0; i < ns; ++i) {
      lhs.emplace_back(t_row, i, b.trace_moments[i]);
      lhs.emplace_back(i, t_row, b.trace_moments[i]);
    }
    for (Index i = 0; i < nr; ++i) {
      lhs.emplace_back(m_row, ns + nd + i, b.rotation_moments[i]);
      lhs.emplace_back(ns + nd + i, m_row, b.rotation_moments[i]);
    }
  }
  FullPencil p;
  p.lhs = compress(n, n, lhs);
  p.rhs = compress(n, n, rhs);
  return p;
}

void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  fmt::print(out, "{} {} {}\n", m.rows(), m.cols(), m.nonZeros());
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      fmt::print(out, "{} {} {:.17g}\n", it.row() + 1, it.col() + 1, it.value());
}

void write_matrix_market(std::ostream& out, const Eigen::MatrixXd& m) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  fmt::print(out, "{} {} {}\n", m.rows(), m.cols(), m.size());
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) fmt::print(out, "{} {} {:.17g}\n", i + 1, j + 1, m(i, j));
}

}  // namespace lsfem

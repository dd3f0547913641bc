#include "lsfem/oracle.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace lsfem {

P2Element p2_element(const TriMesh& mesh, Index cell, const ElasticParams& params) {
  const P1CellBasis p1 = p1_basis_on_cell(mesh, cell);
  const TriangleRule rule = midpoint_rule(mesh, cell);
  const double mu = params.mu(), lambda = params.lambda();

  // Gradients of the six scalar P2 basis functions at point x.
  auto grads = [&](const Point& x) {
    const Eigen::Vector3d l = p1.barycentric(x);
    std::array<Eigen::Vector2d, 6> g;
    for (int i = 0; i < 3; ++i) g[i] = (4.0 * l[i] - 1.0) * p1.gradient[i];
    for (int k = 0; k < 3; ++k) {
      const int a = (k + 1) % 3, b = (k + 2) % 3;
      g[3 + k] = 4.0 * (l[a] * p1.gradient[b] + l[b] * p1.gradient[a]);
    }
    return g;
  };

  P2Element el;
  el.stiffness.setZero();
  for (const Point& x : rule.points) {
    const auto g = grads(x);
    for (int ci = 0; ci < 2; ++ci)
      for (int i = 0; i < 6; ++i) {
        Eigen::Matrix2d gu = Eigen::Matrix2d::Zero();
        gu.row(ci) = g[i].transpose();
        const Eigen::Matrix2d eu = 0.5 * (gu + gu.transpose());
        for (int cj = 0; cj < 2; ++cj)
          for (int j = 0; j < 6; ++j) {
            Eigen::Matrix2d gv = Eigen::Matrix2d::Zero();
            gv.row(cj) = g[j].transpose();
            const Eigen::Matrix2d ev = 0.5 * (gv + gv.transpose());
            el.stiffness(6 * ci + i, 6 * cj + j) +=
                rule.weight * (2.0 * mu * (eu.array() * ev.array()).sum() + lambda * gu.trace() * gv.trace());
          }
      }
  }

  // Exact P2 mass matrix, scaled by |K|/180.
  Eigen::Matrix<double, 6, 6> m;
  m << 6, -1, -1, -4, 0, 0,
      -1, 6, -1, 0, -4, 0,
      -1, -1, 6, 0, 0, -4,
      -4, 0, 0, 32, 16, 16,
      0, -4, 0, 16, 32, 16,
      0, 0, -4, 16, 16, 32;
  m *= p1.area / 180.0;
  el.mass.setZero();
  el.mass.topLeftCorner<6, 6>() = m;
  el.mass.bottomRightCorner<6, 6>() = m;
  return el;
}

std::vector<double> primal_oracle(Domain domain, int n, const ElasticParams& params, int n_eigs) {
  if (n_eigs < 1) throw InputError("primal_oracle: n_eigs must be positive");
  const TriMesh mesh =
      generate_mesh(domain == Domain::Square ? MeshFamily::SquareCrossed : MeshFamily::LshapeUniform, n);

  // Scalar nodes: vertices, then edges. Boundary nodes are clamped.
  const Index nv = mesh.num_vertices(), ne = mesh.num_edges();
  std::vector<Index> slot(nv + ne, -1);
  const auto on_boundary = mesh.boundary_vertices();
  Index free_nodes = 0;
  for (Index v = 0; v < nv; ++v)
    if (!on_boundary[v]) slot[v] = free_nodes++;
  for (Index e = 0; e < ne; ++e)
    if (!mesh.edges[e].on_boundary()) slot[nv + e] = free_nodes++;
  const Index ndof = 2 * free_nodes;
  if (ndof <= n_eigs) throw InputError("primal_oracle: mesh too coarse for the requested eigenvalue count");

  std::vector<Triplet> kt, mt;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const P2Element el = p2_element(mesh, c, params);
    std::array<Index, 12> dof{};
    for (int comp = 0; comp < 2; ++comp)
      for (int i = 0; i < 6; ++i) {
        const Index node = i < 3 ? mesh.cells[c][i] : nv + mesh.cell_edges[c][i - 3];
        dof[6 * comp + i] = slot[node] < 0 ? -1 : comp * free_nodes + slot[node];
      }
    for (int i = 0; i < 12; ++i) {
      if (dof[i] < 0) continue;
      for (int j = 0; j < 12; ++j) {
        if (dof[j] < 0) continue;
        kt.emplace_back(dof[i], dof[j], el.stiffness(i, j));
        mt.emplace_back(dof[i], dof[j], el.mass(i, j));
      }
    }
  }
  SparseMatrix K(ndof, ndof), M(ndof, ndof);
  K.setFromTriplets(kt.begin(), kt.end());
  M.setFromTriplets(mt.begin(), mt.end());

  Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower> chol(K);
  if (chol.info() != Eigen::Success)
    throw NumericalError(fmt::format("primal oracle: stiffness factorization failed (n={}, lambda={})", n,
                                     params.lambda()));

  // Shift-invert subspace iteration with Rayleigh-Ritz on (K, M), shift 0.
  const Index p = std::min<Index>(ndof, n_eigs + std::max(8, n_eigs));
  std::mt19937_64 rng(0x0ac1e);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(ndof, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < ndof; ++i) x(i, j) = normal(rng);

  Eigen::VectorXd previous = Eigen::VectorXd::Constant(n_eigs, std::numeric_limits<double>::infinity());
  for (int it = 0; it < 1000; ++it) {
    const Eigen::MatrixXd y = chol.solve(Eigen::MatrixXd(M * x));
    const Eigen::MatrixXd kr = y.transpose() * (K * y);
    const Eigen::MatrixXd mr = y.transpose() * (M * y);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(0.5 * (kr + kr.transpose()),
                                                                   0.5 * (mr + mr.transpose()));
    if (ritz.info() != Eigen::Success) throw NumericalError("primal oracle: Ritz problem failed");
    x = y * ritz.eigenvectors();
    const Eigen::VectorXd theta = ritz.eigenvalues().head(n_eigs);
    const double change = ((theta - previous).cwiseAbs().array() / theta.array()).maxCoeff();
    previous = theta;
    if (change < 1e-13) return {theta.data(), theta.data() + n_eigs};
  }
  throw NumericalError("primal oracle: subspace iteration did not converge");
}

ReferenceEigen richardson_reference(std::span<const int> levels, std::span<const double> values) {
  if (levels.size() != 3 || values.size() != 3)
    throw InputError("richardson_reference: exactly three levels are required");
  if (levels[1] != 2 * levels[0] || levels[2] != 2 * levels[1])
    throw InputError("richardson_reference: levels must double");

  ReferenceEigen r;
  r.levels.assign(levels.begin(), levels.end());
  r.level_values.assign(values.begin(), values.end());
  const double d1 = values[0] - values[1], d2 = values[1] - values[2];
  if (d1 > 0 && d2 > 0 && d1 > d2) {
    r.observed_order = std::log2(d1 / d2);
    const double correction = d2 / (std::exp2(r.observed_order) - 1.0);
    r.value = values[2] - correction;
    r.uncertainty = std::abs(correction);
    r.provenance = fmt::format("richardson extrapolation of levels n={},{},{} with observed order {:.4f}",
                               levels[0], levels[1], levels[2], r.observed_order);
  } else {
    r.value = values[2];
    r.uncertainty = std::max(std::abs(d2), 1e-15 * std::abs(values[2]));
    r.provenance = fmt::format("finest level n={} (non-monotone sequence, no extrapolation)", levels[2]);
  }
  if (!(r.uncertainty > 0)) r.uncertainty = 1e-15 * std::abs(r.value);
  return r;
}

}  // namespace lsfem

#pragma once

#include "lsfem/mesh.hpp"

#include <random>

namespace lsfem::testing {

// Single counterclockwise cell with random vertices in [0, 1]^2, area > 0.05.
inline TriMesh random_triangle(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    TriMesh m;
    for (int k = 0; k < 3; ++k) m.vertices.emplace_back(u(rng), u(rng));
    const Point a = m.vertices[1] - m.vertices[0], b = m.vertices[2] - m.vertices[0];
    const double area = 0.5 * (a.x() * b.y() - a.y() * b.x());
    if (std::abs(area) < 0.05) continue;
    m.cells.push_back(area > 0 ? std::array<Index, 3>{0, 1, 2} : std::array<Index, 3>{0, 2, 1});
    return build_topology(std::move(m));
  }
}

inline bool near(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace lsfem::testing

#pragma once

// Uniform vertex-centred grid helpers shared by the 2-D solvers. Homogeneous
// Neumann conditions are imposed by mirroring: the ghost value outside node 0
// equals the value at node 1.

#include <cstddef>
#include <vector>

#include <Eigen/Sparse>

namespace podlrom::fom::detail {

struct Grid2d {
  std::size_t n = 0;  // points per axis
  double h = 0.0;

  std::size_t size() const { return n * n; }
  std::size_t index(std::size_t i, std::size_t j) const { return j * n + i; }
  double coord(std::size_t i) const { return static_cast<double>(i) * h; }
  std::size_t minus(std::size_t i) const { return i == 0 ? 1 : i - 1; }
  std::size_t plus(std::size_t i) const { return i + 1 == n ? n - 2 : i + 1; }
};

using Triplets = std::vector<Eigen::Triplet<double>>;

// Appends coefficients of  sum_ab D_ab d_a d_b u  (centred, 9-point when
// dxy != 0) scaled by `scale`.
inline void add_anisotropic_laplacian(const Grid2d& g, double dxx, double dxy, double dyy,
                                      double scale, Triplets& out) {
  const double inv_h2 = 1.0 / (g.h * g.h);
  for (std::size_t j = 0; j < g.n; ++j) {
    for (std::size_t i = 0; i < g.n; ++i) {
      const auto row = static_cast<int>(g.index(i, j));
      auto add = [&](std::size_t ii, std::size_t jj, double v) {
        out.emplace_back(row, static_cast<int>(g.index(ii, jj)), scale * v);
      };
      add(g.minus(i), j, dxx * inv_h2);
      add(g.plus(i), j, dxx * inv_h2);
      add(i, g.minus(j), dyy * inv_h2);
      add(i, g.plus(j), dyy * inv_h2);
      add(i, j, -2.0 * (dxx + dyy) * inv_h2);
      if (dxy != 0.0) {
        const double c = 2.0 * dxy * 0.25 * inv_h2;
        add(g.plus(i), g.plus(j), c);
        add(g.minus(i), g.minus(j), c);
        add(g.plus(i), g.minus(j), -c);
        add(g.minus(i), g.plus(j), -c);
      }
    }
  }
}

inline void add_identity(const Grid2d& g, double scale, Triplets& out) {
  for (std::size_t k = 0; k < g.size(); ++k) {
    out.emplace_back(static_cast<int>(k), static_cast<int>(k), scale);
  }
}

// Centred first derivatives  bx d_x u + by d_y u.
inline void add_advection(const Grid2d& g, double bx, double by, Triplets& out) {
  const double inv_2h = 0.5 / g.h;
  for (std::size_t j = 0; j < g.n; ++j) {
    for (std::size_t i = 0; i < g.n; ++i) {
      const auto row = static_cast<int>(g.index(i, j));
      auto add = [&](std::size_t ii, std::size_t jj, double v) {
        out.emplace_back(row, static_cast<int>(g.index(ii, jj)), v);
      };
      add(g.plus(i), j, bx * inv_2h);
      add(g.minus(i), j, -bx * inv_2h);
      add(i, g.plus(j), by * inv_2h);
      add(i, g.minus(j), -by * inv_2h);
    }
  }
}

inline Eigen::SparseMatrix<double> assemble(const Grid2d& g, const Triplets& triplets) {
  Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(g.size()),
                                static_cast<Eigen::Index>(g.size()));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace podlrom::fom::detail

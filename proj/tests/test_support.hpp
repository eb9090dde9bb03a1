#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "podlrom/fom.hpp"
#include "podlrom/random.hpp"

namespace podlrom::testutil {

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("podlrom_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

// Travelling pulse with sigma 0.1 sampled at t = 0.02 k on a mu lattice.
inline Dataset pulse_dataset(double mu_lo, double mu_hi, std::size_t n_mu, std::size_t n_t,
                             std::size_t grid = 256) {
  fom::Pulse1dProblem p;
  p.grid_points = grid;
  p.mu_min = mu_lo;
  p.mu_max = mu_hi;
  const fom::Pulse1dModel model(p);
  const fom::Axis axis{mu_lo, mu_hi, n_mu};
  return fom::build_dataset(model, fom::cartesian_grid(std::span(&axis, 1)),
                            fom::uniform_sample_times(n_t, 1, p.dt));
}

}  // namespace podlrom::testutil

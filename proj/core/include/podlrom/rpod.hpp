#pragma once

// Randomized POD: Gaussian range finder with subspace power iterations,
// followed by an exact SVD of the small projected matrix.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "podlrom/snapshots.hpp"

namespace podlrom::rpod {

struct RsvdConfig {
  std::size_t rank = 16;          // N
  std::size_t oversampling = 8;   // m - N
  std::size_t power_iterations = 2;
  std::uint64_t seed = 0;

  // Throws InvalidArgument unless N >= 1, q <= 2 and N + p <= min(rows, cols).
  void validate(std::size_t rows, std::size_t cols) const;
};

struct SvdResult {
  Eigen::MatrixXd u;
  Eigen::VectorXd singular_values;  // descending
  Eigen::MatrixXd v;
};

// One-sided (Hestenes) Jacobi SVD of a matrix with rows >= cols.
SvdResult jacobi_svd(Eigen::MatrixXd a);

// Left singular vectors and singular values of a wide matrix (rows <= cols),
// computed via a QR of its transpose followed by jacobi_svd of the R factor.
SvdResult left_svd_wide(const Eigen::Ref<const Eigen::MatrixXd>& b);

struct RsvdResult {
  Eigen::MatrixXd basis;            // rows x N, orthonormal columns
  Eigen::VectorXd singular_values;  // N, descending
  std::size_t effective_rank = 0;   // singular values >= 1e-14 * sigma_1
};

RsvdResult rsvd(const Eigen::Ref<const Eigen::MatrixXd>& s, const RsvdConfig& config);

struct ChannelBasis {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd singular_values;
  std::size_t effective_rank = 0;
};

struct PodBasis {
  std::vector<ChannelBasis> channels;
  RsvdConfig config;

  std::size_t rank() const { return config.rank; }
  std::size_t channel_count() const { return channels.size(); }
  ChannelLayout layout() const;
};

// Runs rsvd independently on every channel block of the snapshot matrix
// with the same rank N.
PodBasis compute_basis(const SnapshotMatrix& snapshots, const RsvdConfig& config);

// Channel-blocked intrinsic coordinates: rows [iN, (i+1)N) hold V_i^T S_i.
Eigen::MatrixXd project(const PodBasis& basis, const Eigen::Ref<const Eigen::MatrixXd>& s);
Eigen::MatrixXd lift(const PodBasis& basis, const Eigen::Ref<const Eigen::MatrixXd>& coords);

// Relative error indicator between S and V V^T S, grouped as in the
// snapshot matrix (n_train instances of n_t columns).
double projection_error(const PodBasis& basis, const SnapshotMatrix& snapshots);

// Smallest N in {4, 16, 64, ...} (N <= max_rank) whose projection error is at
// most `tolerance`; returns the largest candidate when none qualifies.
std::size_t select_rank(const SnapshotMatrix& snapshots, double tolerance, RsvdConfig base,
                        std::size_t max_rank);

// Largest deviation of V^T V from the identity over all channels.
double orthonormality_defect(const PodBasis& basis);

// PDRB layout: "PDRB1\0", u64 d, N, oversampling, power iterations, seed, then
// per channel u64 rows, u64 effective rank, V (rows x N column-major f64) and
// the N singular values.
std::vector<std::uint8_t> encode_pdrb(const PodBasis& basis);
PodBasis decode_pdrb(std::vector<std::uint8_t> bytes);
void write_pdrb(const std::filesystem::path& path, const PodBasis& basis);
PodBasis read_pdrb(const std::filesystem::path& path);

}  // namespace podlrom::rpod

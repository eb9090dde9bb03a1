#include "podlrom/rpod.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/QR>

#include "podlrom/binary_io.hpp"
#include "podlrom/error.hpp"
#include "podlrom/log.hpp"
#include "podlrom/metrics.hpp"
#include "podlrom/random.hpp"

namespace podlrom::rpod {
namespace {

constexpr double kRankTolerance = 1e-14;

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

// Makes the largest-magnitude entry of every column positive.
void fix_signs(Eigen::MatrixXd& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index arg = 0;
    v.col(j).cwiseAbs().maxCoeff(&arg);
    if (v(arg, j) < 0.0) v.col(j) *= -1.0;
  }
}

}  // namespace

void RsvdConfig::validate(std::size_t rows, std::size_t cols) const {
  if (rank < 1) throw InvalidArgument("rsvd: rank N must be >= 1");
  if (power_iterations > 2) throw InvalidArgument("rsvd: power iterations q must be 0, 1 or 2");
  if (rank + oversampling > std::min(rows, cols)) {
    throw InvalidArgument("rsvd: N + oversampling = " + std::to_string(rank + oversampling) +
                          " exceeds min(rows, cols) = " + std::to_string(std::min(rows, cols)));
  }
}

RsvdResult rsvd(const Eigen::Ref<const Eigen::MatrixXd>& s, const RsvdConfig& config) {
  config.validate(static_cast<std::size_t>(s.rows()), static_cast<std::size_t>(s.cols()));
  if (!s.allFinite()) throw InvalidArgument("rsvd: input contains NaN or Inf");

  const auto n = static_cast<Eigen::Index>(config.rank);
  const auto m = static_cast<Eigen::Index>(config.rank + config.oversampling);

  Rng rng(config.seed);
  Eigen::MatrixXd omega(s.cols(), m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < s.cols(); ++i) omega(i, j) = rng.normal();
  }

  // Subspace iteration: re-orthonormalize after every product with S or S^T.
  Eigen::MatrixXd q = orthonormalize(s * omega);
  for (std::size_t it = 0; it < config.power_iterations; ++it) {
    const Eigen::MatrixXd z = orthonormalize(s.transpose() * q);
    q = orthonormalize(s * z);
  }
  q.conservativeResize(Eigen::NoChange, n);

  const Eigen::MatrixXd b = q.transpose() * s;
  SvdResult small = left_svd_wide(b);

  RsvdResult out;
  out.basis = q * small.u;
  fix_signs(out.basis);
  out.singular_values = std::move(small.singular_values);
  const double sigma1 = out.singular_values.size() > 0 ? out.singular_values[0] : 0.0;
  out.effective_rank = 0;
  for (Eigen::Index k = 0; k < out.singular_values.size(); ++k) {
    if (out.singular_values[k] >= kRankTolerance * sigma1 && sigma1 > 0.0) ++out.effective_rank;
  }
  if (out.effective_rank < config.rank) {
    warn("rsvd: numerical rank " + std::to_string(out.effective_rank) + " is below requested N = " +
         std::to_string(config.rank));
  }
  return out;
}

ChannelLayout PodBasis::layout() const {
  std::vector<std::size_t> rows;
  rows.reserve(channels.size());
  for (const auto& c : channels) rows.push_back(static_cast<std::size_t>(c.vectors.rows()));
  return ChannelLayout(std::move(rows));
}

PodBasis compute_basis(const SnapshotMatrix& snapshots, const RsvdConfig& config) {
  snapshots.validate();
  PodBasis basis;
  basis.config = config;
  for (std::size_t i = 0; i < snapshots.layout.channels(); ++i) {
    RsvdResult r = rsvd(snapshots.channel(i), config);
    basis.channels.push_back({std::move(r.basis), std::move(r.singular_values), r.effective_rank});
  }
  return basis;
}

Eigen::MatrixXd project(const PodBasis& basis, const Eigen::Ref<const Eigen::MatrixXd>& s) {
  const ChannelLayout layout = basis.layout();
  if (static_cast<std::size_t>(s.rows()) != layout.total()) {
    throw InvalidArgument("project: matrix has " + std::to_string(s.rows()) + " rows, basis expects " +
                          std::to_string(layout.total()));
  }
  const auto n = static_cast<Eigen::Index>(basis.rank());
  Eigen::MatrixXd out(n * static_cast<Eigen::Index>(basis.channel_count()), s.cols());
  for (std::size_t i = 0; i < basis.channel_count(); ++i) {
    const auto& v = basis.channels[i].vectors;
    out.middleRows(static_cast<Eigen::Index>(i) * n, n).noalias() =
        v.transpose() * s.middleRows(static_cast<Eigen::Index>(layout.offset(i)), v.rows());
  }
  return out;
}

Eigen::MatrixXd lift(const PodBasis& basis, const Eigen::Ref<const Eigen::MatrixXd>& coords) {
  const auto n = static_cast<Eigen::Index>(basis.rank());
  if (coords.rows() != n * static_cast<Eigen::Index>(basis.channel_count())) {
    throw InvalidArgument("lift: coordinates have " + std::to_string(coords.rows()) + " rows, expected " +
                          std::to_string(n * static_cast<Eigen::Index>(basis.channel_count())));
  }
  const ChannelLayout layout = basis.layout();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(layout.total()), coords.cols());
  for (std::size_t i = 0; i < basis.channel_count(); ++i) {
    const auto& v = basis.channels[i].vectors;
    out.middleRows(static_cast<Eigen::Index>(layout.offset(i)), v.rows()).noalias() =
        v * coords.middleRows(static_cast<Eigen::Index>(i) * n, n);
  }
  return out;
}

double projection_error(const PodBasis& basis, const SnapshotMatrix& snapshots) {
  if (snapshots.samples() == 0) throw InvalidArgument("projection_error: empty dataset");
  const Eigen::MatrixXd approx = lift(basis, project(basis, snapshots.data));
  return eval::error_indicator(snapshots.data, approx, snapshots.n_train, snapshots.n_t);
}

std::size_t select_rank(const SnapshotMatrix& snapshots, double tolerance, RsvdConfig base,
                        std::size_t max_rank) {
  std::size_t chosen = 0;
  for (std::size_t n = 4; n <= max_rank; n *= 4) {
    RsvdConfig cfg = base;
    cfg.rank = n;
    const std::size_t limit = std::min<std::size_t>(snapshots.layout.total(), snapshots.samples());
    if (n > limit) break;
    cfg.oversampling = std::min(base.oversampling, limit - n);
    chosen = n;
    if (projection_error(compute_basis(snapshots, cfg), snapshots) <= tolerance) return n;
  }
  if (chosen == 0) throw InvalidArgument("select_rank: no admissible square rank <= " + std::to_string(max_rank));
  return chosen;
}

double orthonormality_defect(const PodBasis& basis) {
  double worst = 0.0;
  for (const auto& c : basis.channels) {
    const Eigen::MatrixXd g = c.vectors.transpose() * c.vectors;
    const Eigen::MatrixXd e = g - Eigen::MatrixXd::Identity(g.rows(), g.cols());
    worst = std::max(worst, e.cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<std::uint8_t> encode_pdrb(const PodBasis& basis) {
  io::BinaryWriter w;
  w.magic("PDRB1");
  w.u64(basis.channel_count());
  w.u64(basis.config.rank);
  w.u64(basis.config.oversampling);
  w.u64(basis.config.power_iterations);
  w.u64(basis.config.seed);
  for (const auto& c : basis.channels) {
    if (static_cast<std::size_t>(c.vectors.cols()) != basis.rank() ||
        static_cast<std::size_t>(c.singular_values.size()) != basis.rank()) {
      throw InvalidArgument("encode_pdrb: channel shape disagrees with rank");
    }
    w.u64(static_cast<std::uint64_t>(c.vectors.rows()));
    w.u64(c.effective_rank);
    w.f64s(std::span(c.vectors.data(), static_cast<std::size_t>(c.vectors.size())));
    w.f64s(std::span(c.singular_values.data(), static_cast<std::size_t>(c.singular_values.size())));
  }
  return w.buffer();
}

PodBasis decode_pdrb(std::vector<std::uint8_t> bytes) {
  io::BinaryReader r(std::move(bytes));
  r.expect_magic("PDRB1");
  PodBasis basis;
  const std::uint64_t d = r.u64();
  if (d == 0 || d > 64) throw FormatError("implausible channel count " + std::to_string(d));
  basis.config.rank = r.u64();
  basis.config.oversampling = r.u64();
  basis.config.power_iterations = r.u64();
  basis.config.seed = r.u64();
  const auto n = static_cast<Eigen::Index>(basis.config.rank);
  for (std::uint64_t i = 0; i < d; ++i) {
    ChannelBasis c;
    const std::uint64_t rows = r.u64();
    c.effective_rank = r.u64();
    if (rows * basis.config.rank > r.remaining() / 8) throw FormatError("truncated file: basis block");
    c.vectors.resize(static_cast<Eigen::Index>(rows), n);
    r.f64s_into(std::span(c.vectors.data(), static_cast<std::size_t>(c.vectors.size())));
    c.singular_values.resize(n);
    r.f64s_into(std::span(c.singular_values.data(), static_cast<std::size_t>(n)));
    basis.channels.push_back(std::move(c));
  }
  r.expect_end();
  return basis;
}

void write_pdrb(const std::filesystem::path& path, const PodBasis& basis) {
  io::BinaryWriter w;
  w.bytes(encode_pdrb(basis));
  w.save(path);
}

PodBasis read_pdrb(const std::filesystem::path& path) { return decode_pdrb(io::read_file(path)); }

}  // namespace podlrom::rpod

#include <algorithm>
#include <string>

#include "podlrom/dlrom.hpp"
#include "podlrom/log.hpp"

namespace podlrom::dlrom {
namespace {

// Affine map of row group [first, first + count) with (lo, hi) -> (0, 1).
// A degenerate range maps to 0 and back to lo.
void scale_rows(Eigen::Ref<Eigen::MatrixXd> m, Eigen::Index first, Eigen::Index count, double lo, double hi,
                bool inverse) {
  auto block = m.middleRows(first, count);
  const double range = hi - lo;
  if (!(range > 0.0)) {
    if (inverse) {
      block.setConstant(lo);
    } else {
      block.setZero();
    }
    return;
  }
  if (inverse) {
    block = (block.array() * range + lo).matrix();
  } else {
    block = ((block.array() - lo) / range).matrix();
  }
}

std::size_t rank_from(const Eigen::Ref<const Eigen::MatrixXd>& coords, std::size_t channels) {
  if (channels == 0 || coords.rows() % static_cast<Eigen::Index>(channels) != 0) {
    throw InvalidArgument("coordinate rows " + std::to_string(coords.rows()) + " not divisible into " +
                          std::to_string(channels) + " channels");
  }
  return static_cast<std::size_t>(coords.rows()) / channels;
}

}  // namespace

NormalizationStats compute_stats(const Eigen::Ref<const Eigen::MatrixXd>& params,
                                 const Eigen::Ref<const Eigen::MatrixXd>& coords, std::size_t channels) {
  if (params.cols() == 0 || coords.cols() == 0) throw InvalidArgument("compute_stats: empty training split");
  const auto n = static_cast<Eigen::Index>(rank_from(coords, channels));
  NormalizationStats s;
  for (Eigen::Index i = 0; i < params.rows(); ++i) {
    s.param_min.push_back(params.row(i).minCoeff());
    s.param_max.push_back(params.row(i).maxCoeff());
    if (s.param_max.back() == s.param_min.back()) {
      warn("normalization: parameter feature " + std::to_string(i) + " is constant; it maps to 0");
    }
  }
  for (std::size_t k = 0; k < channels; ++k) {
    const auto block = coords.middleRows(static_cast<Eigen::Index>(k) * n, n);
    s.coord_min.push_back(block.minCoeff());
    s.coord_max.push_back(block.maxCoeff());
    if (s.coord_max.back() == s.coord_min.back()) {
      warn("normalization: coordinate channel " + std::to_string(k) + " is constant; it maps to 0");
    }
  }
  return s;
}

namespace {

Eigen::MatrixXd apply_params(const Eigen::Ref<const Eigen::MatrixXd>& params, const NormalizationStats& stats,
                             bool inverse) {
  if (stats.empty()) throw InvalidArgument("normalization statistics are missing");
  if (static_cast<std::size_t>(params.rows()) != stats.param_min.size()) {
    throw InvalidArgument("parameter matrix has " + std::to_string(params.rows()) + " rows, statistics cover " +
                          std::to_string(stats.param_min.size()));
  }
  Eigen::MatrixXd out = params;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    scale_rows(out, i, 1, stats.param_min[static_cast<std::size_t>(i)],
               stats.param_max[static_cast<std::size_t>(i)], inverse);
  }
  return out;
}

Eigen::MatrixXd apply_coords(const Eigen::Ref<const Eigen::MatrixXd>& coords, const NormalizationStats& stats,
                             bool inverse) {
  if (stats.empty()) throw InvalidArgument("normalization statistics are missing");
  const std::size_t channels = stats.coord_min.size();
  const auto n = static_cast<Eigen::Index>(rank_from(coords, channels));
  Eigen::MatrixXd out = coords;
  for (std::size_t k = 0; k < channels; ++k) {
    scale_rows(out, static_cast<Eigen::Index>(k) * n, n, stats.coord_min[k], stats.coord_max[k], inverse);
  }
  return out;
}

}  // namespace

Eigen::MatrixXd normalize_params(const Eigen::Ref<const Eigen::MatrixXd>& params, const NormalizationStats& stats) {
  return apply_params(params, stats, false);
}

Eigen::MatrixXd denormalize_params(const Eigen::Ref<const Eigen::MatrixXd>& params, const NormalizationStats& stats) {
  return apply_params(params, stats, true);
}

Eigen::MatrixXd normalize_coords(const Eigen::Ref<const Eigen::MatrixXd>& coords, const NormalizationStats& stats) {
  return apply_coords(coords, stats, false);
}

Eigen::MatrixXd denormalize_coords(const Eigen::Ref<const Eigen::MatrixXd>& coords, const NormalizationStats& stats) {
  return apply_coords(coords, stats, true);
}

}  // namespace podlrom::dlrom

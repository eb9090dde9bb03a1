#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/QR>

#include "podlrom/error.hpp"
#include "podlrom/rpod.hpp"

namespace podlrom::rpod {

SvdResult jacobi_svd(Eigen::MatrixXd a) {
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  if (rows < cols) throw InvalidArgument("jacobi_svd: expected rows >= cols");

  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(cols, cols);
  const double eps = std::numeric_limits<double>::epsilon();
  constexpr int kMaxSweeps = 80;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < cols; ++p) {
      for (Eigen::Index q = p + 1; q < cols; ++q) {
        const double alpha = a.col(p).squaredNorm();
        const double beta = a.col(q).squaredNorm();
        const double gamma = a.col(p).dot(a.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index i = 0; i < rows; ++i) {
          const double ap = a(i, p);
          const double aq = a(i, q);
          a(i, p) = c * ap - s * aq;
          a(i, q) = s * ap + c * aq;
        }
        for (Eigen::Index i = 0; i < cols; ++i) {
          const double vp = v(i, p);
          const double vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  Eigen::VectorXd sigma(cols);
  for (Eigen::Index j = 0; j < cols; ++j) sigma[j] = a.col(j).norm();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(cols));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return sigma[x] > sigma[y]; });

  SvdResult out;
  out.u.resize(rows, cols);
  out.v.resize(cols, cols);
  out.singular_values.resize(cols);
  for (Eigen::Index k = 0; k < cols; ++k) {
    const Eigen::Index j = order[static_cast<std::size_t>(k)];
    out.singular_values[k] = sigma[j];
    out.v.col(k) = v.col(j);
    if (sigma[j] > 0.0) {
      out.u.col(k) = a.col(j) / sigma[j];
    } else {
      out.u.col(k).setZero();
    }
  }
  return out;
}

SvdResult left_svd_wide(const Eigen::Ref<const Eigen::MatrixXd>& b) {
  if (b.rows() > b.cols()) throw InvalidArgument("left_svd_wide: expected rows <= cols");
  // B^T = Q2 R  =>  B = R^T Q2^T; if R = U S W^T then B = W S (Q2 U)^T, so the
  // left singular vectors of B are the right singular vectors of R.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(b.transpose());
  const Eigen::Index n = b.rows();
  Eigen::MatrixXd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  SvdResult small = jacobi_svd(std::move(r));
  SvdResult out;
  out.u = std::move(small.v);
  out.singular_values = std::move(small.singular_values);
  return out;
}

}  // namespace podlrom::rpod

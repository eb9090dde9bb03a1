#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "podlrom/error.hpp"
#include "podlrom/log.hpp"
#include "podlrom/rpod.hpp"
#include "test_support.hpp"

using namespace podlrom;
using testutil::gaussian;

namespace {

Eigen::MatrixXd orthonormal(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(rows, cols, seed));
  return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

// 256 x 400 with singular values 2^-k.
Eigen::MatrixXd decaying_spectrum() {
  const Eigen::Index r = 256;
  Eigen::VectorXd s(r);
  for (Eigen::Index k = 0; k < r; ++k) s(k) = std::pow(2.0, -static_cast<double>(k));
  return orthonormal(256, r, 11) * s.asDiagonal() * orthonormal(400, r, 12).transpose();
}

double truncation_error(const Eigen::MatrixXd& s, const Eigen::MatrixXd& v) {
  return (s - v * (v.transpose() * s)).norm() / s.norm();
}

SnapshotMatrix as_snapshots(const Eigen::MatrixXd& s, std::size_t n_t = 1) {
  SnapshotMatrix m;
  m.data = s;
  m.layout = ChannelLayout({static_cast<std::size_t>(s.rows())});
  m.n_t = n_t;
  m.n_train = static_cast<std::size_t>(s.cols()) / n_t;
  return m;
}

}  // namespace

TEST(JacobiSvd, MatchesEigenOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::MatrixXd a = gaussian(30, 12, seed);
    const auto mine = rpod::jacobi_svd(a);
    Eigen::JacobiSVD<Eigen::MatrixXd> oracle(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    EXPECT_LT((mine.singular_values - oracle.singularValues()).cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::MatrixXd rebuilt = mine.u * mine.singular_values.asDiagonal() * mine.v.transpose();
    EXPECT_LT((rebuilt - a).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((mine.u.transpose() * mine.u - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(JacobiSvd, WideMatrixLeftVectors) {
  const Eigen::MatrixXd b = gaussian(8, 200, 3);
  const auto r = rpod::left_svd_wide(b);
  Eigen::BDCSVD<Eigen::MatrixXd> oracle(b, Eigen::ComputeThinU);
  EXPECT_LT((r.singular_values - oracle.singularValues()).cwiseAbs().maxCoeff(), 1e-11);
  // Columns agree up to sign.
  for (Eigen::Index k = 0; k < 8; ++k) {
    EXPECT_NEAR(std::abs(r.u.col(k).dot(oracle.matrixU().col(k))), 1.0, 1e-10);
  }
}

TEST(Rsvd, ExactRankTwentyRecovery) {
  const Eigen::MatrixXd s = gaussian(300, 20, 1) * gaussian(20, 500, 2);
  const auto r = rpod::rsvd(s, rpod::RsvdConfig{20, 8, 2, 7});
  EXPECT_LE(truncation_error(s, r.basis), 1e-10);
  EXPECT_EQ(r.effective_rank, 20u);
}

TEST(Rsvd, IdentitySpectrum) {
  const Eigen::MatrixXd s = Eigen::MatrixXd::Identity(24, 24);
  const auto r = rpod::rsvd(s, rpod::RsvdConfig{24, 0, 2, 0});
  EXPECT_LT((r.singular_values.array() - 1.0).abs().maxCoeff(), 1e-12);
  EXPECT_LT((r.basis.transpose() * r.basis - Eigen::MatrixXd::Identity(24, 24)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Rsvd, DecayingSpectrumCloseToExactSvd) {
  const Eigen::MatrixXd s = decaying_spectrum();
  Eigen::BDCSVD<Eigen::MatrixXd> oracle(s, Eigen::ComputeThinU);
  const double exact = truncation_error(s, oracle.matrixU().leftCols(16));
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = rpod::rsvd(s, rpod::RsvdConfig{16, 8, 2, seed});
    const double err = truncation_error(s, r.basis);
    EXPECT_GE(err, exact * (1.0 - 1e-9));  // Eckart-Young
    ratios.push_back(err / exact);
  }
  std::sort(ratios.begin(), ratios.end());
  EXPECT_LE(ratios[2], 1.5);
}

TEST(Rsvd, SingularValuesMatchOracleOnLeadingModes) {
  const Eigen::MatrixXd s = decaying_spectrum();
  const auto r = rpod::rsvd(s, rpod::RsvdConfig{16, 8, 2, 3});
  for (Eigen::Index k = 0; k < 10; ++k) {
    EXPECT_NEAR(r.singular_values(k) / std::pow(2.0, -static_cast<double>(k)), 1.0, 1e-6) << k;
  }
  for (Eigen::Index k = 1; k < 16; ++k) EXPECT_LE(r.singular_values(k), r.singular_values(k - 1));
}

TEST(Rsvd, DeterministicAndSignFixed) {
  const Eigen::MatrixXd s = gaussian(60, 90, 4);
  const auto a = rpod::rsvd(s, rpod::RsvdConfig{8, 4, 1, 5});
  const auto b = rpod::rsvd(s, rpod::RsvdConfig{8, 4, 1, 5});
  EXPECT_EQ(a.basis, b.basis);
  for (Eigen::Index k = 0; k < 8; ++k) {
    Eigen::Index arg = 0;
    a.basis.col(k).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(a.basis(arg, k), 0.0);
  }
}

TEST(Rsvd, RankDeficiencyWarnsAndReportsEffectiveRank) {
  std::vector<std::string> messages;
  const auto previous = set_warning_handler([&](std::string_view m) { messages.emplace_back(m); });
  const Eigen::MatrixXd s = gaussian(40, 3, 1) * gaussian(3, 50, 2);
  const auto r = rpod::rsvd(s, rpod::RsvdConfig{6, 2, 2, 0});
  set_warning_handler(previous);
  EXPECT_EQ(r.effective_rank, 3u);
  EXPECT_EQ(messages.size(), 1u);
}

TEST(Rsvd, ConfigValidation) {
  EXPECT_THROW(rpod::RsvdConfig({0, 0, 0, 0}).validate(10, 10), InvalidArgument);
  EXPECT_THROW(rpod::RsvdConfig({4, 8, 0, 0}).validate(10, 100), InvalidArgument);
  EXPECT_THROW(rpod::RsvdConfig({4, 0, 3, 0}).validate(10, 100), InvalidArgument);
  EXPECT_NO_THROW(rpod::RsvdConfig({4, 6, 2, 0}).validate(10, 100));
}

TEST(Projection, RangeIsReproduced) {
  const Eigen::MatrixXd data = gaussian(50, 80, 9);
  const auto basis = rpod::compute_basis(as_snapshots(data), rpod::RsvdConfig{16, 8, 2, 0});
  const Eigen::MatrixXd v = basis.channels[0].vectors;
  const Eigen::VectorXd in_range = v * gaussian(16, 1, 3);
  const Eigen::MatrixXd back = rpod::lift(basis, rpod::project(basis, in_range));
  EXPECT_LT((back - in_range).cwiseAbs().maxCoeff(), 1e-12);

  EXPECT_EQ(rpod::project(basis, Eigen::MatrixXd::Zero(50, 2)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(rpod::lift(basis, Eigen::MatrixXd::Zero(16, 2)).cwiseAbs().maxCoeff(), 0.0);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(16);
  e(5) = 1.0;
  EXPECT_EQ(rpod::lift(basis, e), v.col(5));

  const Eigen::MatrixXd x = gaussian(16, 4, 5);
  EXPECT_LT((rpod::project(basis, rpod::lift(basis, x)) - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Projection, Pythagoras) {
  const Eigen::MatrixXd data = gaussian(50, 80, 9);
  const auto basis = rpod::compute_basis(as_snapshots(data), rpod::RsvdConfig{16, 8, 2, 0});
  const Eigen::VectorXd s = gaussian(50, 1, 21);
  const Eigen::VectorXd p = rpod::lift(basis, rpod::project(basis, s));
  EXPECT_NEAR((s - p).squaredNorm() + p.squaredNorm(), s.squaredNorm(), 1e-10 * s.squaredNorm());
}

TEST(Projection, ChannelBlockedLayout) {
  Eigen::MatrixXd data(30, 40);
  data.topRows(10) = gaussian(10, 40, 1);
  data.bottomRows(20) = gaussian(20, 40, 2);
  SnapshotMatrix s;
  s.data = data;
  s.layout = ChannelLayout({10, 20});
  s.n_train = 40;
  s.n_t = 1;
  const auto basis = rpod::compute_basis(s, rpod::RsvdConfig{4, 2, 2, 0});
  ASSERT_EQ(basis.channel_count(), 2u);
  const Eigen::MatrixXd c = rpod::project(basis, data);
  ASSERT_EQ(c.rows(), 8);
  EXPECT_LT((c.topRows(4) - basis.channels[0].vectors.transpose() * data.topRows(10)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((c.bottomRows(4) - basis.channels[1].vectors.transpose() * data.bottomRows(20)).cwiseAbs().maxCoeff(),
            1e-14);
  EXPECT_LE(rpod::orthonormality_defect(basis), 1e-10);
  EXPECT_THROW(rpod::project(basis, Eigen::MatrixXd::Zero(29, 2)), InvalidArgument);
}

TEST(Projection, LiftOfProjectionIsOptimalReconstruction) {
  const Dataset ds = testutil::pulse_dataset(0.2, 0.5, 6, 10);
  const auto basis = rpod::compute_basis(ds.snapshots, rpod::RsvdConfig{16, 8, 2, 0});
  const Eigen::MatrixXd& v = basis.channels[0].vectors;
  const Eigen::MatrixXd direct = v * (v.transpose() * ds.snapshots.data);
  EXPECT_LT((rpod::lift(basis, rpod::project(basis, ds.snapshots.data)) - direct).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(ProjectionError, ExactSpanGivesZero) {
  const Eigen::MatrixXd data = gaussian(30, 5, 1) * gaussian(5, 40, 2);
  const auto basis = rpod::compute_basis(as_snapshots(data, 4), rpod::RsvdConfig{8, 2, 2, 0});
  EXPECT_LT(rpod::projection_error(basis, as_snapshots(data, 4)), 1e-12);
}

TEST(ProjectionError, MonotoneInRankAndFullRankExact) {
  const Dataset ds = testutil::pulse_dataset(0.2, 0.8, 10, 30, 64);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t n : {4, 16, 64}) {
    const std::size_t p = n == 64 ? 0 : 8;
    const auto basis = rpod::compute_basis(ds.snapshots, rpod::RsvdConfig{n, p, 2, 0});
    const double e = rpod::projection_error(basis, ds.snapshots);
    EXPECT_LE(e, previous * (1.0 + 1e-12)) << n;
    previous = e;
  }
  EXPECT_LE(previous, 1e-10);
}

TEST(ProjectionError, SelectRankPicksSmallestAdmissible) {
  const Dataset ds = testutil::pulse_dataset(0.2, 0.8, 10, 30, 64);
  const std::size_t n = rpod::select_rank(ds.snapshots, 1e-4, rpod::RsvdConfig{}, 64);
  const auto basis = rpod::compute_basis(ds.snapshots, rpod::RsvdConfig{n, n == 64 ? 0u : 8u, 2, 0});
  EXPECT_LE(rpod::projection_error(basis, ds.snapshots), 1e-4);
  if (n > 4) {
    const auto smaller = rpod::compute_basis(ds.snapshots, rpod::RsvdConfig{n / 4, 8, 2, 0});
    EXPECT_GT(rpod::projection_error(smaller, ds.snapshots), 1e-4);
  }
}

TEST(Pdrb, RoundTripAndCorruption) {
  testutil::TempDir dir("pdrb");
  const Eigen::MatrixXd data = gaussian(30, 40, 1);
  const auto basis = rpod::compute_basis(as_snapshots(data), rpod::RsvdConfig{4, 3, 1, 17});
  rpod::write_pdrb(dir / "b.pdrb", basis);
  const auto back = rpod::read_pdrb(dir / "b.pdrb");
  EXPECT_EQ(back.channels[0].vectors, basis.channels[0].vectors);
  EXPECT_EQ(back.channels[0].singular_values, basis.channels[0].singular_values);
  EXPECT_EQ(back.config.seed, 17u);
  EXPECT_EQ(back.config.oversampling, 3u);
  EXPECT_EQ(rpod::encode_pdrb(back), rpod::encode_pdrb(basis));
  auto bytes = rpod::encode_pdrb(basis);
  bytes[2] = 'Z';
  EXPECT_THROW(rpod::decode_pdrb(bytes), FormatError);
}

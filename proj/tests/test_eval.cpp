#include <gtest/gtest.h>

#include <cmath>
#include <iostream>
#include <sstream>
#include <string>

#include "podlrom/error.hpp"
#include "podlrom/metrics.hpp"
#include "podlrom/studies.hpp"
#include "test_support.hpp"

using namespace podlrom;
using namespace podlrom::eval;

namespace {

dlrom::ArchitectureOptions small_options() {
  dlrom::ArchitectureOptions o;
  o.kernel = 3;
  o.filters = {4, 8};
  o.dfnn_width = 20;
  o.dfnn_depth = 2;
  return o;
}

ModelRecipe small_recipe(std::size_t epochs) {
  ModelRecipe r;
  r.rsvd.oversampling = 0;
  r.architecture = small_options();
  r.latent = 2;
  r.train.batch_size = 20;
  r.train.max_epochs = epochs;
  r.train.patience = epochs;
  return r;
}

}  // namespace

TEST(ErrorIndicator, ExactApproximationIsZero) {
  const Eigen::MatrixXd u = testutil::gaussian(10, 6, 1);
  EXPECT_EQ(error_indicator(u, u, 2, 3), 0.0);
}

TEST(ErrorIndicator, ZeroApproximationIsOne) {
  const Eigen::MatrixXd u = testutil::gaussian(10, 6, 2);
  EXPECT_DOUBLE_EQ(error_indicator(u, Eigen::MatrixXd::Zero(10, 6), 3, 2), 1.0);
}

TEST(ErrorIndicator, HandComputedCase) {
  Eigen::MatrixXd u(2, 1), v(2, 1);
  u << 3, 4;
  v << 3, 0;
  EXPECT_DOUBLE_EQ(error_indicator(u, v, 1, 1), 0.8);
}

TEST(ErrorIndicator, AggregatesOverTimeThenAveragesInstances) {
  // Instance 0: ||u|| = 5, ||u - v|| = 4. Instance 1: ||u|| = 2, ||u - v|| = 1.
  Eigen::MatrixXd u(1, 4), v(1, 4);
  u << 3, 4, 2, 0;
  v << 3, 0, 1, 0;
  EXPECT_DOUBLE_EQ(error_indicator(u, v, 2, 2), 0.5 * (0.8 + 0.5));
  const auto per = instance_errors(u, v, 2, 2);
  ASSERT_EQ(per.size(), 2u);
  EXPECT_DOUBLE_EQ(per[1], 0.5);
}

TEST(ErrorIndicator, ScalingInvariant) {
  const Eigen::MatrixXd u = testutil::gaussian(7, 8, 3);
  const Eigen::MatrixXd v = testutil::gaussian(7, 8, 4);
  EXPECT_NEAR(error_indicator(u, v, 4, 2), error_indicator(6.5 * u, 6.5 * v, 4, 2), 1e-14);
}

TEST(ErrorIndicator, RejectsBadInput) {
  Eigen::MatrixXd u = testutil::gaussian(4, 4, 5);
  u.col(2).setZero();
  u.col(3).setZero();
  EXPECT_THROW(error_indicator(u, u, 2, 2), InvalidArgument);
  EXPECT_THROW(error_indicator(u, u, 0, 0), InvalidArgument);
  EXPECT_THROW(error_indicator(u, u, 3, 2), InvalidArgument);
  EXPECT_THROW(error_indicator(u, Eigen::MatrixXd::Zero(4, 3), 2, 2), InvalidArgument);
}

TEST(ErrorField, ExactIsZeroAndScalingInvariant) {
  const Eigen::MatrixXd u = testutil::gaussian(12, 5, 6);
  const Eigen::MatrixXd v = testutil::gaussian(12, 5, 7);
  EXPECT_EQ(relative_error_field(u, u, 2).cwiseAbs().maxCoeff(), 0.0);
  const Eigen::VectorXd a = relative_error_field(u, v, 3);
  const Eigen::VectorXd b = relative_error_field(0.25 * u, 0.25 * v, 3);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_THROW(relative_error_field(u, v, 5), InvalidArgument);
}

TEST(ErrorField, DenominatorIsRmsOverTime) {
  Eigen::MatrixXd u(2, 2), v(2, 2);
  u << 3, 0, 4, 0;  // ||u^0|| = 5, ||u^1|| = 0, rms = sqrt(12.5)
  v << 3, 0, 3, 0;
  const Eigen::VectorXd e = relative_error_field(u, v, 0);
  EXPECT_DOUBLE_EQ(e(0), 0.0);
  EXPECT_DOUBLE_EQ(e(1), 1.0 / std::sqrt(12.5));
}

TEST(ErrorField, MaximumSitsWhereTheErrorIsLargest) {
  const Dataset d = testutil::pulse_dataset(0.3, 0.3, 1, 50);
  const Eigen::MatrixXd u = d.snapshots.data;
  const Dataset shifted = testutil::pulse_dataset(0.31, 0.31, 1, 50);
  const Eigen::MatrixXd v = shifted.snapshots.data;
  const Eigen::VectorXd e = relative_error_field(u, v, 49);
  Eigen::Index ie = 0, id = 0;
  e.maxCoeff(&ie);
  (u.col(49) - v.col(49)).cwiseAbs().maxCoeff(&id);
  EXPECT_EQ(ie, id);
}

TEST(FieldStats, FrozenQuartiles) {
  Eigen::VectorXd x(8);
  x << 3, 1, 4, 1, 5, 9, 2, 6;
  const FieldStats s = field_stats(x);
  EXPECT_DOUBLE_EQ(s.mean, 3.875);
  EXPECT_DOUBLE_EQ(s.q1, 1.75);
  EXPECT_DOUBLE_EQ(s.median, 3.5);
  EXPECT_DOUBLE_EQ(s.q3, 5.25);
  EXPECT_EQ(s.min, 1.0);
  EXPECT_EQ(s.max, 9.0);
  EXPECT_THROW(field_stats(Eigen::VectorXd()), InvalidArgument);
}

TEST(Reports, ErrorReportCsvIsSchemaStable) {
  Eigen::MatrixXd u(2, 2), v(2, 2);
  u << 3, 1, 4, 1;
  v << 3, 1, 0, 1;
  Eigen::RowVectorXd t(2);
  t << 0.0, 0.5;
  const ErrorReport r = error_report(u, v, t, 1, 2);
  const std::string csv = error_report_csv(r);
  std::istringstream in(csv);
  std::string header, row0;
  std::getline(in, header);
  std::getline(in, row0);
  EXPECT_EQ(header, "instance,step,time,eps_rel_instance,eps_k_mean,eps_k_median,eps_k_q1,eps_k_q3,eps_k_min,eps_k_max");
  EXPECT_EQ(row0.substr(0, 6), "0,0,0.");
  ASSERT_EQ(r.steps.size(), 2u);
  EXPECT_LE(r.steps[0].stats.q1, r.steps[0].stats.median);
  EXPECT_LE(r.steps[0].stats.median, r.steps[0].stats.q3);
}

TEST(Reports, StudyCsvHeaders) {
  StudyNResult n;
  n.rows.push_back({16, 0.1, 0.05, 0.2, 7});
  const std::string a = study_n_csv(n);
  EXPECT_EQ(a.substr(0, a.find('\n')), "N,eps_total,eps_projection,eps_coords,epochs");
  StudyNtrainResult t;
  t.rows.push_back({5, {0.3, 0.2}, 0.25});
  const std::string b = study_ntrain_csv(t);
  std::istringstream in(b);
  std::string first, second;
  std::getline(in, first);
  std::getline(in, second);
  EXPECT_NE(first.find("reference_slope=-1"), std::string::npos) << first;
  EXPECT_NE(first.find("slope=absent"), std::string::npos) << first;
  EXPECT_EQ(second, "N_train,median_eps_rel,eps_rel_seeds");
}

TEST(Slope, SinglePointIsAbsent) {
  const std::vector<double> x{10.0}, y{0.1};
  EXPECT_FALSE(loglog_slope(x, y).has_value());
  const std::vector<double> xs{1.0, 2.0, 4.0}, ys{1.0, 0.5, 0.25};
  EXPECT_NEAR(*loglog_slope(xs, ys), -1.0, 1e-12);
}

TEST(StudyN, ProjectionShrinksAndBoundsTotal) {
  // A narrow pulse on a coarse grid: four modes cannot capture it, 64 modes span the grid.
  fom::Pulse1dProblem p;
  p.grid_points = 64;
  p.sigma = 0.03;
  const fom::Pulse1dModel model(p);
  const auto times = fom::uniform_sample_times(20, 1, p.dt);
  const fom::Axis train_axis{0.2, 0.5, 10}, test_axis{0.215, 0.485, 9};
  const Dataset train = fom::build_dataset(model, fom::cartesian_grid(std::span(&train_axis, 1)), times);
  const Dataset test = fom::build_dataset(model, fom::cartesian_grid(std::span(&test_axis, 1)), times);
  const std::vector<std::size_t> ranks{64, 4, 16};
  const StudyNResult r = study_vs_n(train, test, ranks, small_recipe(300));
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].rank, 4u);
  EXPECT_TRUE(r.projection_monotone);
  EXPECT_LE(r.rows[1].eps_projection, r.rows[0].eps_projection);
  EXPECT_LE(r.rows[2].eps_projection, r.rows[1].eps_projection);
  EXPECT_LE(r.rows[2].eps_projection, 1e-10);  // full rank
  for (const auto& row : r.rows) {
    std::cout << "N=" << row.rank << " total=" << row.eps_total << " projection=" << row.eps_projection
              << " coords=" << row.eps_coords << "\n";
    EXPECT_GE(row.eps_total, row.eps_projection * (1.0 - 1e-12));
    EXPECT_LE(row.eps_total, row.eps_projection + row.eps_coords + 1e-12);
  }
  // With four modes the basis error dominates the network error.
  EXPECT_LE(r.rows[0].eps_total, 1.25 * r.rows[0].eps_projection);
}

TEST(StudyNtrain, SlowMediansDecreaseWithTrainingSize) {
  fom::Pulse1dProblem p;
  p.mu_min = 0.2;
  p.mu_max = 0.5;
  const fom::Pulse1dModel model(p);
  const std::vector<double> times = fom::uniform_sample_times(50, 1, p.dt);
  const Dataset test = testutil::pulse_dataset(0.2075, 0.4925, 19, 50);
  ModelRecipe recipe = small_recipe(400);
  recipe.rsvd.rank = 16;
  recipe.rsvd.oversampling = 8;
  recipe.train.batch_size = 40;
  const std::vector<std::size_t> sizes{5, 10, 20, 40};
  const std::vector<std::uint64_t> seeds{0, 1, 2};
  const StudyNtrainResult r =
      study_vs_ntrain(model, box_sampler({fom::Axis{0.2, 0.5, 0}}), times, sizes, seeds, test, recipe);
  ASSERT_EQ(r.rows.size(), 4u);
  std::cout << study_ntrain_csv(r);
  for (std::size_t i = 1; i < r.rows.size(); ++i) EXPECT_LE(r.rows[i].median, r.rows[i - 1].median) << i;
  ASSERT_TRUE(r.slope.has_value());
  EXPECT_LT(*r.slope, 0.0);
}

TEST(Bench, InferenceBeatsMarchingSolver) {
  fom::AdrProblem p;
  p.grid_points = 33;
  const fom::AdrModel model(p);
  const std::vector<double> times = fom::uniform_sample_times(20, 5, p.dt);
  const std::vector<fom::ParameterTuple> mus{{0.05, 1.0, 0.4, 0.6}, {0.1, 2.0, 0.6, 0.4}, {0.02, 1.5, 0.5, 0.5}};
  const Dataset data = fom::build_dataset(model, mus, times);
  rpod::RsvdConfig rc;
  rc.rank = 16;
  rc.oversampling = 4;
  const auto basis = rpod::compute_basis(data.snapshots, rc);
  dlrom::TrainConfig tc;
  tc.batch_size = 8;
  tc.max_epochs = 5;
  const auto ck = dlrom::train(data, basis, dlrom::default_architecture(16, 1, 5, 4, small_options()), tc);
  const std::vector<double> mu{0.07, 1.2, 0.5, 0.45};
  const BenchReport b = bench(ck, basis, model, mu, times, 5, 1.5);
  std::cout << bench_report_text(b);
  EXPECT_EQ(b.queries, times.size());
  EXPECT_LT(b.infer_seconds, b.fom_seconds);
  EXPECT_NE(bench_report_text(b).find("hardware-dependent"), std::string::npos);
  EXPECT_THROW(bench(ck, basis, model, mu, std::vector<double>{}), InvalidArgument);
}

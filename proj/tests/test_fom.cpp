#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "podlrom/error.hpp"
#include "podlrom/fom.hpp"
#include "test_support.hpp"

using namespace podlrom;
using std::numbers::pi;

namespace {

// u*(x, y, t) = cos(pi x) cos(pi y) exp(-t) with the matching source term.
double manufactured_error(std::size_t n) {
  const double mu1 = 0.05;
  const double period = 30.0;
  fom::AdrProblem p;
  p.grid_points = n;
  p.dt = 1e-3;
  p.final_time = 0.1;
  const double c = p.reaction;
  p.initial = [](double x, double y) { return std::cos(pi * x) * std::cos(pi * y); };
  p.forcing = [=](double x, double y, double t) {
    const double cx = std::cos(pi * x), cy = std::cos(pi * y);
    const double sx = std::sin(pi * x), sy = std::sin(pi * y);
    const double bx = std::cos(pi * t / period), by = std::sin(pi * t / period);
    const double e = std::exp(-t);
    return e * (-cx * cy + mu1 * 2.0 * pi * pi * cx * cy + bx * (-pi * sx * cy) + by * (-pi * cx * sy) +
                c * cx * cy);
  };
  const std::vector<double> mu{mu1, period, 0.5, 0.5};
  const std::vector<double> times{0.1};
  const Eigen::MatrixXd u = fom::solve_adr(p, mu, times);
  const double h = 1.0 / static_cast<double>(n - 1);
  double err = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double exact = std::cos(pi * i * h) * std::cos(pi * j * h) * std::exp(-0.1);
      err = std::max(err, std::abs(u(static_cast<Eigen::Index>(j * n + i), 0) - exact));
    }
  }
  return err;
}

fom::MonodomainProblem small_monodomain() {
  fom::MonodomainProblem p;
  p.grid_points = 32;
  p.final_time = 10.0;
  return p;
}

}  // namespace

TEST(Adr, OneStepSourceIsNonnegativeAndPeaked) {
  fom::AdrProblem p;
  p.grid_points = 33;
  const std::vector<double> mu{0.05, 5.0, 0.5, 0.5};
  const std::vector<double> times{p.dt};
  const Eigen::MatrixXd u = fom::solve_adr(p, mu, times);
  EXPECT_GE(u.minCoeff(), 0.0);
  Eigen::Index arg = 0;
  u.col(0).maxCoeff(&arg);
  const double h = 1.0 / 32.0;
  const double x = static_cast<double>(arg % 33) * h;
  const double y = static_cast<double>(arg / 33) * h;
  EXPECT_LE(std::hypot(x - 0.5, y - 0.5), 2.0 * h);
  EXPECT_GT(u.maxCoeff(), 0.0);
}

TEST(Adr, ManufacturedSolutionConvergesAtSecondOrder) {
  const double e17 = manufactured_error(17);
  const double e33 = manufactured_error(33);
  const double e65 = manufactured_error(65);
  const double order1 = std::log2(e17 / e33);
  const double order2 = std::log2(e33 / e65);
  EXPECT_GE(order1, 1.8) << e17 << " " << e33;
  EXPECT_GE(order2, 1.8) << e33 << " " << e65;
}

TEST(Adr, RangeShrinksWithDiffusion) {
  fom::AdrProblem p;
  p.grid_points = 17;
  p.final_time = 2.0 * pi;
  const std::vector<double> times{2.0 * pi};
  double previous = std::numeric_limits<double>::infinity();
  for (double mu1 : {0.002, 0.02, 0.2}) {
    const std::vector<double> mu{mu1, 50.0, 0.45, 0.55};
    const Eigen::MatrixXd u = fom::solve_adr(p, mu, times);
    const double range = u.maxCoeff() - u.minCoeff();
    EXPECT_LT(range, previous) << "mu1 = " << mu1;
    previous = range;
  }
}

TEST(Adr, InvalidInputsRejected) {
  fom::AdrProblem p;
  const std::vector<double> times{p.dt};
  EXPECT_THROW(fom::solve_adr(p, std::vector<double>{0.0, 50.0, 0.5, 0.5}, times), InvalidArgument);
  EXPECT_THROW(fom::solve_adr(p, std::vector<double>{0.003, 50.0, 1.5, 0.5}, times), InvalidArgument);
  EXPECT_THROW(fom::solve_adr(p, std::vector<double>{0.003, 50.0, 0.5}, times), InvalidArgument);
  p.grid_points = 2;
  EXPECT_THROW(fom::solve_adr(p, std::vector<double>{0.003, 50.0, 0.5, 0.5}, times), InvalidArgument);
}

TEST(Adr, NonFiniteStateNamesStep) {
  fom::AdrProblem p;
  p.grid_points = 9;
  p.forcing = [](double, double, double t) { return t > 2.5 * 2.0 * pi / 20.0 ? std::nan("") : 0.0; };
  const std::vector<double> times{5 * p.dt};
  try {
    fom::solve_adr(p, std::vector<double>{0.003, 50.0, 0.5, 0.5}, times);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("step 3"), std::string::npos) << e.what();
  }
}

TEST(Monodomain, TrainingLatticeMatchesClosedForm) {
  const std::vector<fom::Axis> axes{{12.9 * 0.06, 12.9 * 0.2, 5}, {12.9 * 0.03, 12.9 * 0.1, 5}};
  const auto grid = fom::cartesian_grid(axes);
  ASSERT_EQ(grid.size(), 25u);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_NEAR(grid[i * 5 + j][0], 12.9 * (0.06 + 0.035 * i), 1e-12);
      EXPECT_NEAR(grid[i * 5 + j][1], 12.9 * (0.03 + 0.0175 * j), 1e-12);
    }
  }
}

TEST(Monodomain, RestStateIsPreservedExactly) {
  auto p = small_monodomain();
  p.stimulus_current = 0.0;
  const std::vector<double> mu{12.9 * 0.1, 12.9 * 0.05};
  const auto times = fom::uniform_sample_times(10, 10, p.dt);
  const Eigen::MatrixXd u = fom::solve_monodomain(p, mu, times);
  EXPECT_EQ(u.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Monodomain, ActivationTimeDecreasesWithLongitudinalConductivity) {
  const auto p = small_monodomain();
  double previous = std::numeric_limits<double>::infinity();
  for (double m1 : {0.06, 0.13, 0.2}) {
    const std::vector<double> mu{12.9 * m1, 12.9 * 0.03};
    const double t = fom::activation_time(p, mu, 5.0, 0.0);
    ASSERT_TRUE(std::isfinite(t));
    EXPECT_LT(t, previous) << "mu1 = " << 12.9 * m1;
    previous = t;
  }
}

TEST(Monodomain, InvariantsChecked) {
  auto p = small_monodomain();
  const std::vector<double> times{1.0};
  EXPECT_THROW(fom::solve_monodomain(p, std::vector<double>{0.5, 1.0}, times), InvalidArgument);
  p.fiber_x = 0.5;
  EXPECT_THROW(fom::solve_monodomain(p, std::vector<double>{1.0, 0.5}, times), InvalidArgument);
}

TEST(Monodomain, RotatedFibreUsesCrossTerms) {
  auto p = small_monodomain();
  p.final_time = 3.0;
  const std::vector<double> mu{12.9 * 0.2, 12.9 * 0.03};
  const std::vector<double> times{3.0};
  const Eigen::MatrixXd ux = fom::solve_monodomain(p, mu, times);
  p.fiber_x = std::sqrt(0.5);
  p.fiber_y = std::sqrt(0.5);
  const Eigen::MatrixXd ud = fom::solve_monodomain(p, mu, times);
  EXPECT_TRUE(ud.allFinite());
  // With a diagonal fibre the field is symmetric under x <-> y.
  const std::size_t n = p.grid_points;
  double asym = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      asym = std::max(asym, std::abs(ud(static_cast<Eigen::Index>(j * n + i), 0) -
                                     ud(static_cast<Eigen::Index>(i * n + j), 0)));
  EXPECT_LT(asym, 1e-8);
  EXPECT_GT((ux - ud).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Pulse1d, InitialColumnIsGaussian) {
  fom::Pulse1dProblem p;
  const std::vector<double> mu{0.4};
  const std::vector<double> times{0.0};
  const Eigen::MatrixXd u = fom::solve_pulse1d(p, mu, times);
  for (std::size_t i = 0; i < p.grid_points; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(p.grid_points - 1);
    EXPECT_NEAR(u(static_cast<Eigen::Index>(i), 0), std::exp(-x * x / (p.sigma * p.sigma)), 1e-15);
  }
}

TEST(Pulse1d, PeakTravelsWithSpeedMu) {
  fom::Pulse1dProblem p;
  const double mu = 0.7;
  const auto times = fom::uniform_sample_times(50, 1, p.dt);
  const Eigen::MatrixXd u = fom::solve_pulse1d(p, std::vector<double>{mu}, times);
  const double h = 1.0 / static_cast<double>(p.grid_points - 1);
  for (std::size_t k = 0; k < times.size(); ++k) {
    Eigen::Index arg = 0;
    u.col(static_cast<Eigen::Index>(k)).maxCoeff(&arg);
    EXPECT_LE(std::abs(static_cast<double>(arg) * h - mu * times[k]), h);
  }
}

TEST(Pulse1d, NormConservedWhileInside) {
  // Full-line L2 norm of exp(-x^2 / sigma^2): (pi sigma^2 / 2)^(1/4).
  fom::Pulse1dProblem p;
  const double reference = 0.35402177013786884;
  ASSERT_NEAR(reference, std::pow(pi * p.sigma * p.sigma / 2.0, 0.25), 1e-15);
  const double mu = 0.8;
  const auto times = fom::uniform_sample_times(50, 1, p.dt);
  const Eigen::MatrixXd u = fom::solve_pulse1d(p, std::vector<double>{mu}, times);
  const double h = 1.0 / static_cast<double>(p.grid_points - 1);
  std::size_t checked = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double centre = mu * times[k];
    if (centre < 3.0 * p.sigma || centre > 1.0 - 3.0 * p.sigma) continue;
    const auto col = u.col(static_cast<Eigen::Index>(k));
    const double trapezoid = col.squaredNorm() - 0.5 * (col(0) * col(0) + col(col.size() - 1) * col(col.size() - 1));
    EXPECT_NEAR(std::sqrt(h * trapezoid), reference, 0.01 * reference) << "t = " << times[k];
    ++checked;
  }
  EXPECT_GT(checked, 10u);
}

TEST(Pulse1d, ParameterOutsideBoxRejected) {
  fom::Pulse1dProblem p;
  p.mu_min = 0.2;
  p.mu_max = 0.5;
  const std::vector<double> times{0.02};
  EXPECT_THROW(fom::solve_pulse1d(p, std::vector<double>{0.6}, times), InvalidArgument);
  p.sigma = 0.0;
  EXPECT_THROW(fom::solve_pulse1d(p, std::vector<double>{0.3}, times), InvalidArgument);
}

TEST(Dataset, SampleStepsValidation) {
  EXPECT_EQ(fom::sample_steps(std::vector<double>{0.2, 0.4}, 0.1, 1.0), (std::vector<std::size_t>{2, 4}));
  EXPECT_THROW(fom::sample_steps(std::vector<double>{0.25}, 0.1, 1.0), InvalidArgument);
  EXPECT_THROW(fom::sample_steps(std::vector<double>{0.4, 0.2}, 0.1, 1.0), InvalidArgument);
  EXPECT_THROW(fom::sample_steps(std::vector<double>{1.1}, 0.1, 1.0), InvalidArgument);
  EXPECT_EQ(fom::uniform_sample_times(3, 4, 0.5), (std::vector<double>{2.0, 4.0, 6.0}));
}

TEST(Dataset, SingleSampleGivesSingleColumn) {
  fom::Pulse1dProblem p;
  const fom::Pulse1dModel model(p);
  const Dataset ds = fom::build_dataset(model, {{0.3}}, std::vector<double>{0.5});
  EXPECT_EQ(ds.snapshots.data.cols(), 1);
  EXPECT_EQ(ds.parameters.data.cols(), 1);
  EXPECT_EQ(ds.parameters.data(0, 0), 0.5);
  EXPECT_EQ(ds.parameters.data(1, 0), 0.3);
}

TEST(Dataset, ColumnCountIsTrainTimesTimes) {
  // Test-1 scale: 5 x 5 x 5 x 4 parameters and 100 instants give 50000 columns.
  const std::vector<fom::Axis> axes{{0.002, 0.005, 5}, {30, 70, 5}, {0.4, 0.6, 5}, {0.4, 0.6, 4}};
  EXPECT_EQ(fom::cartesian_grid(axes).size(), 500u);
  fom::Pulse1dProblem p;
  p.grid_points = 4;
  p.final_time = 2.0;
  const fom::Pulse1dModel model(p);
  const fom::Axis axis{0.0, 1.0, 500};
  const Dataset ds =
      fom::build_dataset(model, fom::cartesian_grid(std::span(&axis, 1)), fom::uniform_sample_times(100, 1, p.dt));
  EXPECT_EQ(ds.samples(), 50000u);
  EXPECT_EQ(ds.snapshots.n_train, 500u);
  EXPECT_EQ(ds.snapshots.n_t, 100u);
}

TEST(Dataset, ColumnsAlignWithParameters) {
  fom::MonodomainProblem p;
  p.grid_points = 12;
  p.final_time = 4.0;
  const fom::MonodomainModel model(p);
  const std::vector<fom::Axis> axes{{12.9 * 0.1, 12.9 * 0.2, 2}, {12.9 * 0.03, 12.9 * 0.06, 2}};
  const auto times = fom::uniform_sample_times(4, 10, p.dt);
  const Dataset ds = fom::build_dataset(model, fom::cartesian_grid(axes), times);
  ASSERT_EQ(ds.samples(), 16u);
  // Parameter-major ordering, time in row 0.
  const Eigen::Index col = 2 * 4 + 3;
  const std::vector<double> mu{ds.parameters.data(1, col), ds.parameters.data(2, col)};
  EXPECT_EQ(mu, fom::cartesian_grid(axes)[2]);
  EXPECT_DOUBLE_EQ(ds.parameters.data(0, col), times[3]);
  const Eigen::MatrixXd again = fom::solve_monodomain(p, mu, std::vector<double>{ds.parameters.data(0, col)});
  EXPECT_EQ(again.col(0), ds.snapshots.data.col(col));
}

TEST(Dataset, GenerationIsDeterministic) {
  const Dataset a = testutil::pulse_dataset(0.2, 0.5, 4, 5);
  const Dataset b = testutil::pulse_dataset(0.2, 0.5, 4, 5);
  EXPECT_EQ(encode_pdrs(a), encode_pdrs(b));
  EXPECT_TRUE(a.snapshots.data.allFinite());
}

TEST(Dataset, SolverErrorsCarryParameterTuple) {
  fom::Pulse1dProblem p;
  p.mu_max = 0.5;
  const fom::Pulse1dModel model(p);
  try {
    fom::build_dataset(model, {{0.3}, {0.75}}, std::vector<double>{0.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("0.75"), std::string::npos) << e.what();
  }
}

TEST(Dataset, CartesianGridOrdering) {
  const std::vector<fom::Axis> axes{{0.0, 1.0, 2}, {10.0, 20.0, 3}, {5.0, 7.0, 1}};
  const auto g = fom::cartesian_grid(axes);
  ASSERT_EQ(g.size(), 6u);
  EXPECT_EQ(g[0], (fom::ParameterTuple{0.0, 10.0, 6.0}));
  EXPECT_EQ(g[1], (fom::ParameterTuple{0.0, 15.0, 6.0}));
  EXPECT_EQ(g[5], (fom::ParameterTuple{1.0, 20.0, 6.0}));
  const fom::Axis awkward{0.2075, 0.4925, 19};
  EXPECT_EQ(fom::cartesian_grid(std::span(&awkward, 1)).back().front(), 0.4925);
}

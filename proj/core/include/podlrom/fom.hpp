#pragma once

// Desk-scale full order models on uniform vertex-centred finite-difference
// grids. Every solver returns a trajectory matrix with one column per
// requested sample time.

#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "podlrom/snapshots.hpp"

namespace podlrom::fom {

using ParameterTuple = std::vector<double>;

// du/dt - div(mu1 grad u) + b(t; mu2) . grad u + c u = f(mu3, mu4) on (0,1)^2,
// homogeneous Neumann boundary, u(0) = 0. mu = (mu1, mu2, mu3, mu4).
struct AdrProblem {
  std::size_t grid_points = 33;  // per axis
  double dt = 2.0 * std::numbers::pi / 20.0;
  double final_time = 10.0 * std::numbers::pi;
  double reaction = 1.0;
  double source_amplitude = 10.0;
  double source_width = 0.07;

  // Optional overrides, used for manufactured solutions. When `forcing` is
  // set it replaces the Gaussian source (mu3, mu4 are then ignored).
  std::function<double(double x, double y, double t)> forcing;
  std::function<double(double x, double y)> initial;

  void validate() const;
};

Eigen::MatrixXd solve_adr(const AdrProblem& problem, std::span<const double> mu,
                          std::span<const double> sample_times);

// Monodomain equation with Aliev-Panfilov ionic current on (0, L)^2.
// mu = (longitudinal conductivity, transversal conductivity) in cm^2/ms.
struct MonodomainProblem {
  std::size_t grid_points = 64;  // per axis
  double length = 10.0;          // cm
  double dt = 0.1;               // ms
  double final_time = 400.0;     // ms
  double fiber_x = 1.0;          // unit fibre direction f0
  double fiber_y = 0.0;

  double k = 8.0;
  double a = 0.01;
  double b = 0.15;
  double eps0 = 0.002;
  double c1 = 0.2;
  double c2 = 0.3;

  double stimulus_current = 100.0;  // C, mA
  double stimulus_alpha = 1.0;
  double stimulus_beta = 1.0;       // cm^2
  double stimulus_duration = 2.0;   // ms

  void validate() const;
};

// Called after every time step with the step index (1-based), the time and
// the transmembrane potential.
using StepObserver = std::function<void(std::size_t step, double time, const Eigen::VectorXd& u)>;

Eigen::MatrixXd solve_monodomain(const MonodomainProblem& problem, std::span<const double> mu,
                                 std::span<const double> sample_times,
                                 const StepObserver& observer = {});

// First time u crosses `threshold` at the grid node nearest to (x, y),
// linearly interpolated between steps. Returns +inf if it never does.
double activation_time(const MonodomainProblem& problem, std::span<const double> mu, double x,
                       double y, double threshold = 0.5);

// Closed-form travelling pulse u(x, t; mu) = exp(-(x - mu t)^2 / sigma^2) on [0, 1].
struct Pulse1dProblem {
  std::size_t grid_points = 256;
  double sigma = 0.1;
  double dt = 0.02;
  double final_time = 1.0;
  double mu_min = 0.0;
  double mu_max = 1.0;

  void validate() const;
};

Eigen::MatrixXd solve_pulse1d(const Pulse1dProblem& problem, std::span<const double> mu,
                              std::span<const double> sample_times);

// Converts sample times into step indices; each time must be an integer
// multiple of dt within [0, final_time].
std::vector<std::size_t> sample_steps(std::span<const double> sample_times, double dt,
                                      double final_time);

// t_k = k * every * dt for k = 1..count.
std::vector<double> uniform_sample_times(std::size_t count, std::size_t every, double dt);

class FullOrderModel {
public:
  virtual ~FullOrderModel() = default;
  virtual std::string name() const = 0;
  virtual std::size_t parameter_count() const = 0;
  virtual ChannelLayout layout() const = 0;
  virtual Eigen::MatrixXd solve(std::span<const double> mu, std::span<const double> times) const = 0;
};

class AdrModel final : public FullOrderModel {
public:
  explicit AdrModel(AdrProblem problem);
  std::string name() const override { return "adr"; }
  std::size_t parameter_count() const override { return 4; }
  ChannelLayout layout() const override;
  Eigen::MatrixXd solve(std::span<const double> mu, std::span<const double> times) const override;
  const AdrProblem& problem() const { return problem_; }

private:
  AdrProblem problem_;
};

class MonodomainModel final : public FullOrderModel {
public:
  explicit MonodomainModel(MonodomainProblem problem);
  std::string name() const override { return "monodomain"; }
  std::size_t parameter_count() const override { return 2; }
  ChannelLayout layout() const override;
  Eigen::MatrixXd solve(std::span<const double> mu, std::span<const double> times) const override;
  const MonodomainProblem& problem() const { return problem_; }

private:
  MonodomainProblem problem_;
};

class Pulse1dModel final : public FullOrderModel {
public:
  explicit Pulse1dModel(Pulse1dProblem problem);
  std::string name() const override { return "pulse1d"; }
  std::size_t parameter_count() const override { return 1; }
  ChannelLayout layout() const override;
  Eigen::MatrixXd solve(std::span<const double> mu, std::span<const double> times) const override;
  const Pulse1dProblem& problem() const { return problem_; }

private:
  Pulse1dProblem problem_;
};

// Solves every parameter tuple and stacks the trajectories parameter-major,
// time-minor. Row 0 of the parameter matrix holds the time, rows 1..n_mu the
// parameters. Solver errors are rethrown with the offending tuple attached.
Dataset build_dataset(const FullOrderModel& model, const std::vector<ParameterTuple>& parameters,
                      std::span<const double> times);

// Cartesian product of per-axis uniform grids, first axis slowest.
struct Axis {
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 1;
};
std::vector<ParameterTuple> cartesian_grid(std::span<const Axis> axes);

}  // namespace podlrom::fom

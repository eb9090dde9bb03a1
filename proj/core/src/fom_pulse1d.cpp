#include <cmath>
#include <string>

#include "podlrom/error.hpp"
#include "podlrom/fom.hpp"

namespace podlrom::fom {

void Pulse1dProblem::validate() const {
  if (grid_points < 2) throw InvalidArgument("pulse1d: grid_points must be >= 2");
  if (!(sigma > 0.0)) throw InvalidArgument("pulse1d: sigma must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("pulse1d: dt must be positive");
  if (!(final_time > 0.0)) throw InvalidArgument("pulse1d: final_time must be positive");
  if (!(mu_min <= mu_max)) throw InvalidArgument("pulse1d: mu_min must not exceed mu_max");
}

Eigen::MatrixXd solve_pulse1d(const Pulse1dProblem& problem, std::span<const double> mu,
                              std::span<const double> sample_times) {
  problem.validate();
  if (mu.size() != 1) throw InvalidArgument("pulse1d: expected 1 parameter, got " + std::to_string(mu.size()));
  const double speed = mu[0];
  if (!(speed >= problem.mu_min && speed <= problem.mu_max)) {
    throw InvalidArgument("pulse1d: mu = " + std::to_string(speed) + " outside [" +
                          std::to_string(problem.mu_min) + ", " + std::to_string(problem.mu_max) + "]");
  }
  sample_steps(sample_times, problem.dt, problem.final_time);

  const auto n = static_cast<Eigen::Index>(problem.grid_points);
  const double h = 1.0 / static_cast<double>(problem.grid_points - 1);
  const double inv_s2 = 1.0 / (problem.sigma * problem.sigma);
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(sample_times.size()));
  for (Eigen::Index k = 0; k < out.cols(); ++k) {
    const double centre = speed * sample_times[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = static_cast<double>(i) * h - centre;
      out(i, k) = std::exp(-d * d * inv_s2);
    }
  }
  return out;
}

Pulse1dModel::Pulse1dModel(Pulse1dProblem problem) : problem_(problem) { problem_.validate(); }

ChannelLayout Pulse1dModel::layout() const { return ChannelLayout({problem_.grid_points}); }

Eigen::MatrixXd Pulse1dModel::solve(std::span<const double> mu, std::span<const double> times) const {
  return solve_pulse1d(problem_, mu, times);
}

}  // namespace podlrom::fom

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/IterativeLinearSolvers>

#include "fd_grid.hpp"
#include "podlrom/error.hpp"
#include "podlrom/fom.hpp"

namespace podlrom::fom {

void MonodomainProblem::validate() const {
  if (grid_points < 3) throw InvalidArgument("monodomain: grid_points must be >= 3");
  if (!(length > 0.0)) throw InvalidArgument("monodomain: length must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("monodomain: dt must be positive");
  if (!(final_time > 0.0)) throw InvalidArgument("monodomain: final_time must be positive");
  const double norm = std::hypot(fiber_x, fiber_y);
  if (std::abs(norm - 1.0) > 1e-12) throw InvalidArgument("monodomain: fibre direction must be a unit vector");
  if (!(c2 > 0.0)) throw InvalidArgument("monodomain: c2 must be positive");
}

Eigen::MatrixXd solve_monodomain(const MonodomainProblem& problem, std::span<const double> mu,
                                 std::span<const double> sample_times, const StepObserver& observer) {
  problem.validate();
  if (mu.size() != 2) {
    throw InvalidArgument("monodomain: expected 2 parameters, got " + std::to_string(mu.size()));
  }
  const double sigma_l = mu[0];
  const double sigma_t = mu[1];
  if (!(sigma_t > 0.0) || !(sigma_l >= sigma_t)) {
    throw InvalidArgument("monodomain: conductivities must satisfy mu1 >= mu2 > 0");
  }

  const auto steps = sample_steps(sample_times, problem.dt, problem.final_time);
  const detail::Grid2d g{problem.grid_points, problem.length / static_cast<double>(problem.grid_points - 1)};
  const auto size = static_cast<Eigen::Index>(g.size());
  const double dt = problem.dt;

  // D = mu2 I + (mu1 - mu2) f0 f0^T
  const double fx = problem.fiber_x;
  const double fy = problem.fiber_y;
  const double dxx = sigma_t + (sigma_l - sigma_t) * fx * fx;
  const double dxy = (sigma_l - sigma_t) * fx * fy;
  const double dyy = sigma_t + (sigma_l - sigma_t) * fy * fy;

  detail::Triplets triplets;
  detail::add_anisotropic_laplacian(g, dxx, dxy, dyy, -1.0, triplets);
  detail::add_identity(g, 1.0 / dt, triplets);
  Eigen::SparseMatrix<double> system = detail::assemble(g, triplets);
  const Eigen::VectorXd base_diagonal = system.diagonal();
  Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::DiagonalPreconditioner<double>> solver;
  solver.setTolerance(1e-12);
  solver.setMaxIterations(500);

  Eigen::VectorXd stimulus(size);
  const double amplitude = problem.stimulus_current / (2.0 * std::numbers::pi * problem.stimulus_alpha);
  for (std::size_t j = 0; j < g.n; ++j) {
    for (std::size_t i = 0; i < g.n; ++i) {
      const double r2 = g.coord(i) * g.coord(i) + g.coord(j) * g.coord(j);
      stimulus[static_cast<Eigen::Index>(g.index(i, j))] =
          amplitude * std::exp(-r2 / (2.0 * problem.stimulus_beta));
    }
  }

  Eigen::VectorXd u = Eigen::VectorXd::Zero(size);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(size);
  Eigen::VectorXd rhs(size);

  Eigen::MatrixXd out(size, static_cast<Eigen::Index>(steps.size()));
  std::size_t next = 0;
  auto record = [&](std::size_t step) {
    while (next < steps.size() && steps[next] == step) out.col(static_cast<Eigen::Index>(next++)) = u;
  };
  record(0);

  const std::size_t last = steps.empty() ? 0 : steps.back();
  const double k = problem.k;
  Eigen::VectorXd reaction(size);
  for (std::size_t n = 1; n <= last; ++n) {
    const double t = static_cast<double>(n) * dt;
    const bool stimulated = t <= problem.stimulus_duration + 1e-9 * dt;
    // Linearly implicit: w first, then u with the ionic current linear in u^{n+1}.
    for (Eigen::Index p = 0; p < size; ++p) {
      const double up = u[p];
      const double rate = problem.eps0 + problem.c1 * w[p] / (problem.c2 + up);
      w[p] = (w[p] - dt * rate * k * up * (up - problem.b - 1.0)) / (1.0 + dt * rate);
      reaction[p] = k * (up - problem.a) * (up - 1.0) + w[p];
      rhs[p] = up / dt + (stimulated ? stimulus[p] : 0.0);
    }
    system.diagonal() = base_diagonal + reaction;
    solver.compute(system);
    u = solver.solveWithGuess(rhs, u);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("monodomain: linear solve did not converge at step " + std::to_string(n) +
                           " (residual " + std::to_string(solver.error()) + ")");
    }
    if (!u.allFinite() || !w.allFinite()) {
      throw NumericalError("monodomain: non-finite state at step " + std::to_string(n));
    }
    if (observer) observer(n, t, u);
    record(n);
  }
  return out;
}

double activation_time(const MonodomainProblem& problem, std::span<const double> mu, double x,
                       double y, double threshold) {
  const double h = problem.length / static_cast<double>(problem.grid_points - 1);
  const auto i = static_cast<std::size_t>(std::lround(x / h));
  const auto j = static_cast<std::size_t>(std::lround(y / h));
  if (i >= problem.grid_points || j >= problem.grid_points) {
    throw InvalidArgument("activation_time: probe outside the domain");
  }
  const auto node = static_cast<Eigen::Index>(j * problem.grid_points + i);

  double result = std::numeric_limits<double>::infinity();
  double prev_t = 0.0;
  double prev_u = 0.0;
  const double final_step = std::floor(problem.final_time / problem.dt + 1e-9) * problem.dt;
  const std::vector<double> final_sample{final_step};
  solve_monodomain(problem, mu, final_sample, [&](std::size_t, double t, const Eigen::VectorXd& u) {
    const double v = u[node];
    if (!std::isfinite(result)) {
      if (v >= threshold) result = prev_t + (threshold - prev_u) / (v - prev_u) * (t - prev_t);
    }
    prev_t = t;
    prev_u = v;
  });
  return result;
}

MonodomainModel::MonodomainModel(MonodomainProblem problem) : problem_(problem) { problem_.validate(); }

ChannelLayout MonodomainModel::layout() const {
  return ChannelLayout({problem_.grid_points * problem_.grid_points});
}

Eigen::MatrixXd MonodomainModel::solve(std::span<const double> mu, std::span<const double> times) const {
  return solve_monodomain(problem_, mu, times);
}

}  // namespace podlrom::fom

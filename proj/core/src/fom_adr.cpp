#include <cmath>
#include <string>

#include <Eigen/SparseLU>

#include "fd_grid.hpp"
#include "podlrom/error.hpp"
#include "podlrom/fom.hpp"

namespace podlrom::fom {

void AdrProblem::validate() const {
  if (grid_points < 3) throw InvalidArgument("adr: grid_points must be >= 3");
  if (!(dt > 0.0)) throw InvalidArgument("adr: dt must be positive");
  if (!(final_time > 0.0)) throw InvalidArgument("adr: final_time must be positive");
  if (!(source_width > 0.0)) throw InvalidArgument("adr: source_width must be positive");
  if (!std::isfinite(reaction)) throw InvalidArgument("adr: reaction must be finite");
}

Eigen::MatrixXd solve_adr(const AdrProblem& problem, std::span<const double> mu,
                          std::span<const double> sample_times) {
  problem.validate();
  if (mu.size() != 4) throw InvalidArgument("adr: expected 4 parameters, got " + std::to_string(mu.size()));
  const double diffusion = mu[0];
  const double period = mu[1];
  if (!(diffusion > 0.0)) throw InvalidArgument("adr: diffusion mu1 must be positive");
  if (!(period != 0.0) || !std::isfinite(period)) throw InvalidArgument("adr: advection period mu2 must be nonzero");
  if (!problem.forcing && !(mu[2] > 0.0 && mu[2] < 1.0 && mu[3] > 0.0 && mu[3] < 1.0)) {
    throw InvalidArgument("adr: source centre (mu3, mu4) must lie inside (0,1)^2");
  }

  const auto steps = sample_steps(sample_times, problem.dt, problem.final_time);
  const detail::Grid2d g{problem.grid_points, 1.0 / static_cast<double>(problem.grid_points - 1)};
  const auto size = static_cast<Eigen::Index>(g.size());
  const double dt = problem.dt;

  Eigen::VectorXd source(size);
  auto fill_forcing = [&](double t) {
    for (std::size_t j = 0; j < g.n; ++j) {
      for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.coord(i);
        const double y = g.coord(j);
        double v;
        if (problem.forcing) {
          v = problem.forcing(x, y, t);
        } else {
          const double r2 = (x - mu[2]) * (x - mu[2]) + (y - mu[3]) * (y - mu[3]);
          v = problem.source_amplitude * std::exp(-r2 / (problem.source_width * problem.source_width));
        }
        source[static_cast<Eigen::Index>(g.index(i, j))] = v;
      }
    }
  };

  Eigen::VectorXd u_prev(size);
  for (std::size_t j = 0; j < g.n; ++j) {
    for (std::size_t i = 0; i < g.n; ++i) {
      u_prev[static_cast<Eigen::Index>(g.index(i, j))] =
          problem.initial ? problem.initial(g.coord(i), g.coord(j)) : 0.0;
    }
  }

  // Refactored every step (b depends on t); pattern analysed once.
  detail::Triplets stiffness;
  detail::add_anisotropic_laplacian(g, diffusion, 0.0, diffusion, -1.0, stiffness);
  const auto build_operator = [&](double t, double mass) {
    detail::Triplets all = stiffness;
    detail::add_identity(g, mass + problem.reaction, all);
    const double w = std::numbers::pi / period * t;
    detail::add_advection(g, std::cos(w), std::sin(w), all);
    return detail::assemble(g, all);
  };

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analysed = false;
  auto solve_step = [&](const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& rhs,
                        std::size_t step) {
    if (!analysed) {
      lu.analyzePattern(a);
      analysed = true;
    }
    lu.factorize(a);
    if (lu.info() != Eigen::Success) {
      throw NumericalError("adr: factorization failed at step " + std::to_string(step) + ": " +
                           lu.lastErrorMessage());
    }
    Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success) {
      throw NumericalError("adr: linear solve failed at step " + std::to_string(step));
    }
    if (!x.allFinite()) throw NumericalError("adr: non-finite solution at step " + std::to_string(step));
    return x;
  };

  Eigen::MatrixXd out(size, static_cast<Eigen::Index>(steps.size()));
  std::size_t next = 0;
  auto record = [&](std::size_t step, const Eigen::VectorXd& u) {
    while (next < steps.size() && steps[next] == step) out.col(static_cast<Eigen::Index>(next++)) = u;
  };
  record(0, u_prev);
  if (next == steps.size()) return out;

  // Implicit Euler bootstrap, then BDF2.
  fill_forcing(dt);
  Eigen::VectorXd u = solve_step(build_operator(dt, 1.0 / dt), source + u_prev / dt, 1);
  record(1, u);
  const std::size_t last = steps.back();
  for (std::size_t n = 2; n <= last; ++n) {
    const double t = static_cast<double>(n) * dt;
    if (problem.forcing) fill_forcing(t);
    Eigen::VectorXd rhs = source + (4.0 * u - u_prev) / (2.0 * dt);
    Eigen::VectorXd next_u = solve_step(build_operator(t, 1.5 / dt), rhs, n);
    u_prev = std::move(u);
    u = std::move(next_u);
    record(n, u);
  }
  return out;
}

AdrModel::AdrModel(AdrProblem problem) : problem_(std::move(problem)) { problem_.validate(); }

ChannelLayout AdrModel::layout() const {
  return ChannelLayout({problem_.grid_points * problem_.grid_points});
}

Eigen::MatrixXd AdrModel::solve(std::span<const double> mu, std::span<const double> times) const {
  return solve_adr(problem_, mu, times);
}

}  // namespace podlrom::fom

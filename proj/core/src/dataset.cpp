#include <cmath>
#include <sstream>
#include <string>

#include "podlrom/error.hpp"
#include "podlrom/fom.hpp"

namespace podlrom::fom {

std::vector<std::size_t> sample_steps(std::span<const double> sample_times, double dt,
                                      double final_time) {
  std::vector<std::size_t> steps;
  steps.reserve(sample_times.size());
  for (std::size_t k = 0; k < sample_times.size(); ++k) {
    const double t = sample_times[k];
    if (!(t >= 0.0) || t > final_time * (1.0 + 1e-12)) {
      throw InvalidArgument("sample time " + std::to_string(t) + " outside [0, " +
                            std::to_string(final_time) + "]");
    }
    const double ratio = t / dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-8 * std::max(1.0, ratio)) {
      throw InvalidArgument("sample time " + std::to_string(t) + " is not a multiple of dt = " +
                            std::to_string(dt));
    }
    const auto step = static_cast<std::size_t>(rounded);
    if (!steps.empty() && step <= steps.back()) {
      throw InvalidArgument("sample times must be strictly increasing");
    }
    steps.push_back(step);
  }
  return steps;
}

std::vector<double> uniform_sample_times(std::size_t count, std::size_t every, double dt) {
  std::vector<double> times(count);
  for (std::size_t k = 0; k < count; ++k) {
    times[k] = static_cast<double>((k + 1) * every) * dt;
  }
  return times;
}

Dataset build_dataset(const FullOrderModel& model, const std::vector<ParameterTuple>& parameters,
                      std::span<const double> times) {
  if (parameters.empty()) throw InvalidArgument("build_dataset: no parameter samples");
  if (times.empty()) throw InvalidArgument("build_dataset: no time samples");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] > 0.0)) throw InvalidArgument("build_dataset: sample times must be positive");
    if (k > 0 && !(times[k] > times[k - 1])) {
      throw InvalidArgument("build_dataset: sample times must be strictly increasing");
    }
  }

  const ChannelLayout layout = model.layout();
  const std::size_t n_mu = model.parameter_count();
  const auto n_t = static_cast<Eigen::Index>(times.size());
  const auto cols = static_cast<Eigen::Index>(parameters.size()) * n_t;

  Dataset out;
  out.snapshots.layout = layout;
  out.snapshots.n_train = parameters.size();
  out.snapshots.n_t = times.size();
  out.snapshots.data.resize(static_cast<Eigen::Index>(layout.total()), cols);
  out.parameters.data.resize(static_cast<Eigen::Index>(n_mu + 1), cols);

  for (std::size_t i = 0; i < parameters.size(); ++i) {
    const auto& mu = parameters[i];
    if (mu.size() != n_mu) {
      throw InvalidArgument("build_dataset: parameter tuple " + std::to_string(i) + " has " +
                            std::to_string(mu.size()) + " entries, " + model.name() + " expects " +
                            std::to_string(n_mu));
    }
    Eigen::MatrixXd trajectory;
    try {
      trajectory = model.solve(mu, times);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << e.what() << " [parameters:";
      for (double v : mu) msg << ' ' << v;
      msg << ']';
      if (dynamic_cast<const InvalidArgument*>(&e)) throw InvalidArgument(msg.str());
      throw NumericalError(msg.str());
    }
    const Eigen::Index first = static_cast<Eigen::Index>(i) * n_t;
    out.snapshots.data.middleCols(first, n_t) = trajectory;
    for (Eigen::Index k = 0; k < n_t; ++k) {
      out.parameters.data(0, first + k) = times[static_cast<std::size_t>(k)];
      for (std::size_t p = 0; p < n_mu; ++p) {
        out.parameters.data(static_cast<Eigen::Index>(p + 1), first + k) = mu[p];
      }
    }
  }
  out.validate();
  return out;
}

std::vector<ParameterTuple> cartesian_grid(std::span<const Axis> axes) {
  std::vector<ParameterTuple> out{{}};
  for (const Axis& axis : axes) {
    if (axis.count == 0) throw InvalidArgument("cartesian_grid: axis with zero samples");
    std::vector<ParameterTuple> next;
    next.reserve(out.size() * axis.count);
    for (const auto& prefix : out) {
      for (std::size_t k = 0; k < axis.count; ++k) {
        double v = 0.5 * (axis.min + axis.max);
        if (axis.count > 1) {
          v = k + 1 == axis.count ? axis.max
                                  : axis.min + (axis.max - axis.min) * static_cast<double>(k) /
                                                   static_cast<double>(axis.count - 1);
        }
        auto tuple = prefix;
        tuple.push_back(v);
        next.push_back(std::move(tuple));
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace podlrom::fom

#include <cmath>
#include <string>

#include "podlrom/error.hpp"
#include "podlrom/nn.hpp"

namespace podlrom::nn {

AdamState AdamState::zeros(std::size_t size, AdamHyper hyper) {
  AdamState s;
  s.m.assign(size, 0.0);
  s.v.assign(size, 0.0);
  s.hyper = hyper;
  return s;
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad) {
  if (params.size() != grad.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw InvalidArgument("adam_step: length mismatch (params " + std::to_string(params.size()) +
                          ", grad " + std::to_string(grad.size()) + ", state " +
                          std::to_string(state.m.size()) + ")");
  }
  for (double g : grad) {
    if (!std::isfinite(g)) {
      throw NumericalError("adam_step: non-finite gradient at step " + std::to_string(state.step + 1));
    }
  }
  ++state.step;
  const auto& h = state.hyper;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = h.beta1 * state.m[i] + (1.0 - h.beta1) * grad[i];
    state.v[i] = h.beta2 * state.v[i] + (1.0 - h.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= h.learning_rate * m_hat / (std::sqrt(v_hat) + h.epsilon);
  }
}

}  // namespace podlrom::nn

#include "plan/train/adam.hpp"

#include <cmath>

#include "plan/errors.hpp"

namespace plan::train {

AdamState AdamState::for_params(std::span<const ParamRef> params) {
  AdamState s;
  for (const auto& p : params) {
    s.first_moment.emplace_back(p.tensor.size(), 0.0);
    s.second_moment.emplace_back(p.tensor.size(), 0.0);
  }
  return s;
}

void adam_step(std::span<const ParamRef> params, AdamState& state, double learning_rate) {
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw InvalidShape("adam: state tracks " + std::to_string(state.first_moment.size()) + " tensors, got " +
                       std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (state.first_moment[i].size() != p.tensor.size() || state.second_moment[i].size() != p.tensor.size()) {
      throw InvalidShape("adam: moment shape mismatch for " + p.name);
    }
    for (std::size_t k = 0; k < p.tensor.grad().size(); ++k) {
      if (!std::isfinite(p.tensor.grad()[k])) {
        throw InvalidValue("adam: non-finite gradient in " + p.name + " at element " + std::to_string(k));
      }
    }
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    ad::Tensor tensor = params[i].tensor;
    auto grad = tensor.grad();
    if (grad.empty()) continue;  // never touched by a backward pass
    auto value = tensor.values_mut();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t k = 0; k < value.size(); ++k) {
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * grad[k];
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * grad[k] * grad[k];
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      value[k] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace plan::train

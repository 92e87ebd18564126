#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "plan/autodiff/tensor.hpp"

namespace plan::train {

struct ParamRef {
  std::string name;
  ad::Tensor tensor;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;

  static AdamState for_params(std::span<const ParamRef> params);
};

/// One bias-corrected Adam update using each tensor's accumulated gradient.
/// Throws InvalidShape when the state does not match the parameters and
/// InvalidValue (naming the tensor) on a non-finite gradient; nothing is
/// modified in either case.
void adam_step(std::span<const ParamRef> params, AdamState& state, double learning_rate);

}  // namespace plan::train

#pragma once

#include <cstddef>

#include "plan/autodiff/ops.hpp"
#include "plan/autodiff/tensor.hpp"

namespace plan::nn {

/// How a forward pass treats stochastic layers.
struct RunContext {
  ad::Mode mode = ad::Mode::eval;
  ad::Rng* rng = nullptr;  // required in train mode when dropout_rate > 0
  double dropout_rate = 0.0;

  ad::Tensor dropout(const ad::Tensor& x) const;
};

/// Trainable tensor drawn from uniform(-a, a) with a = 1/sqrt(fan_in).
ad::Tensor uniform_param(ad::Shape shape, std::size_t fan_in, ad::Rng& rng);

/// x W + b for a rank-1 x, or row-wise for a rank-2 x.
ad::Tensor affine(const ad::Tensor& x, const ad::Tensor& weight, const ad::Tensor& bias);

/// Each of the `rows` output rows is a copy of the rank-1 `row`.
ad::Tensor repeat_rows(const ad::Tensor& row, std::size_t rows);

struct LstmState {
  ad::Tensor h;
  ad::Tensor c;
};

// Standard LSTM cell without peepholes. Gate blocks in the packed weights
// are ordered input, forget, candidate, output.
struct LstmCell {
  ad::Tensor w_input;   // [in x 4H]
  ad::Tensor w_hidden;  // [H x 4H]
  ad::Tensor bias;      // [4H]

  /// Uniform init with the forget-gate bias shifted by +1.
  static LstmCell init(std::size_t input_dim, std::size_t hidden, ad::Rng& rng);
  static LstmCell zeros(std::size_t input_dim, std::size_t hidden);

  std::size_t input_dim() const { return w_input.dim(0); }
  std::size_t hidden() const { return w_hidden.dim(0); }

  LstmState zero_state() const;
  LstmState step(const ad::Tensor& x, const LstmState& state) const;
};

}  // namespace plan::nn

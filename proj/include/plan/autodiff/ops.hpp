#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "plan/autodiff/tensor.hpp"

namespace plan::ad {

enum class Mode { train, eval };

using Rng = std::mt19937_64;

// Matrix product. Rank-2 x rank-2 is the usual product; a rank-1 right
// operand is treated as a column (result rank 1), a rank-1 left operand as
// a row (result rank 1).
Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise binary ops. Shapes must be equal, or one side a rank-0 scalar.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);

Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);

/// Softmax over a rank-1 tensor, stabilized by subtracting the maximum.
/// Throws InvalidValue on non-finite input.
Tensor softmax(const Tensor& x);

/// -log softmax(logits)[target], computed through log-sum-exp.
Tensor cross_entropy(const Tensor& logits, std::size_t target);

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis = 0);

// Rows [begin, end) along axis 0.
Tensor slice(const Tensor& x, std::size_t begin, std::size_t end);

Tensor reshape(const Tensor& x, Shape shape);

Tensor sum(const Tensor& x);

/// Inverted dropout: in train mode each entry is zeroed with probability
/// `rate` and survivors are scaled by 1/(1-rate). Identity in eval mode.
Tensor dropout(const Tensor& x, double rate, Mode mode, Rng& rng);

}  // namespace plan::ad

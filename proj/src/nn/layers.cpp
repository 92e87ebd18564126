#include "plan/nn/layers.hpp"

#include <cmath>
#include <string>

#include "plan/errors.hpp"

namespace plan::nn {

using ad::Tensor;

Tensor RunContext::dropout(const Tensor& x) const {
  if (mode == ad::Mode::eval || dropout_rate == 0.0) return x;
  if (rng == nullptr) throw InvalidArgument("train-mode dropout needs a random generator");
  return ad::dropout(x, dropout_rate, mode, *rng);
}

Tensor uniform_param(ad::Shape shape, std::size_t fan_in, ad::Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> data(ad::element_count(shape));
  for (double& v : data) v = dist(rng);
  return Tensor::from(std::move(shape), std::move(data), true);
}

Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  Tensor product = ad::matmul(x, weight);
  if (product.rank() == 1) return ad::add(product, bias);
  return ad::add(product, repeat_rows(bias, product.dim(0)));
}

Tensor repeat_rows(const Tensor& row, std::size_t rows) {
  if (row.rank() != 1) throw InvalidShape("repeat_rows expects a rank-1 tensor");
  Tensor ones = Tensor::full({rows, 1}, 1.0);
  return ad::matmul(ones, ad::reshape(row, {1, row.size()}));
}

LstmCell LstmCell::init(std::size_t input_dim, std::size_t hidden, ad::Rng& rng) {
  LstmCell cell;
  cell.w_input = uniform_param({input_dim, 4 * hidden}, input_dim, rng);
  cell.w_hidden = uniform_param({hidden, 4 * hidden}, hidden, rng);
  cell.bias = uniform_param({4 * hidden}, hidden, rng);
  // Forget-gate bias starts at +1.
  auto b = cell.bias.values_mut();
  for (std::size_t k = hidden; k < 2 * hidden; ++k) b[k] += 1.0;
  return cell;
}

LstmCell LstmCell::zeros(std::size_t input_dim, std::size_t hidden) {
  return {Tensor::zeros({input_dim, 4 * hidden}, true), Tensor::zeros({hidden, 4 * hidden}, true),
          Tensor::zeros({4 * hidden}, true)};
}

LstmState LstmCell::zero_state() const {
  return {Tensor::zeros({hidden()}), Tensor::zeros({hidden()})};
}

LstmState LstmCell::step(const Tensor& x, const LstmState& state) const {
  const std::size_t h = hidden();
  if (x.rank() != 1 || x.size() != input_dim()) {
    throw InvalidShape("lstm: input of size " + std::to_string(x.size()) + ", expected " +
                       std::to_string(input_dim()));
  }
  if (state.h.size() != h || state.c.size() != h) throw InvalidShape("lstm: state size mismatch");
  Tensor gates = ad::add(ad::add(ad::matmul(x, w_input), ad::matmul(state.h, w_hidden)), bias);
  Tensor in = ad::sigmoid(ad::slice(gates, 0, h));
  Tensor forget = ad::sigmoid(ad::slice(gates, h, 2 * h));
  Tensor candidate = ad::tanh(ad::slice(gates, 2 * h, 3 * h));
  Tensor out = ad::sigmoid(ad::slice(gates, 3 * h, 4 * h));
  Tensor c = ad::add(ad::mul(forget, state.c), ad::mul(in, candidate));
  return {ad::mul(out, ad::tanh(c)), c};
}

}  // namespace plan::nn

#pragma once

// Central finite differences, used as the independent oracle for every
// backward rule.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "plan/autodiff/ops.hpp"
#include "plan/autodiff/tensor.hpp"

namespace plan::testing {

/// d f / d x by central differences, perturbing x's values in place.
inline std::vector<double> numeric_gradient(ad::Tensor x, const std::function<double()>& f, double h = 1e-5) {
  auto values = x.values_mut();
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + h;
    const double up = f();
    values[i] = saved - h;
    const double down = f();
    values[i] = saved;
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

/// ||a - b|| / max(||a||, ||b||); 0 when both are (numerically) zero.
inline double relative_error(const std::vector<double>& a, std::span<const double> b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double bi = i < b.size() ? b[i] : 0.0;
    diff += (a[i] - bi) * (a[i] - bi);
    na += a[i] * a[i];
    nb += bi * bi;
  }
  const double scale = std::max(std::sqrt(na), std::sqrt(nb));
  if (scale < 1e-12) return std::sqrt(diff);
  return std::sqrt(diff) / scale;
}

inline ad::Tensor random_tensor(ad::Shape shape, std::mt19937_64& rng, bool requires_grad = true, double lo = -1.0,
                                double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> data(ad::element_count(shape));
  for (double& v : data) v = dist(rng);
  return ad::Tensor::from(std::move(shape), std::move(data), requires_grad);
}

/// Largest relative error between backward() and central differences over
/// every input, for a scalar-valued `fn`.
inline double max_gradient_error(std::vector<ad::Tensor> inputs,
                                 const std::function<ad::Tensor(const std::vector<ad::Tensor>&)>& fn,
                                 double h = 1e-5) {
  for (auto& x : inputs) x.zero_grad();
  ad::backward(fn(inputs));
  double worst = 0.0;
  for (auto& x : inputs) {
    if (!x.requires_grad()) continue;
    std::vector<double> analytic(x.grad().begin(), x.grad().end());
    analytic.resize(x.size(), 0.0);
    std::vector<double> numeric = numeric_gradient(x, [&] {
      ad::NoGradGuard guard;
      return fn(inputs).item();
    }, h);
    worst = std::max(worst, relative_error(numeric, analytic));
  }
  return worst;
}

}  // namespace plan::testing

#include "plan/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "plan/errors.hpp"

namespace plan::ad {

namespace {

using NodePtr = std::shared_ptr<detail::Node>;

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

// Builds the result node; attaches parents and the backward rule only when
// recording is on and some input needs a gradient.
Tensor make_result(Shape shape, std::vector<double> value, std::vector<NodePtr> parents,
                   std::function<void(detail::Node&)> rule) {
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->leaf = false;
  bool needs = false;
  if (grad_enabled()) {
    for (const auto& p : parents) needs = needs || p->requires_grad;
  }
  if (needs) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward = std::move(rule);
  }
  return Tensor(std::move(node));
}

void require_finite(std::span<const double> values, const char* op) {
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidValue(std::string(op) + ": non-finite input");
  }
}

enum class Broadcast { equal, left_scalar, right_scalar };

Broadcast broadcast_kind(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Broadcast::equal;
  if (a.rank() == 0) return Broadcast::left_scalar;
  if (b.rank() == 0) return Broadcast::right_scalar;
  throw InvalidShape(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) + " and " +
                     shape_string(b.shape()));
}

// Generic elementwise binary op with broadcast of rank-0 operands.
// `fa`/`fb` give the partial derivatives at (x, y).
template <typename F, typename DA, typename DB>
Tensor binary(const Tensor& a, const Tensor& b, const char* name, F f, DA da, DB db) {
  Broadcast kind = broadcast_kind(a, b, name);
  const Shape& shape = kind == Broadcast::left_scalar ? b.shape() : a.shape();
  std::size_t n = element_count(shape);
  auto av = a.values();
  auto bv = b.values();
  auto ai = [&](std::size_t i) { return kind == Broadcast::left_scalar ? av[0] : av[i]; };
  auto bi = [&](std::size_t i) { return kind == Broadcast::right_scalar ? bv[0] : bv[i]; };
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(ai(i), bi(i));
  NodePtr an = a.node();
  NodePtr bn = b.node();
  return make_result(shape, std::move(out), {an, bn}, [an, bn, kind, da, db](detail::Node& self) {
    const auto& g = self.grad;
    std::size_t n = g.size();
    auto x = [&](std::size_t i) { return kind == Broadcast::left_scalar ? an->value[0] : an->value[i]; };
    auto y = [&](std::size_t i) { return kind == Broadcast::right_scalar ? bn->value[0] : bn->value[i]; };
    if (an->requires_grad) {
      auto& ga = an->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        ga[kind == Broadcast::left_scalar ? 0 : i] += g[i] * da(x(i), y(i));
      }
    }
    if (bn->requires_grad) {
      auto& gb = bn->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        gb[kind == Broadcast::right_scalar ? 0 : i] += g[i] * db(x(i), y(i));
      }
    }
  });
}

// out[m x n] += a[m x k] * b[k x n]
void gemm_acc(const double* a, const double* b, double* out, std::size_t m, std::size_t k,
              std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      double s = a[i * k + p];
      if (s == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += s * brow[j];
    }
  }
}

// out[m x k] += g[m x n] * b[k x n]^T
void gemm_acc_bt(const double* g, const double* b, double* out, std::size_t m, std::size_t k,
                 std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* grow = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
      out[i * k + p] += acc;
    }
  }
}

// out[k x n] += a[m x k]^T * g[m x n]
void gemm_acc_at(const double* a, const double* g, double* out, std::size_t m, std::size_t k,
                 std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* grow = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      double s = a[i * k + p];
      if (s == 0.0) continue;
      double* orow = out + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += s * grow[j];
    }
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() == 0 || b.rank() == 0 || a.rank() > 2 || b.rank() > 2 || (a.rank() == 1 && b.rank() == 1)) {
    throw InvalidShape("matmul: unsupported ranks " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  std::size_t m = a.rank() == 2 ? a.dim(0) : 1;
  std::size_t k = a.rank() == 2 ? a.dim(1) : a.dim(0);
  std::size_t kb = b.dim(0);
  std::size_t n = b.rank() == 2 ? b.dim(1) : 1;
  if (k != kb) {
    throw InvalidShape("matmul: inner extents differ " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  Shape shape;
  if (a.rank() == 2 && b.rank() == 2) {
    shape = {m, n};
  } else if (a.rank() == 2) {
    shape = {m};
  } else {
    shape = {n};
  }
  std::vector<double> out(m * n, 0.0);
  gemm_acc(a.values().data(), b.values().data(), out.data(), m, k, n);
  NodePtr an = a.node();
  NodePtr bn = b.node();
  return make_result(std::move(shape), std::move(out), {an, bn}, [an, bn, m, k, n](detail::Node& self) {
    if (an->requires_grad) gemm_acc_bt(self.grad.data(), bn->value.data(), an->ensure_grad().data(), m, k, n);
    if (bn->requires_grad) gemm_acc_at(an->value.data(), self.grad.data(), bn->ensure_grad().data(), m, k, n);
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor scale(const Tensor& x, double factor) {
  std::vector<double> out(x.values().begin(), x.values().end());
  for (double& v : out) v *= factor;
  NodePtr xn = x.node();
  return make_result(x.shape(), std::move(out), {xn}, [xn, factor](detail::Node& self) {
    auto& gx = xn->ensure_grad();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += factor * self.grad[i];
  });
}

Tensor tanh(const Tensor& x) {
  std::vector<double> out(x.size());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(xv[i]);
  NodePtr xn = x.node();
  return make_result(x.shape(), std::move(out), {xn}, [xn](detail::Node& self) {
    auto& gx = xn->ensure_grad();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      double y = self.value[i];
      gx[i] += self.grad[i] * (1.0 - y * y);
    }
  });
}

Tensor sigmoid(const Tensor& x) {
  std::vector<double> out(x.size());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-xv[i]));
  NodePtr xn = x.node();
  return make_result(x.shape(), std::move(out), {xn}, [xn](detail::Node& self) {
    auto& gx = xn->ensure_grad();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      double y = self.value[i];
      gx[i] += self.grad[i] * y * (1.0 - y);
    }
  });
}

Tensor softmax(const Tensor& x) {
  if (x.rank() != 1) throw InvalidShape("softmax: expects a rank-1 tensor, got " + shape_string(x.shape()));
  auto xv = x.values();
  require_finite(xv, "softmax");
  double peak = *std::max_element(xv.begin(), xv.end());
  std::vector<double> out(xv.size());
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(xv[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  NodePtr xn = x.node();
  return make_result(x.shape(), std::move(out), {xn}, [xn](detail::Node& self) {
    // dx_i = y_i * (g_i - sum_j g_j y_j)
    double dot = 0.0;
    for (std::size_t i = 0; i < self.value.size(); ++i) dot += self.grad[i] * self.value[i];
    auto& gx = xn->ensure_grad();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.value[i] * (self.grad[i] - dot);
  });
}

Tensor cross_entropy(const Tensor& logits, std::size_t target) {
  if (logits.rank() != 1) throw InvalidShape("cross_entropy: expects rank-1 logits");
  if (target >= logits.size()) {
    throw InvalidArgument("cross_entropy: target " + std::to_string(target) + " out of range for " +
                          std::to_string(logits.size()) + " classes");
  }
  auto xv = logits.values();
  require_finite(xv, "cross_entropy");
  double peak = *std::max_element(xv.begin(), xv.end());
  double total = 0.0;
  for (double v : xv) total += std::exp(v - peak);
  double log_z = peak + std::log(total);
  double loss = log_z - xv[target];
  NodePtr xn = logits.node();
  return make_result({}, {loss}, {xn}, [xn, log_z, target](detail::Node& self) {
    auto& gx = xn->ensure_grad();
    double g = self.grad[0];
    for (std::size_t i = 0; i < gx.size(); ++i) {
      double p = std::exp(xn->value[i] - log_z);
      gx[i] += g * (p - (i == target ? 1.0 : 0.0));
    }
  });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw InvalidArgument("concat: no parts");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) throw InvalidShape("concat: axis out of range");
  Shape shape = first;
  shape[axis] = 0;
  for (const Tensor& part : parts) {
    const Shape& s = part.shape();
    if (s.size() != first.size()) throw InvalidShape("concat: rank mismatch");
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (d != axis && s[d] != first[d]) {
        throw InvalidShape("concat: off-axis extent mismatch " + shape_string(s) + " vs " + shape_string(first));
      }
    }
    shape[axis] += s[axis];
  }
  // Treat the layout as [outer, axis extent * inner].
  std::size_t outer = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= first[d];
  std::size_t inner = 1;
  for (std::size_t d = axis + 1; d < first.size(); ++d) inner *= first[d];
  std::size_t row = shape[axis] * inner;

  std::vector<double> out(element_count(shape));
  std::vector<NodePtr> nodes;
  std::vector<std::size_t> widths;
  std::size_t offset = 0;
  for (const Tensor& part : parts) {
    std::size_t width = part.dim(axis) * inner;
    auto pv = part.values();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(pv.begin() + o * width, width, out.begin() + o * row + offset);
    }
    offset += width;
    nodes.push_back(part.node());
    widths.push_back(width);
  }
  return make_result(std::move(shape), std::move(out), nodes, [nodes, widths, outer, row](detail::Node& self) {
    std::size_t offset = 0;
    for (std::size_t p = 0; p < nodes.size(); ++p) {
      if (nodes[p]->requires_grad) {
        auto& gp = nodes[p]->ensure_grad();
        for (std::size_t o = 0; o < outer; ++o) {
          for (std::size_t j = 0; j < widths[p]; ++j) gp[o * widths[p] + j] += self.grad[o * row + offset + j];
        }
      }
      offset += widths[p];
    }
  });
}

Tensor slice(const Tensor& x, std::size_t begin, std::size_t end) {
  if (x.rank() == 0) throw InvalidShape("slice: scalar input");
  if (begin >= end || end > x.dim(0)) throw InvalidShape("slice: bad row range");
  std::size_t inner = x.size() / x.dim(0);
  Shape shape = x.shape();
  shape[0] = end - begin;
  auto xv = x.values();
  std::vector<double> out(xv.begin() + begin * inner, xv.begin() + end * inner);
  NodePtr xn = x.node();
  std::size_t offset = begin * inner;
  return make_result(std::move(shape), std::move(out), {xn}, [xn, offset](detail::Node& self) {
    auto& gx = xn->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[offset + i] += self.grad[i];
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (element_count(shape) != x.size()) {
    throw InvalidShape("reshape: " + shape_string(x.shape()) + " to " + shape_string(shape));
  }
  std::vector<double> out(x.values().begin(), x.values().end());
  NodePtr xn = x.node();
  return make_result(std::move(shape), std::move(out), {xn}, [xn](detail::Node& self) {
    auto& gx = xn->ensure_grad();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
  });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  NodePtr xn = x.node();
  return make_result({}, {total}, {xn}, [xn](detail::Node& self) {
    auto& gx = xn->ensure_grad();
    for (double& g : gx) g += self.grad[0];
  });
}

Tensor dropout(const Tensor& x, double rate, Mode mode, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InvalidArgument("dropout: rate must lie in [0, 1)");
  if (mode == Mode::eval || rate == 0.0) return x;
  std::bernoulli_distribution keep(1.0 - rate);
  double factor = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.size());
  for (double& m : mask) m = keep(rng) ? factor : 0.0;
  std::vector<double> out(x.size());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * mask[i];
  NodePtr xn = x.node();
  return make_result(x.shape(), std::move(out), {xn}, [xn, mask = std::move(mask)](detail::Node& self) {
    auto& gx = xn->ensure_grad();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i] * mask[i];
  });
}

}  // namespace plan::ad

#pragma once

// Dense row-major tensors that record the operations applied to them so that
// gradients can be pulled back from a scalar loss (reverse mode).
//
// A Tensor is a cheap handle onto a shared graph node. Copying a Tensor
// shares the node; use clone() for an independent value.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace plan::ad {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until first needed
  bool requires_grad = false;
  bool leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward;

  std::vector<double>& ensure_grad();
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor from(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double fill, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor vector(std::vector<double> data, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  std::size_t dim(std::size_t axis) const;

  std::span<const double> values() const;
  // Mutable access for leaves (optimizer updates, test perturbations).
  std::span<double> values_mut();
  double item() const;
  double at(std::size_t flat_index) const;

  bool requires_grad() const;
  bool is_leaf() const;
  // Empty span when no gradient has been accumulated yet.
  std::span<const double> grad() const;
  std::span<double> grad_mut();
  void zero_grad();

  // Independent leaf with a copy of the value; no gradient history.
  Tensor clone(bool requires_grad = false) const;
  // Same value, cut from the graph.
  Tensor detach() const;

  // Internal: used by the op implementations.
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Populates gradients of every requires-grad ancestor of `loss`.
/// Leaf gradients accumulate across calls; call zero_grad() to reset them.
void backward(const Tensor& loss);

/// Whether ops record backward closures on this thread.
bool grad_enabled();

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace plan::ad

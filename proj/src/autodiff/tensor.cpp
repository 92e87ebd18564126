#include "plan/autodiff/tensor.hpp"

#include <string>
#include <unordered_set>

#include "plan/errors.hpp"

namespace plan::ad {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) n *= extent;
  return n;
}

std::vector<double>& detail::Node::ensure_grad() {
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  return grad;
}

Tensor Tensor::from(Shape shape, std::vector<double> data, bool requires_grad) {
  for (std::size_t extent : shape) {
    if (extent == 0) throw InvalidShape("tensor extents must be positive");
  }
  if (element_count(shape) != data.size()) {
    throw InvalidShape("tensor data length " + std::to_string(data.size()) +
                       " does not match shape volume " + std::to_string(element_count(shape)));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(data);
  node->requires_grad = requires_grad;
  if (requires_grad) node->ensure_grad();
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double fill, bool requires_grad) {
  std::size_t n = element_count(shape);
  return from(std::move(shape), std::vector<double>(n, fill), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({}, {value}, requires_grad); }

Tensor Tensor::vector(std::vector<double> data, bool requires_grad) {
  std::size_t n = data.size();
  return from({n}, std::move(data), requires_grad);
}

const Shape& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::size() const { return node_->value.size(); }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) throw InvalidShape("axis out of range");
  return node_->shape[axis];
}

std::span<const double> Tensor::values() const { return node_->value; }
std::span<double> Tensor::values_mut() { return node_->value; }

double Tensor::item() const {
  if (size() != 1) throw InvalidShape("item() requires a single-element tensor");
  return node_->value[0];
}

double Tensor::at(std::size_t flat_index) const { return node_->value.at(flat_index); }

bool Tensor::requires_grad() const { return node_->requires_grad; }
bool Tensor::is_leaf() const { return node_->leaf; }

std::span<const double> Tensor::grad() const { return node_->grad; }

std::span<double> Tensor::grad_mut() { return node_->ensure_grad(); }

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::clone(bool requires_grad) const { return from(shape(), node_->value, requires_grad); }

Tensor Tensor::detach() const { return clone(false); }

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) throw InvalidShape("backward() needs a scalar loss");
  detail::Node* root = loss.node().get();
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{root, 0}};
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (detail::Node* node : order) {
    if (!node->leaf) node->grad.assign(node->value.size(), 0.0);
  }
  root->ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->backward) node->backward(*node);
  }
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

}  // namespace plan::ad

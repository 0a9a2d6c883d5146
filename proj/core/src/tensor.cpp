#include "ttita/tensor.hpp"

#include <algorithm>
#include <unordered_set>

#include "ttita/error.hpp"

namespace ttita {

namespace {
thread_local bool t_grad_enabled = true;
}

bool grad_enabled() { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::vector<real>& detail::Node::ensure_grad() {
  if (grad.size() != data.size()) grad.assign(data.size(), real(0));
  return grad;
}

Tensor Tensor::from(Shape shape, std::vector<real> values, bool requires_grad) {
  if (shape.empty()) shape = {1};
  for (auto d : shape) {
    if (d == 0) throw ShapeError("tensor: zero extent in shape " + to_string(shape));
  }
  if (numel(shape) != values.size()) {
    throw ShapeError("tensor: shape " + to_string(shape) + " holds " +
                     std::to_string(numel(shape)) + " values, got " +
                     std::to_string(values.size()));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const auto n = numel(shape);
  return from(std::move(shape), std::vector<real>(n, real(0)), requires_grad);
}

Tensor Tensor::full(Shape shape, real value, bool requires_grad) {
  const auto n = numel(shape);
  return from(std::move(shape), std::vector<real>(n, value), requires_grad);
}

Tensor Tensor::scalar(real value, bool requires_grad) {
  return from({1}, {value}, requires_grad);
}

Tensor Tensor::make(Shape shape, std::vector<real> values, const char* op,
                    std::vector<Tensor> inputs, std::function<void(detail::Node&)> backward) {
  Tensor out = from(std::move(shape), std::move(values), false);
  out.node_->op = op;
  if (!grad_enabled()) return out;
  const bool any = std::any_of(inputs.begin(), inputs.end(),
                               [](const Tensor& t) { return t.defined() && t.requires_grad(); });
  if (!any) return out;
  out.node_->requires_grad = true;
  out.node_->parents.reserve(inputs.size());
  for (auto& t : inputs) out.node_->parents.push_back(t.node_);
  out.node_->backward = std::move(backward);
  return out;
}

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw ShapeError("dim: axis " + std::to_string(axis) + " out of range for " +
                     to_string(shape()));
  }
  return shape()[axis];
}

std::size_t Tensor::size() const { return node_->data.size(); }
std::size_t Tensor::cols() const { return shape().back(); }
std::size_t Tensor::rows() const { return size() / cols(); }

std::span<const real> Tensor::data() const { return node_->data; }
std::span<real> Tensor::mutable_data() { return node_->data; }

real Tensor::item() const {
  if (size() != 1) throw ShapeError("item: tensor of shape " + to_string(shape()) + " is not a scalar");
  return node_->data[0];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }
void Tensor::set_requires_grad(bool on) { node_->requires_grad = on; }
bool Tensor::has_grad() const { return node_->grad.size() == node_->data.size(); }
std::span<const real> Tensor::grad() const { return node_->grad; }
std::span<real> Tensor::mutable_grad() { return node_->ensure_grad(); }
void Tensor::ensure_grad() { node_->ensure_grad(); }
void Tensor::zero_grad() {
  if (has_grad()) std::fill(node_->grad.begin(), node_->grad.end(), real(0));
}

const char* Tensor::op_name() const { return node_->op; }

Tensor Tensor::detach() const { return from(shape(), node_->data, false); }

Tensor Tensor::clone() const { return from(shape(), node_->data, requires_grad()); }

void Tensor::backward() const {
  if (size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got shape " + to_string(shape()));
  }
  if (!requires_grad()) return;

  // Iterative post-order DFS gives a topological order (inputs before users).
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  node_->ensure_grad()[0] += real(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (!node->backward || node->grad.empty()) continue;
    node->backward(*node);
  }
  // Interior grads are scratch; release them so a second backward through a
  // retained graph does not double count.
  for (detail::Node* node : order) {
    if (node->backward) node->grad.clear();
  }
}

}  // namespace ttita

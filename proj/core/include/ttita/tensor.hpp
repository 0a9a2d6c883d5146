#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ttita {

#ifdef TTITA_DOUBLE_PRECISION
using real = double;
#else
using real = float;
#endif

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

namespace detail {

/// One vertex of the differentiation graph. Values and gradients are dense,
/// row-major. `backward` reads this node's grad and accumulates into the
/// grads of `parents`.
struct Node {
  Shape shape;
  std::vector<real> data;
  std::vector<real> grad;
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::vector<real>& ensure_grad();
};

}  // namespace detail

/// Handle to a graph node. Copies share storage; use `detach()` or `clone()`
/// for an independent value.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, real value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<real> values, bool requires_grad = false);
  static Tensor scalar(real value, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;
  /// Leading extent when viewed as a matrix (product of all but the last dim).
  std::size_t rows() const;
  /// Last dim.
  std::size_t cols() const;

  std::span<const real> data() const;
  std::span<real> mutable_data();
  real item() const;
  real at(std::size_t flat_index) const { return data()[flat_index]; }

  bool requires_grad() const;
  void set_requires_grad(bool on);
  bool has_grad() const;
  std::span<const real> grad() const;
  std::span<real> mutable_grad();
  /// Allocates a zero gradient buffer if absent.
  void ensure_grad();
  void zero_grad();

  /// Populates grads of every reachable tensor that requires them with
  /// d(this)/d(tensor). `this` must be a scalar.
  void backward() const;

  /// Same values, cut from the graph.
  Tensor detach() const;
  /// Deep copy of values (and requires_grad flag), no graph, no grad.
  Tensor clone() const;

  const char* op_name() const;
  const std::shared_ptr<detail::Node>& node() const { return node_; }

  /// Used by operation implementations to construct results.
  static Tensor make(Shape shape, std::vector<real> values, const char* op,
                     std::vector<Tensor> inputs, std::function<void(detail::Node&)> backward);

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

/// Whether operations currently record the graph (thread-local).
bool grad_enabled();

/// Disables graph recording for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace ttita

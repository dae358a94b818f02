#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace volcast::ad {

/// Row-major dense storage; every tensor is a matrix, a vector is a 1 x n or n x 1 matrix.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Node {
  Matrix value;
  /// Empty until a gradient reaches this node.
  Matrix grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  /// Pushes `grad` of this node into the parents' grads.
  std::function<void(const Matrix& grad_out)> backward;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor constant(Matrix value);
  /// Leaf that accumulates gradients across backward passes until `zero_grad`.
  static Tensor parameter(Matrix value);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  /// In-place access for optimizers and initialisation; bypasses the tape.
  Matrix& mutable_value() { return node_->value; }
  bool has_grad() const { return node_->grad.size() != 0; }
  /// Gradient, or zeros of the value's shape when none has arrived.
  Matrix grad() const;
  void zero_grad() { node_->grad.resize(0, 0); }
  bool requires_grad() const { return node_->requires_grad; }

  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  std::array<Eigen::Index, 2> shape() const { return {rows(), cols()}; }
  std::string shape_string() const;
  /// Value of a 1 x 1 tensor.
  double item() const;

  /// Same value, cut from the tape.
  Tensor detach() const { return constant(value()); }

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Reverse-mode sweep from a 1 x 1 loss. Throws NonScalarLoss otherwise.
void backward(const Tensor& loss);

/// While alive on this thread, ops record no tape.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

namespace detail {
/// Builds an op result; the tape node is recorded only when some input requires gradients.
Tensor make_result(Matrix value, std::vector<Tensor> inputs, std::function<void(const Matrix&)> backward);
void accumulate(Node& node, const Matrix& grad);
}  // namespace detail

}  // namespace volcast::ad

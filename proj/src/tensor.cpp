#include "volcast/tensor.hpp"

#include <unordered_set>

#include "volcast/error.hpp"

namespace volcast::ad {

namespace {
thread_local bool g_grad_enabled = true;
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

Tensor Tensor::constant(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return Tensor(std::move(n));
}

Tensor Tensor::parameter(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(double value) { return constant(Matrix::Constant(1, 1, value)); }

Matrix Tensor::grad() const {
  if (has_grad()) return node_->grad;
  return Matrix::Zero(rows(), cols());
}

std::string Tensor::shape_string() const {
  return std::to_string(rows()) + "x" + std::to_string(cols());
}

double Tensor::item() const {
  if (rows() != 1 || cols() != 1) throw Error(ErrorCode::ShapeMismatch, "item() on " + shape_string());
  return value()(0, 0);
}

namespace detail {

void accumulate(Node& node, const Matrix& grad) {
  if (!node.requires_grad) return;
  if (node.grad.size() == 0)
    node.grad = grad;
  else
    node.grad += grad;
}

Tensor make_result(Matrix value, std::vector<Tensor> inputs, std::function<void(const Matrix&)> backward) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  if (!g_grad_enabled) return Tensor(std::move(n));
  for (const auto& in : inputs) {
    if (in.requires_grad()) {
      n->requires_grad = true;
      break;
    }
  }
  if (n->requires_grad) {
    n->parents.reserve(inputs.size());
    for (auto& in : inputs) n->parents.push_back(in.node());
    n->backward = std::move(backward);
  }
  return Tensor(std::move(n));
}

}  // namespace detail

void backward(const Tensor& loss) {
  if (loss.rows() != 1 || loss.cols() != 1)
    throw Error(ErrorCode::NonScalarLoss, "backward() needs a 1x1 loss, got " + loss.shape_string());
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS; reversed, it visits every node after all of its consumers.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node().get(), 0}};
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  Node& root = *loss.node();
  detail::accumulate(root, Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && n->grad.size() != 0) n->backward(n->grad);
  }
  // Interior gradients are only needed during the sweep.
  for (Node* n : order)
    if (n->backward) n->grad.resize(0, 0);
}

}  // namespace volcast::ad

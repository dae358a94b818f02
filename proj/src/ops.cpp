#include "volcast/ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <string>

#include "volcast/error.hpp"

namespace volcast::ad {

using detail::accumulate;
using detail::make_result;

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw Error(ErrorCode::ShapeMismatch, std::string(op) + ": " + a.shape_string() + " vs " + b.shape_string());
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error(op, a, b);
}

/// Elementwise unary op with derivative expressed through input and output values.
template <typename F, typename DF>
Tensor unary(const Tensor& x, F f, DF df) {
  Matrix out = x.value().unaryExpr(f);
  auto xn = x.node();
  Matrix y = out;
  return make_result(std::move(out), {x}, [xn, y = std::move(y), df](const Matrix& g) {
    Matrix d(g.rows(), g.cols());
    for (Eigen::Index i = 0; i < g.size(); ++i) d.data()[i] = g.data()[i] * df(xn->value.data()[i], y.data()[i]);
    accumulate(*xn, d);
  });
}

double stable_sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  auto an = a.node(), bn = b.node();
  return make_result(a.value() * b.value(), {a, b}, [an, bn](const Matrix& g) {
    if (an->requires_grad) accumulate(*an, g * bn->value.transpose());
    if (bn->requires_grad) accumulate(*bn, an->value.transpose() * g);
  });
}

Tensor transpose(const Tensor& a) {
  auto an = a.node();
  return make_result(a.value().transpose(), {a}, [an](const Matrix& g) { accumulate(*an, g.transpose()); });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  auto an = a.node(), bn = b.node();
  return make_result(a.value() + b.value(), {a, b}, [an, bn](const Matrix& g) {
    accumulate(*an, g);
    accumulate(*bn, g);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  auto an = a.node(), bn = b.node();
  return make_result(a.value() - b.value(), {a, b}, [an, bn](const Matrix& g) {
    accumulate(*an, g);
    if (bn->requires_grad) accumulate(*bn, -g);
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  auto an = a.node(), bn = b.node();
  return make_result(a.value().cwiseProduct(b.value()), {a, b}, [an, bn](const Matrix& g) {
    if (an->requires_grad) accumulate(*an, g.cwiseProduct(bn->value));
    if (bn->requires_grad) accumulate(*bn, g.cwiseProduct(an->value));
  });
}

Tensor add_row(const Tensor& x, const Tensor& b) {
  if (b.rows() != 1 || b.cols() != x.cols()) shape_error("add_row", x, b);
  auto xn = x.node(), bn = b.node();
  Matrix out = x.value().rowwise() + b.value().row(0);
  return make_result(std::move(out), {x, b}, [xn, bn](const Matrix& g) {
    accumulate(*xn, g);
    if (bn->requires_grad) accumulate(*bn, g.colwise().sum());
  });
}

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) { return add_row(matmul(x, w), b); }

Tensor scale_shift(const Tensor& x, double alpha, double beta) {
  auto xn = x.node();
  Matrix out = (alpha * x.value()).array() + beta;
  return make_result(std::move(out), {x}, [xn, alpha](const Matrix& g) { accumulate(*xn, alpha * g); });
}

Tensor mul_scalar(const Tensor& x, const Tensor& s) {
  if (s.rows() != 1 || s.cols() != 1) shape_error("mul_scalar", x, s);
  auto xn = x.node(), sn = s.node();
  return make_result(x.value() * s.item(), {x, s}, [xn, sn](const Matrix& g) {
    if (xn->requires_grad) accumulate(*xn, g * sn->value(0, 0));
    if (sn->requires_grad) accumulate(*sn, Matrix::Constant(1, 1, g.cwiseProduct(xn->value).sum()));
  });
}

Tensor abs(const Tensor& x) {
  return unary(
      x, [](double v) { return std::abs(v); },
      [](double v, double) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
}

Tensor sigmoid(const Tensor& x) {
  return unary(x, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor softplus(const Tensor& x) {
  return unary(
      x, [](double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); },
      [](double v, double) { return stable_sigmoid(v); });
}

Tensor exp(const Tensor& x) {
  return unary(
      x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor sin(const Tensor& x) {
  return unary(
      x, [](double v) { return std::sin(v); }, [](double v, double) { return std::cos(v); });
}

Tensor cos(const Tensor& x) {
  return unary(
      x, [](double v) { return std::cos(v); }, [](double v, double) { return -std::sin(v); });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw Error(ErrorCode::ShapeMismatch, "concat_cols: no inputs");
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != parts.front().rows()) shape_error("concat_cols", parts.front(), p);
    cols += p.cols();
  }
  Matrix out(parts.front().rows(), cols);
  std::vector<std::shared_ptr<Node>> nodes;
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
    nodes.push_back(p.node());
  }
  return make_result(std::move(out), parts, [nodes](const Matrix& g) {
    Eigen::Index off = 0;
    for (const auto& n : nodes) {
      if (n->requires_grad) accumulate(*n, g.middleCols(off, n->value.cols()));
      off += n->value.cols();
    }
  });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw Error(ErrorCode::ShapeMismatch, "concat_rows: no inputs");
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != parts.front().cols()) shape_error("concat_rows", parts.front(), p);
    rows += p.rows();
  }
  Matrix out(rows, parts.front().cols());
  std::vector<std::shared_ptr<Node>> nodes;
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
    nodes.push_back(p.node());
  }
  return make_result(std::move(out), parts, [nodes](const Matrix& g) {
    Eigen::Index off = 0;
    for (const auto& n : nodes) {
      if (n->requires_grad) accumulate(*n, g.middleRows(off, n->value.rows()));
      off += n->value.rows();
    }
  });
}

Tensor slice_cols(const Tensor& x, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > x.cols())
    throw Error(ErrorCode::ShapeMismatch, "slice_cols out of range on " + x.shape_string());
  auto xn = x.node();
  return make_result(x.value().middleCols(start, count), {x}, [xn, start, count](const Matrix& g) {
    Matrix d = Matrix::Zero(xn->value.rows(), xn->value.cols());
    d.middleCols(start, count) = g;
    accumulate(*xn, d);
  });
}

Tensor slice_rows(const Tensor& x, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > x.rows())
    throw Error(ErrorCode::ShapeMismatch, "slice_rows out of range on " + x.shape_string());
  auto xn = x.node();
  return make_result(x.value().middleRows(start, count), {x}, [xn, start, count](const Matrix& g) {
    Matrix d = Matrix::Zero(xn->value.rows(), xn->value.cols());
    d.middleRows(start, count) = g;
    accumulate(*xn, d);
  });
}

Tensor sum(const Tensor& x) {
  auto xn = x.node();
  return make_result(Matrix::Constant(1, 1, x.value().sum()), {x}, [xn](const Matrix& g) {
    accumulate(*xn, Matrix::Constant(xn->value.rows(), xn->value.cols(), g(0, 0)));
  });
}

Tensor mean(const Tensor& x) { return scale_shift(sum(x), 1.0 / double(x.value().size())); }

Tensor mse(const Tensor& prediction, const Tensor& target) {
  require_same_shape("mse", prediction, target);
  auto pn = prediction.node(), tn = target.node();
  const Matrix diff = prediction.value() - target.value();
  const double n = double(diff.size());
  return make_result(Matrix::Constant(1, 1, diff.squaredNorm() / n), {prediction, target},
                     [pn, tn, diff, n](const Matrix& g) {
                       const Matrix d = (2.0 * g(0, 0) / n) * diff;
                       if (pn->requires_grad) accumulate(*pn, d);
                       if (tn->requires_grad) accumulate(*tn, -d);
                     });
}

Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<Eigen::Index>& labels) {
  const Eigen::Index n = logits.rows(), c = logits.cols();
  if (Eigen::Index(labels.size()) != n)
    throw Error(ErrorCode::ShapeMismatch, "softmax_cross_entropy: " + std::to_string(labels.size()) +
                                              " labels for " + logits.shape_string());
  Matrix prob(n, c);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[std::size_t(i)] < 0 || labels[std::size_t(i)] >= c)
      throw Error(ErrorCode::ShapeMismatch, "softmax_cross_entropy: label out of range");
    const double m = logits.value().row(i).maxCoeff();
    prob.row(i) = (logits.value().row(i).array() - m).exp();
    const double z = prob.row(i).sum();
    prob.row(i) /= z;
    loss += (m + std::log(z)) - logits.value()(i, labels[std::size_t(i)]);
  }
  auto ln = logits.node();
  return make_result(Matrix::Constant(1, 1, loss / double(n)), {logits}, [ln, prob, labels, n](const Matrix& g) {
    Matrix d = prob;
    for (Eigen::Index i = 0; i < n; ++i) d(i, labels[std::size_t(i)]) -= 1.0;
    accumulate(*ln, d * (g(0, 0) / double(n)));
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const Eigen::Index n = x.rows(), c = x.cols();
  if (gamma.rows() != 1 || gamma.cols() != c) shape_error("layer_norm", x, gamma);
  if (beta.rows() != 1 || beta.cols() != c) shape_error("layer_norm", x, beta);
  Matrix xhat(n, c);
  Eigen::VectorXd inv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = x.value().row(i).mean();
    const double var = (x.value().row(i).array() - mu).square().mean();
    inv[i] = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (x.value().row(i).array() - mu) * inv[i];
  }
  Matrix out = (xhat.array().rowwise() * gamma.value().row(0).array()).rowwise() + beta.value().row(0).array();
  auto xn = x.node(), gn = gamma.node(), bn = beta.node();
  return make_result(std::move(out), {x, gamma, beta}, [xn, gn, bn, xhat, inv](const Matrix& g) {
    if (gn->requires_grad) accumulate(*gn, g.cwiseProduct(xhat).colwise().sum());
    if (bn->requires_grad) accumulate(*bn, g.colwise().sum());
    if (xn->requires_grad) {
      Matrix dxhat = g.array().rowwise() * gn->value.row(0).array();
      Matrix dx(dxhat.rows(), dxhat.cols());
      for (Eigen::Index i = 0; i < dxhat.rows(); ++i) {
        const double m1 = dxhat.row(i).mean();
        const double m2 = dxhat.row(i).cwiseProduct(xhat.row(i)).mean();
        dx.row(i) = inv[i] * (dxhat.row(i).array() - m1 - xhat.row(i).array() * m2);
      }
      accumulate(*xn, dx);
    }
  });
}

namespace {

using IndexList = std::shared_ptr<const std::vector<Eigen::Index>>;

Tensor gather_shared(const Tensor& x, Eigen::Index rows, Eigen::Index cols, IndexList source) {
  if (Eigen::Index(source->size()) != rows * cols)
    throw Error(ErrorCode::ShapeMismatch, "gather: index count does not match output shape");
  const Eigen::Index in_size = x.value().size();
  Matrix out(rows, cols);
  const double* src = x.value().data();
  const auto& idx = *source;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto s = idx[i];
    if (s >= in_size) throw Error(ErrorCode::ShapeMismatch, "gather: index out of range");
    out.data()[i] = s < 0 ? 0.0 : src[s];
  }
  auto xn = x.node();
  return make_result(std::move(out), {x}, [xn, source = std::move(source)](const Matrix& g) {
    Matrix d = Matrix::Zero(xn->value.rows(), xn->value.cols());
    const auto& idx = *source;
    for (std::size_t i = 0; i < idx.size(); ++i)
      if (idx[i] >= 0) d.data()[idx[i]] += g.data()[i];
    accumulate(*xn, d);
  });
}

}  // namespace

Tensor gather(const Tensor& x, Eigen::Index rows, Eigen::Index cols, const std::vector<Eigen::Index>& source) {
  return gather_shared(x, rows, cols, std::make_shared<const std::vector<Eigen::Index>>(source));
}

Tensor embedding_lookup(const Tensor& table, const std::vector<Eigen::Index>& indices) {
  const Eigen::Index d = table.cols();
  std::vector<Eigen::Index> source;
  source.reserve(indices.size() * std::size_t(d));
  for (auto idx : indices) {
    if (idx < 0 || idx >= table.rows()) throw Error(ErrorCode::ShapeMismatch, "embedding_lookup: index out of range");
    for (Eigen::Index j = 0; j < d; ++j) source.push_back(idx * d + j);
  }
  return gather(table, Eigen::Index(indices.size()), d, source);
}

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, Eigen::Index height, Eigen::Index width,
              Eigen::Index kernel_h, Eigen::Index kernel_w) {
  const Eigen::Index cin = x.cols();
  if (x.rows() != height * width)
    throw Error(ErrorCode::ShapeMismatch, "conv2d: input " + x.shape_string() + " is not an " +
                                              std::to_string(height) + "x" + std::to_string(width) + " grid");
  if (kernel_h % 2 == 0 || kernel_w % 2 == 0)
    throw Error(ErrorCode::ShapeMismatch, "conv2d: same padding needs odd kernel sizes");
  if (weight.rows() != cin * kernel_h * kernel_w) shape_error("conv2d", x, weight);
  // Taps further from the centre than the grid extent only ever read padding; drop them.
  const Eigen::Index ph = kernel_h / 2, pw = kernel_w / 2;
  const Eigen::Index i0 = std::max<Eigen::Index>(0, ph - (height - 1)), i1 = std::min(kernel_h, ph + height);
  const Eigen::Index j0 = std::max<Eigen::Index>(0, pw - (width - 1)), j1 = std::min(kernel_w, pw + width);
  const Eigen::Index kh = i1 - i0, kw = j1 - j0, patch = cin * kh * kw;

  struct Layout {
    IndexList source;       // im2row gather over the kept taps
    IndexList weight_rows;  // kept rows of the full weight, empty when nothing is dropped
  };
  thread_local std::map<std::array<Eigen::Index, 6>, Layout> layouts;
  auto& layout = layouts[{height, width, cin, kernel_h, kernel_w, weight.cols()}];
  if (!layout.source) {
    std::vector<Eigen::Index> source(std::size_t(height * width * patch), -1);
    for (Eigen::Index y = 0; y < height; ++y)
      for (Eigen::Index xx = 0; xx < width; ++xx) {
        const Eigen::Index row = y * width + xx;
        for (Eigen::Index c = 0; c < cin; ++c)
          for (Eigen::Index i = i0; i < i1; ++i)
            for (Eigen::Index j = j0; j < j1; ++j) {
              const Eigen::Index sy = y + i - ph, sx = xx + j - pw;
              if (sy < 0 || sy >= height || sx < 0 || sx >= width) continue;
              source[std::size_t(row * patch + (c * kh + i - i0) * kw + j - j0)] = (sy * width + sx) * cin + c;
            }
      }
    layout.source = std::make_shared<const std::vector<Eigen::Index>>(std::move(source));
    if (kh != kernel_h || kw != kernel_w) {
      std::vector<Eigen::Index> rows;
      for (Eigen::Index c = 0; c < cin; ++c)
        for (Eigen::Index i = i0; i < i1; ++i)
          for (Eigen::Index j = j0; j < j1; ++j)
            for (Eigen::Index o = 0; o < weight.cols(); ++o)
              rows.push_back(((c * kernel_h + i) * kernel_w + j) * weight.cols() + o);
      layout.weight_rows = std::make_shared<const std::vector<Eigen::Index>>(std::move(rows));
    }
  }
  const Tensor w = layout.weight_rows ? gather_shared(weight, patch, weight.cols(), layout.weight_rows) : weight;
  return affine(gather_shared(x, height * width, patch, layout.source), w, bias);
}

Tensor silu(const Tensor& x) { return mul(x, sigmoid(x)); }

}  // namespace volcast::ad

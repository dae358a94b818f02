#pragma once

#include <vector>

#include "volcast/tensor.hpp"

namespace volcast::ad {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Elementwise product.
Tensor mul(const Tensor& a, const Tensor& b);
/// x + b with b (1 x C) broadcast over the leading (row) dimension.
Tensor add_row(const Tensor& x, const Tensor& b);
/// x W + b.
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b);
/// alpha * x + beta.
Tensor scale_shift(const Tensor& x, double alpha, double beta = 0.0);
/// x scaled by the single value of a 1 x 1 tensor s.
Tensor mul_scalar(const Tensor& x, const Tensor& s);

/// Subgradient 0 at exactly 0.
Tensor abs(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor softplus(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor sin(const Tensor& x);
Tensor cos(const Tensor& x);

Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& x, Eigen::Index start, Eigen::Index count);
Tensor slice_rows(const Tensor& x, Eigen::Index start, Eigen::Index count);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

/// Mean of squared differences, 1 x 1.
Tensor mse(const Tensor& prediction, const Tensor& target);
/// Mean over rows of -log softmax(logits[i])[labels[i]], 1 x 1.
Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<Eigen::Index>& labels);
/// Row-wise normalisation to zero mean and unit variance, then gamma * . + beta (both 1 x C).
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

/// out.flat[i] = x.flat[source[i]], or 0 where source[i] < 0. Backward scatter-adds.
Tensor gather(const Tensor& x, Eigen::Index rows, Eigen::Index cols, const std::vector<Eigen::Index>& source);
/// Rows `indices` of `table`.
Tensor embedding_lookup(const Tensor& table, const std::vector<Eigen::Index>& indices);

/// Same-padded 2-D convolution on an H x W grid. Input is (H*W) x C_in with row index y*W + x,
/// weight is (C_in*kh*kw) x C_out (row index (c*kh + i)*kw + j), bias 1 x C_out; output (H*W) x C_out.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, Eigen::Index height, Eigen::Index width,
              Eigen::Index kernel_h, Eigen::Index kernel_w);

/// x * sigmoid(x).
Tensor silu(const Tensor& x);

}  // namespace volcast::ad

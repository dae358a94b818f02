#pragma once

#include <cstdint>
#include <vector>

#include "volcast/checkpoint.hpp"
#include "volcast/features.hpp"
#include "volcast/ops.hpp"

namespace volcast {

struct ModelConfig {
  int latent_dim = 16;       // d
  int align_dim = 32;        // d_a
  int blocks = 2;            // L
  int top_k = 4;             // k
  int inception_width = 24;  // d_i
  std::vector<int> kernel_sizes{1, 3, 5};
  int lookback = 12;  // T
  int horizon = 1;    // H
  int label_len = 2;
  double align_weight = 0.1;  // lambda
  double temperature = 0.07;
  int news_dim = 768;
  int feature_dim = int(kFeatureDim);
  int marker_dim = int(kMarkerDim);

  /// Throws InvalidConfig on non-positive sizes, k > T, label_len > T, even kernels.
  void validate() const;
};

/// One model input Z_t = (X_t, N_t, M_t) with its target y_{t+H}.
struct WindowSample {
  Date last_input;  // t
  Date target_date;  // t + H (trading days)
  Split split = Split::None;
  ad::Matrix features;  // T x 9, raw
  ad::Matrix news;      // T x d_n
  std::vector<CalendarMarker> markers;
  double target = 0.0;
};

/// Per-feature standardisation with statistics from the training split.
struct FeatureScaler {
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(kFeatureDim);
  Eigen::RowVectorXd scale = Eigen::RowVectorXd::Ones(kFeatureDim);
  /// Mean training target; the head predicts in multiples of it.
  double target_scale = 1.0;

  static FeatureScaler fit(const std::vector<FeatureRow>& rows);
  ad::Matrix apply(const ad::Matrix& x) const;
};

/// Which inputs reach the network; ablations switch these off.
struct InputMask {
  bool volume = true;
  bool news = true;
};

struct LatentState {
  ad::Tensor price;  // T x d
  ad::Tensor news;   // T x d
  ad::Tensor time;   // T x d
  ad::Tensor joint;  // T x 3d
};

struct AlignmentPair {
  ad::Tensor price;  // r, T x d_a
  ad::Tensor news;   // t, T x d_a
  /// rho with temperature exp(rho), 1 x 1.
  ad::Tensor log_temperature;

  double temperature() const;
};

struct GateOutput {
  ad::Tensor gate;   // a, T x 1
  ad::Tensor fused;  // z, T x d
  ad::Tensor out;    // projected interactions, T x 3d
};

struct ForwardResult {
  ad::Tensor prediction;  // 1 x 1, > 0
  AlignmentPair pair;
};

/// Contrastive loss with within-window negatives, averaged over positions.
/// Throws DegenerateWindow when T < 2.
ad::Tensor info_nce(const AlignmentPair& pair);

/// Harmonic sin/cos encoding of (day of week, day of month, month), T x 6.
ad::Tensor harmonic_encoding(const std::vector<CalendarMarker>& markers);

/// Spectral top-k filter along time: Re(F^-1 P_k F x), with the kept set chosen from x's current
/// values and held fixed for differentiation.
ad::Tensor spectral_filter(const ad::Tensor& x, Eigen::Index k);

class M2vn {
 public:
  M2vn(ModelConfig config, FeatureScaler scaler, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const FeatureScaler& scaler() const { return scaler_; }
  ad::ParameterSet& parameters() { return params_; }
  const ad::ParameterSet& parameters() const { return params_; }
  InputMask& mask() { return mask_; }
  const InputMask& mask() const { return mask_; }

  LatentState encode(const WindowSample& sample) const;
  /// h + G(C(h)), shape preserving.
  ad::Tensor dynamics_block(std::size_t layer, const ad::Tensor& h) const;
  /// Spectral filter on the price slice followed by period-folded inception convolution.
  ad::Tensor spectral_conv(std::size_t layer, const ad::Tensor& h) const;
  GateOutput gated_fusion(std::size_t layer, const ad::Tensor& r, const ad::Tensor& t) const;
  AlignmentPair align(const ad::Tensor& h) const;
  ad::Tensor project_head(const ad::Tensor& h) const;
  ForwardResult forward(const WindowSample& sample) const;

  /// Sets the head bias so an all-zero latent predicts `value`.
  void set_output_level(double value);

 private:
  std::string block_name(std::size_t layer, const std::string& part) const;
  ad::Tensor inception(std::size_t layer, const std::string& stage, const ad::Tensor& grid, Eigen::Index height,
                       Eigen::Index width) const;

  ModelConfig config_;
  FeatureScaler scaler_;
  InputMask mask_;
  ad::ParameterSet params_;
};

}  // namespace volcast

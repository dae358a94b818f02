#pragma once

#include <vector>

#include "volcast/tensor.hpp"

namespace volcast::ad {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Cosine-decay horizon in steps; 0 keeps the rate constant.
  long total_steps = 0;
};

/// Multiplier 0.5 (1 + cos(pi t / t_max)), clamped to 0 past the horizon.
double cosine_decay(long step, long total_steps);

class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig config);

  /// Learning rate applied by the update with 0-based index `step`.
  double learning_rate_at(long step) const;
  /// One update from the parameters' current gradients (missing gradients count as zero).
  void step();
  void zero_grad();

  long step_count() const { return step_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }

 private:
  std::vector<Tensor> params_;
  AdamConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long step_ = 0;
};

}  // namespace volcast::ad

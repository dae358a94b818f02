#include "volcast/optim.hpp"

#include <cmath>
#include <numbers>

#include "volcast/error.hpp"

namespace volcast::ad {

double cosine_decay(long step, long total_steps) {
  if (total_steps <= 0) return 1.0;
  if (step >= total_steps) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * double(step) / double(total_steps)));
}

Adam::Adam(std::vector<Tensor> params, AdamConfig config) : params_(std::move(params)), config_(config) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.push_back(Matrix::Zero(p.rows(), p.cols()));
    v_.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
}

double Adam::learning_rate_at(long step) const {
  return config_.learning_rate * cosine_decay(step, config_.total_steps);
}

void Adam::step() {
  const double lr = learning_rate_at(step_);
  ++step_;
  const double c1 = 1.0 - std::pow(config_.beta1, double(step_));
  const double c2 = 1.0 - std::pow(config_.beta2, double(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    if (!p.has_grad()) {
      m_[i] *= config_.beta1;
      v_[i] *= config_.beta2;
    } else {
      const Matrix& g = p.node()->grad;
      if (g.rows() != p.rows() || g.cols() != p.cols())
        throw Error(ErrorCode::ShapeMismatch, "adam: gradient shape differs from parameter");
      m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
      v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g.cwiseAbs2();
    }
    const Matrix mhat = m_[i] / c1;
    const Matrix vhat = v_[i] / c2;
    p.mutable_value().array() -= lr * mhat.array() / (vhat.array().sqrt() + config_.epsilon);
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace volcast::ad

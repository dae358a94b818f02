#pragma once

#include <cmath>

#include <Eigen/Core>

#include "volcast/error.hpp"

namespace volcast {

/// x - ln x - 1 for x = y / yhat; non-negative, zero only at x = 1.
template <typename Scalar>
Scalar qlike_term(Scalar ratio) {
  using std::log;
  return ratio - log(ratio) - Scalar(1);
}

/// Mean absolute percentage error, in percent. Throws ZeroTarget if any y <= 0.
template <typename DerivedY, typename DerivedP>
typename DerivedY::Scalar mape(const Eigen::MatrixBase<DerivedY>& y, const Eigen::MatrixBase<DerivedP>& yhat) {
  using Scalar = typename DerivedY::Scalar;
  if (y.size() != yhat.size()) throw Error(ErrorCode::DimensionMismatch, "mape: length mismatch");
  if (y.size() == 0) throw Error(ErrorCode::EmptyTestSet, "mape: no observations");
  if ((y.array() <= Scalar(0)).any()) throw Error(ErrorCode::ZeroTarget, "mape: target must be positive");
  return Scalar(100) * ((y.array() - yhat.array()) / y.array()).abs().mean();
}

/// Mean of qlike_term(y / yhat). Throws NonPositiveInput if any y or yhat <= 0.
template <typename DerivedY, typename DerivedP>
typename DerivedY::Scalar qlike(const Eigen::MatrixBase<DerivedY>& y, const Eigen::MatrixBase<DerivedP>& yhat) {
  using Scalar = typename DerivedY::Scalar;
  if (y.size() != yhat.size()) throw Error(ErrorCode::DimensionMismatch, "qlike: length mismatch");
  if (y.size() == 0) throw Error(ErrorCode::EmptyTestSet, "qlike: no observations");
  if ((y.array() <= Scalar(0)).any() || (yhat.array() <= Scalar(0)).any())
    throw Error(ErrorCode::NonPositiveInput, "qlike: inputs must be positive");
  const auto ratio = (y.array() / yhat.array()).eval();
  return (ratio - ratio.log() - Scalar(1)).mean();
}

}  // namespace volcast

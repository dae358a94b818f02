#pragma once

#include <cmath>
#include <numbers>

namespace volcast {

/// Range-based daily volatility estimate in standard-deviation units.
/// `clamped` is set when a negative variance interior was floored at zero.
template <typename Scalar>
struct Estimate {
  Scalar value{0};
  bool clamped = false;
};

template <typename Scalar>
Estimate<Scalar> parkinson(Scalar high, Scalar low) {
  using std::log;
  using std::sqrt;
  const Scalar hl = log(high / low);
  return {sqrt(hl * hl / (Scalar(4) * std::numbers::ln2_v<Scalar>)), false};
}

template <typename Scalar>
Estimate<Scalar> garman_klass(Scalar open, Scalar high, Scalar low, Scalar close) {
  using std::log;
  using std::sqrt;
  const Scalar hl = log(high / low);
  const Scalar co = log(close / open);
  const Scalar interior = Scalar(0.5) * hl * hl - (Scalar(2) * std::numbers::ln2_v<Scalar> - Scalar(1)) * co * co;
  if (interior < Scalar(0)) return {Scalar(0), true};
  return {sqrt(interior), false};
}

template <typename Scalar>
Estimate<Scalar> rogers_satchell(Scalar open, Scalar high, Scalar low, Scalar close) {
  using std::log;
  using std::sqrt;
  const Scalar interior = log(high / close) * log(high / open) + log(low / close) * log(low / open);
  if (interior < Scalar(0)) return {Scalar(0), true};
  return {sqrt(interior), false};
}

/// Weights for combining the three estimators; normalised on use.
struct AggregationWeights {
  double parkinson = 1.0;
  double garman_klass = 1.0;
  double rogers_satchell = 1.0;
};

template <typename Scalar>
Scalar aggregate_target(Scalar p, Scalar gk, Scalar rs, const AggregationWeights& w = {}) {
  const Scalar total = Scalar(w.parkinson + w.garman_klass + w.rogers_satchell);
  return (Scalar(w.parkinson) * p + Scalar(w.garman_klass) * gk + Scalar(w.rogers_satchell) * rs) / total;
}

}  // namespace volcast

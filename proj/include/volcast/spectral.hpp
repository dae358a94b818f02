#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "volcast/error.hpp"

namespace volcast::spectral {

template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RealMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Unitary DFT of a T x d sequence along time.
/// `energies[w]` is the Euclidean norm of row `w` of `coefficients`.
template <typename Scalar>
struct Spectrum {
  ComplexMatrix<Scalar> coefficients;
  RealVector<Scalar> energies;

  Eigen::Index length() const { return coefficients.rows(); }
  Eigen::Index width() const { return coefficients.cols(); }
};

template <typename Scalar>
struct KTermApprox {
  /// Kept frequency indices, in descending energy order.
  std::vector<Eigen::Index> kept;
  ComplexMatrix<Scalar> reconstruction;
  /// Sum of squared energies of the dropped frequencies.
  Scalar residual_energy{0};
};

template <typename Scalar>
struct Period {
  Eigen::Index frequency = 0;
  Scalar length{0};
  Scalar amplitude{0};
};

namespace detail {

/// e^{sign * 2 pi i (w t mod T) / T}; reducing the product first keeps the angle exact in integers.
template <typename Scalar>
std::complex<Scalar> twiddle(Eigen::Index w, Eigen::Index t, Eigen::Index T, int sign) {
  const Eigen::Index m = (w * t) % T;
  const Scalar angle = Scalar(sign) * Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(m) / Scalar(T);
  return {std::cos(angle), std::sin(angle)};
}

template <typename Scalar>
RealVector<Scalar> row_norms(const ComplexMatrix<Scalar>& c) {
  RealVector<Scalar> e(c.rows());
  for (Eigen::Index w = 0; w < c.rows(); ++w) e[w] = c.row(w).norm();
  return e;
}

}  // namespace detail

/// Unitary DFT of a complex sequence (direct summation).
template <typename Scalar>
ComplexMatrix<Scalar> dft_complex(const ComplexMatrix<Scalar>& h) {
  const Eigen::Index T = h.rows();
  const Scalar scale = Scalar(1) / std::sqrt(Scalar(T));
  ComplexMatrix<Scalar> out = ComplexMatrix<Scalar>::Zero(T, h.cols());
  for (Eigen::Index w = 0; w < T; ++w)
    for (Eigen::Index t = 0; t < T; ++t) out.row(w) += detail::twiddle<Scalar>(w, t, T, -1) * h.row(t);
  return out * scale;
}

/// Inverse of the unitary DFT.
template <typename Scalar>
ComplexMatrix<Scalar> idft(const ComplexMatrix<Scalar>& c) {
  const Eigen::Index T = c.rows();
  const Scalar scale = Scalar(1) / std::sqrt(Scalar(T));
  ComplexMatrix<Scalar> out = ComplexMatrix<Scalar>::Zero(T, c.cols());
  for (Eigen::Index t = 0; t < T; ++t)
    for (Eigen::Index w = 0; w < T; ++w) out.row(t) += detail::twiddle<Scalar>(w, t, T, +1) * c.row(w);
  return out * scale;
}

/// Unitary DFT of a real T x d sequence. Bins above T/2 are written as exact conjugates of
/// their mirror so that conjugate pairs carry bit-identical energies.
template <typename Derived>
Spectrum<typename Derived::Scalar> dft(const Eigen::MatrixBase<Derived>& h) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index T = h.rows();
  const Eigen::Index d = h.cols();
  const Scalar scale = Scalar(1) / std::sqrt(Scalar(T));
  Spectrum<Scalar> s;
  s.coefficients = ComplexMatrix<Scalar>::Zero(T, d);
  for (Eigen::Index w = 0; w <= T / 2; ++w) {
    for (Eigen::Index t = 0; t < T; ++t)
      s.coefficients.row(w) += detail::twiddle<Scalar>(w, t, T, -1) * h.row(t).template cast<std::complex<Scalar>>();
    s.coefficients.row(w) *= scale;
  }
  for (Eigen::Index w = T / 2 + 1; w < T; ++w) s.coefficients.row(w) = s.coefficients.row(T - w).conjugate();
  s.energies = detail::row_norms(s.coefficients);
  return s;
}

template <typename Scalar>
Spectrum<Scalar> spectrum_of(ComplexMatrix<Scalar> coefficients) {
  Spectrum<Scalar> s;
  s.energies = detail::row_norms(coefficients);
  s.coefficients = std::move(coefficients);
  return s;
}

/// Indices of the k largest energies, descending; equal energies keep the lower index first.
template <typename Scalar>
std::vector<Eigen::Index> top_k_indices(const RealVector<Scalar>& energies, Eigen::Index k) {
  const Eigen::Index T = energies.size();
  if (k < 1 || k > T)
    throw Error(ErrorCode::KOutOfRange, "k=" + std::to_string(k) + " outside [1, " + std::to_string(T) + "]");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(T));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return energies[a] > energies[b]; });
  order.resize(std::size_t(k));
  return order;
}

/// Best k-term Fourier approximation: keep the k most energetic bins, zero the rest, invert.
template <typename Scalar>
KTermApprox<Scalar> top_k_select(const Spectrum<Scalar>& s, Eigen::Index k) {
  KTermApprox<Scalar> out;
  out.kept = top_k_indices(s.energies, k);
  ComplexMatrix<Scalar> masked = ComplexMatrix<Scalar>::Zero(s.length(), s.width());
  std::vector<bool> keep(std::size_t(s.length()), false);
  for (auto w : out.kept) {
    masked.row(w) = s.coefficients.row(w);
    keep[std::size_t(w)] = true;
  }
  for (Eigen::Index w = 0; w < s.length(); ++w)
    if (!keep[std::size_t(w)]) out.residual_energy += s.energies[w] * s.energies[w];
  out.reconstruction = idft(masked);
  return out;
}

/// Real T x T operator A with A h = Re(F^{-1} P F h) for the frequency set `kept`.
template <typename Scalar>
RealMatrix<Scalar> projection_matrix(Eigen::Index T, const std::vector<Eigen::Index>& kept) {
  RealMatrix<Scalar> a = RealMatrix<Scalar>::Zero(T, T);
  for (auto w : kept)
    for (Eigen::Index t = 0; t < T; ++t)
      for (Eigen::Index u = 0; u < T; ++u) {
        const Eigen::Index m = ((w * (t - u)) % T + T) % T;
        a(t, u) += std::cos(Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(m) / Scalar(T));
      }
  return a / Scalar(T);
}

/// The k strongest periods T/w over non-zero frequencies, merging each w with its mirror T - w.
template <typename Scalar>
std::vector<Period<Scalar>> dominant_periods(const Spectrum<Scalar>& s, Eigen::Index k) {
  const Eigen::Index T = s.length();
  if (k < 1 || k > T / 2)
    throw Error(ErrorCode::KOutOfRange, "k=" + std::to_string(k) + " outside [1, " + std::to_string(T / 2) + "]");
  std::vector<Period<Scalar>> periods;
  for (Eigen::Index w = 1; w <= T / 2; ++w) {
    Scalar energy2 = s.energies[w] * s.energies[w];
    if (T - w != w) energy2 += s.energies[T - w] * s.energies[T - w];
    periods.push_back({w, Scalar(T) / Scalar(w), std::sqrt(energy2)});
  }
  std::stable_sort(periods.begin(), periods.end(),
                   [](const Period<Scalar>& a, const Period<Scalar>& b) { return a.amplitude > b.amplitude; });
  periods.resize(std::size_t(k));
  return periods;
}

}  // namespace volcast::spectral

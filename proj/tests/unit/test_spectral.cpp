#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "support.hpp"
#include "volcast/error.hpp"
#include "volcast/spectral.hpp"

using namespace volcast;
using namespace volcast::spectral;
using cd = std::complex<double>;

namespace {

/// Textbook DFT straight from the defining sum.
ComplexMatrix<double> naive_dft(const Eigen::MatrixXd& h) {
  const auto T = h.rows();
  ComplexMatrix<double> out = ComplexMatrix<double>::Zero(T, h.cols());
  for (Eigen::Index w = 0; w < T; ++w)
    for (Eigen::Index t = 0; t < T; ++t)
      for (Eigen::Index j = 0; j < h.cols(); ++j)
        out(w, j) += h(t, j) * std::polar(1.0, -2 * M_PI * double(w) * double(t) / double(T)) / std::sqrt(double(T));
  return out;
}

}  // namespace

TEST_CASE("dft matches the defining sum") {
  std::mt19937_64 rng(1);
  for (Eigen::Index T : {1, 2, 3, 7, 8, 12, 31}) {
    const Eigen::MatrixXd h = test::random_matrix(rng, T, 3);
    const auto s = dft(h);
    CHECK((s.coefficients - naive_dft(h)).norm() < 1e-12 * (1 + h.norm()));
  }
}

TEST_CASE("dft anchors") {
  const Eigen::MatrixXd c = Eigen::MatrixXd::Constant(6, 1, 2.5);
  const auto sc = dft(c);
  CHECK(std::abs(sc.coefficients(0, 0) - cd(std::sqrt(6.0) * 2.5, 0)) < 1e-12);
  for (Eigen::Index w = 1; w < 6; ++w) CHECK(sc.energies[w] < 1e-12);

  Eigen::MatrixXd cosine(8, 1);
  for (int t = 0; t < 8; ++t) cosine(t, 0) = std::cos(2 * M_PI * t / 8);
  const auto s = dft(cosine);
  CHECK(s.energies[1] == doctest::Approx(s.energies[7]).epsilon(1e-12));
  CHECK(s.energies[1] * s.energies[1] + s.energies[7] * s.energies[7] == doctest::Approx(cosine.squaredNorm()).epsilon(1e-12));

  Eigen::MatrixXd impulse = Eigen::MatrixXd::Zero(9, 1);
  impulse(0, 0) = 1;
  const auto si = dft(impulse);
  for (Eigen::Index w = 0; w < 9; ++w) CHECK(si.energies[w] == doctest::Approx(1 / 3.0).epsilon(1e-12));
}

TEST_CASE("Parseval and round trip on random signals") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> len(1, 64), width(1, 4);
  for (int i = 0; i < 200; ++i) {
    const Eigen::MatrixXd h = test::random_matrix(rng, len(rng), width(rng));
    const auto s = dft(h);
    CHECK(std::abs(s.energies.squaredNorm() - h.squaredNorm()) <= 1e-9 * h.squaredNorm());
    CHECK((idft(s.coefficients).real() - h).norm() <= 1e-10 * (1 + h.norm()));
    CHECK(idft(s.coefficients).imag().norm() <= 1e-10 * (1 + h.norm()));
  }
}

TEST_CASE("top_k_select") {
  const Eigen::MatrixXd c = Eigen::MatrixXd::Constant(5, 2, -1.0);
  const auto one = top_k_select(dft(c), 1);
  CHECK(one.kept == std::vector<Eigen::Index>{0});
  CHECK((one.reconstruction.real() - c).norm() < 1e-12);
  CHECK(one.residual_energy < 1e-24);

  std::mt19937_64 rng(3);
  const Eigen::MatrixXd h = test::random_matrix(rng, 8, 2);
  const auto full = top_k_select(dft(h), 8);
  CHECK((full.reconstruction.real() - h).norm() < 1e-12);

  // Every size-k support of an 8-point signal, checked by brute force.
  const auto s = dft(h);
  for (Eigen::Index k = 1; k <= 8; ++k) {
    const auto best = top_k_select(s, k);
    const double err = (best.reconstruction - h.cast<cd>()).squaredNorm();
    CHECK(std::abs(err - best.residual_energy) < 1e-10);
    for (unsigned mask = 0; mask < 256; ++mask) {
      if (__builtin_popcount(mask) != k) continue;
      ComplexMatrix<double> m = ComplexMatrix<double>::Zero(8, 2);
      for (int w = 0; w < 8; ++w)
        if (mask >> w & 1) m.row(w) = s.coefficients.row(w);
      CHECK(err <= (idft(m) - h.cast<cd>()).squaredNorm() + 1e-9);
    }
  }

  CHECK_THROWS_AS(top_k_select(s, 0), Error);
  CHECK_THROWS_AS(top_k_select(s, 9), Error);
}

TEST_CASE("ties keep the lower index") {
  Eigen::VectorXd e(6);
  e << 1, 3, 2, 3, 2, 3;
  CHECK(top_k_indices(e, 4) == std::vector<Eigen::Index>{1, 3, 5, 2});
}

TEST_CASE("projection_matrix reproduces the real part of the masked inverse") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd h = test::random_matrix(rng, 12, 3);
  const auto s = dft(h);
  const auto approx = top_k_select(s, 5);
  const Eigen::MatrixXd a = projection_matrix<double>(12, approx.kept);
  CHECK((a * h - approx.reconstruction.real()).norm() < 1e-12);
}

TEST_CASE("dominant_periods") {
  Eigen::MatrixXd p4(12, 1), mix(12, 1);
  for (int t = 0; t < 12; ++t) {
    p4(t, 0) = std::sin(2 * M_PI * t / 4);
    mix(t, 0) = 2 * std::sin(2 * M_PI * t / 3) + std::sin(2 * M_PI * t / 6);
  }
  CHECK(dominant_periods(dft(p4), 1)[0].length == doctest::Approx(4.0));
  const auto ranked = dominant_periods(dft(mix), 2);
  CHECK(ranked[0].length == doctest::Approx(3.0));
  CHECK(ranked[1].length == doctest::Approx(6.0));
  CHECK(ranked[0].amplitude == doctest::Approx(2 * ranked[1].amplitude).epsilon(1e-12));

  const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(12, 1, 4.0);
  for (const auto& p : dominant_periods(dft(flat), 6)) CHECK(p.amplitude < 1e-12);
  CHECK_THROWS_AS(dominant_periods(dft(flat), 7), Error);
}

#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "volcast/ingest.hpp"
#include "volcast/tensor.hpp"

namespace test {

inline volcast::Date ymd(int y, unsigned m, unsigned d) { return volcast::Date::from_ymd(y, m, d); }

inline volcast::OhlcvBar bar(volcast::Date d, double o, double h, double l, double c, double v = 1000.0) {
  return {d, o, h, l, c, v};
}

/// Day of week by Sakamoto's method, Monday = 0.
inline int sakamoto_weekday(int y, int m, int d) {
  static const int t[] = {0, 3, 2, 5, 0, 3, 5, 1, 4, 6, 2, 4};
  if (m < 3) y -= 1;
  const int sunday0 = (y + y / 4 - y / 100 + y / 400 + t[m - 1] + d) % 7;
  return (sunday0 + 6) % 7;
}

inline int days_in_month(int y, int m) {
  static const int n[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  return m == 2 && leap ? 29 : n[m - 1];
}

/// Weekdays in [from, to] by walking the civil calendar by hand.
inline std::size_t count_weekdays(int y0, int m0, int d0, int y1, int m1, int d1) {
  std::size_t n = 0;
  int y = y0, m = m0, d = d0;
  while (y < y1 || (y == y1 && (m < m1 || (m == m1 && d <= d1)))) {
    if (sakamoto_weekday(y, m, d) < 5) ++n;
    if (++d > days_in_month(y, m)) {
      d = 1;
      if (++m > 12) {
        m = 1;
        ++y;
      }
    }
  }
  return n;
}

/// Consecutive weekdays starting at `start` (which may be a weekend day).
inline std::vector<volcast::Date> weekdays(volcast::Date start, std::size_t n) {
  std::vector<volcast::Date> out;
  for (auto d = start; out.size() < n; d = d + 1)
    if (!d.is_weekend()) out.push_back(d);
  return out;
}

/// A scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("volcast-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

inline volcast::ad::Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  volcast::ad::Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

/// Largest relative error between analytic gradients of `inputs` and central differences of `f`.
inline double gradient_error(const std::function<volcast::ad::Tensor()>& f, std::vector<volcast::ad::Tensor> inputs,
                             double h = 1e-6) {
  for (auto& t : inputs) t.zero_grad();
  volcast::ad::backward(f());
  double worst = 0.0;
  for (auto& t : inputs) {
    const volcast::ad::Matrix analytic = t.grad();
    for (Eigen::Index i = 0; i < t.value().size(); ++i) {
      double& x = t.mutable_value().data()[i];
      const double saved = x;
      x = saved + h;
      const double up = f().item();
      x = saved - h;
      const double down = f().item();
      x = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic.data()[i];
      const double err = std::abs(a - numeric) / std::max(1.0, std::max(std::abs(a), std::abs(numeric)));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace test

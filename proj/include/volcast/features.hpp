#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "volcast/estimators.hpp"
#include "volcast/ingest.hpp"

namespace volcast {

inline constexpr std::size_t kFeatureDim = 9;
inline constexpr std::size_t kMarkerDim = 3;

/// Column order of the market-state vector.
enum Feature : std::size_t {
  kRvDaily = 0,
  kRvWeekly,
  kRvMonthly,
  kMomWeekly,
  kMomMonthly,
  kMomQuarterly,
  kVolume,
  kVix,
  kNewsCount,
};

inline constexpr std::array<const char*, kFeatureDim> kFeatureNames = {
    "rv_d", "rv_w", "rv_m", "mom_w", "mom_m", "mom_q", "volume_d", "vix_d", "news_count_d"};

inline constexpr std::size_t kWeeklyLag = 5;
inline constexpr std::size_t kMonthlyLag = 22;
inline constexpr std::size_t kQuarterlyLag = 63;
/// Rows consumed before the first feature can be emitted.
inline constexpr std::size_t kWarmupRows = kQuarterlyLag;

using FeatureVector = std::array<double, kFeatureDim>;

struct CalendarMarker {
  int day_of_week = 0;   // Monday = 0
  int day_of_month = 1;  // 1..31
  int month = 1;         // 1..12
};

CalendarMarker calendar_marker(const Date& d);

struct VolTarget {
  double parkinson = 0.0;
  double garman_klass = 0.0;
  double rogers_satchell = 0.0;
  double aggregated = 0.0;
  bool clamped = false;
};

VolTarget vol_target(const OhlcvBar& bar, const AggregationWeights& weights = {});

struct FeatureRow {
  Date date;
  Split split = Split::None;
  FeatureVector x{};
  CalendarMarker marker;
  VolTarget target;
};

struct FeatureTable {
  std::string ticker;
  std::vector<FeatureRow> rows;
  /// Days whose GK or RS interior went negative and was floored.
  std::size_t clamped_days = 0;
};

/// Emits one row per panel day from index kWarmupRows on. Throws InsufficientHistory below kWarmupRows + 1 rows.
FeatureTable build_features(const AlignedPanel& panel, const AggregationWeights& weights = {});

/// Embedding attached to each row under the day-before rule (zero row where absent), rows x dim.
Eigen::MatrixXd news_matrix(const FeatureTable& table, const NewsSeries& news);

void write_features(std::ostream& out, const FeatureTable& table);
FeatureTable read_features(std::istream& in);
void save_features(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable load_features(const std::filesystem::path& path);

}  // namespace volcast

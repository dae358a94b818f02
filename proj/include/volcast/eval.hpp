#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "volcast/metrics.hpp"
#include "volcast/model.hpp"

namespace volcast {

/// Out-of-sample forecasts aligned with realised targets.
struct PredictionTrace {
  std::vector<Date> dates;
  std::vector<double> actual;
  std::vector<double> predicted;

  std::size_t size() const { return dates.size(); }
  void push(const Date& d, double y, double yhat) {
    dates.push_back(d);
    actual.push_back(y);
    predicted.push_back(yhat);
  }
};

/// Metrics of one (ticker, model, seed).
struct MetricCell {
  std::string ticker;
  std::string model;
  std::uint64_t seed = 0;
  double qlike = 0.0;
  double mape = 0.0;
  std::size_t samples = 0;
  /// Zero-target days left out of both metrics.
  std::size_t excluded_zero = 0;
  /// Forecasts raised to the floor before scoring.
  std::size_t floored = 0;
  Date first;
  Date last;
};

inline constexpr double kPredictionFloor = 1e-6;

/// Scores a trace. Days with y <= 0 are excluded, forecasts below `floor` are raised to it.
/// Throws EmptyTestSet when nothing is left to score.
MetricCell score(const std::string& ticker, const std::string& model, std::uint64_t seed, const PredictionTrace& trace,
                 double floor = kPredictionFloor);

using Predictor = std::function<double(const WindowSample&)>;

PredictionTrace predict_windows(const Predictor& predictor, const std::vector<WindowSample>& windows);

/// Scores `predictor` on the test-split windows only.
MetricCell evaluate(const std::string& ticker, const std::string& model, std::uint64_t seed, const Predictor& predictor,
                    const std::vector<WindowSample>& windows);

struct ReportRow {
  std::string ticker;
  std::string model;
  std::string metric;  // "qlike" | "mape"
  double mean = 0.0;
  double std = 0.0;  // population std over seeds
  std::size_t seeds = 0;
  std::size_t samples = 0;
  std::size_t floored = 0;
  std::size_t excluded_zero = 0;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  std::vector<std::uint64_t> seeds;
  Date first;
  Date last;

  const ReportRow* find(const std::string& ticker, const std::string& model, const std::string& metric) const;
};

/// Groups cells by (ticker, model) and averages over seeds.
EvalReport aggregate(const std::vector<MetricCell>& cells);

void write_report_csv(std::ostream& out, const EvalReport& report);
void write_report_json(std::ostream& out, const EvalReport& report);

void save_metric_cell(const std::filesystem::path& path, const MetricCell& cell);
MetricCell load_metric_cell(const std::filesystem::path& path);

void write_trace_csv(std::ostream& out, const PredictionTrace& trace);
PredictionTrace read_trace_csv(std::istream& in);

/// Long format `date,series,value`; the realised series is named "actual".
void write_traces_long(std::ostream& out, const std::vector<std::pair<std::string, PredictionTrace>>& traces);

}  // namespace volcast

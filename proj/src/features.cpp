#include "volcast/features.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "volcast/csv.hpp"
#include "volcast/error.hpp"

namespace volcast {

CalendarMarker calendar_marker(const Date& d) {
  return {int(d.weekday()), int(d.day()), int(d.month())};
}

VolTarget vol_target(const OhlcvBar& b, const AggregationWeights& weights) {
  const auto p = parkinson(b.high, b.low);
  const auto gk = garman_klass(b.open, b.high, b.low, b.close);
  const auto rs = rogers_satchell(b.open, b.high, b.low, b.close);
  VolTarget t;
  t.parkinson = p.value;
  t.garman_klass = gk.value;
  t.rogers_satchell = rs.value;
  t.aggregated = aggregate_target(p.value, gk.value, rs.value, weights);
  t.clamped = gk.clamped || rs.clamped;
  return t;
}

namespace {
double trailing_mean(const std::vector<double>& v, std::size_t end_inclusive, std::size_t len) {
  const auto first = v.begin() + std::ptrdiff_t(end_inclusive + 1 - len);
  return std::accumulate(first, first + std::ptrdiff_t(len), 0.0) / double(len);
}
}  // namespace

FeatureTable build_features(const AlignedPanel& panel, const AggregationWeights& weights) {
  const auto n = panel.rows.size();
  if (n <= kWarmupRows)
    throw Error(ErrorCode::InsufficientHistory,
                "panel has " + std::to_string(n) + " rows, need at least " + std::to_string(kWarmupRows + 1));

  FeatureTable table;
  table.ticker = panel.ticker;

  std::vector<VolTarget> targets(n);
  std::vector<double> rv(n);
  for (std::size_t i = 0; i < n; ++i) {
    targets[i] = vol_target(panel.rows[i].bar, weights);
    rv[i] = targets[i].aggregated;
  }

  table.rows.reserve(n - kWarmupRows);
  for (std::size_t i = kWarmupRows; i < n; ++i) {
    const auto& row = panel.rows[i];
    FeatureRow f;
    f.date = row.bar.date;
    f.split = row.split;
    f.x[kRvDaily] = rv[i];
    f.x[kRvWeekly] = trailing_mean(rv, i, kWeeklyLag);
    f.x[kRvMonthly] = trailing_mean(rv, i, kMonthlyLag);
    const double close = row.bar.close;
    f.x[kMomWeekly] = std::log(close / panel.rows[i - kWeeklyLag].bar.close);
    f.x[kMomMonthly] = std::log(close / panel.rows[i - kMonthlyLag].bar.close);
    f.x[kMomQuarterly] = std::log(close / panel.rows[i - kQuarterlyLag].bar.close);
    f.x[kVolume] = row.bar.volume;
    f.x[kVix] = row.vix;
    f.x[kNewsCount] = double(row.news.article_count);
    f.marker = calendar_marker(row.bar.date);
    f.target = targets[i];
    if (f.target.clamped) ++table.clamped_days;
    table.rows.push_back(f);
  }
  return table;
}

Eigen::MatrixXd news_matrix(const FeatureTable& table, const NewsSeries& news) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(Eigen::Index(table.rows.size()), Eigen::Index(news.dim));
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    if (auto idx = previous_day_news(news, table.rows[i].date)) out.row(Eigen::Index(i)) = news.days[*idx].embedding;
  return out;
}

namespace {
constexpr const char* kHeaderTail =
    "day_of_week,day_of_month,month,parkinson,garman_klass,rogers_satchell,aggregated";
}

void write_features(std::ostream& out, const FeatureTable& table) {
  out << "date,ticker,split";
  for (const char* name : kFeatureNames) out << ',' << name;
  out << ',' << kHeaderTail << '\n';
  for (const auto& r : table.rows) {
    out << r.date.iso() << ',' << table.ticker << ',' << to_string(r.split);
    for (double v : r.x) out << ',' << csv::format_double(v);
    out << ',' << r.marker.day_of_week << ',' << r.marker.day_of_month << ',' << r.marker.month;
    out << ',' << csv::format_double(r.target.parkinson) << ',' << csv::format_double(r.target.garman_klass) << ','
        << csv::format_double(r.target.rogers_satchell) << ',' << csv::format_double(r.target.aggregated) << '\n';
  }
}

FeatureTable read_features(std::istream& in) {
  FeatureTable table;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) return table;
  ++lineno;
  constexpr std::size_t kColumns = 3 + kFeatureDim + kMarkerDim + 4;
  if (csv::split(csv::trim(line)).size() != kColumns || line.rfind("date,ticker,split", 0) != 0)
    throw Error(ErrorCode::MalformedRow, "unexpected feature header", lineno);

  auto number = [&](std::string_view s) {
    auto v = csv::parse_double(s);
    if (!v) throw Error(ErrorCode::MalformedRow, "bad number '" + std::string(s) + "'", lineno);
    return *v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(csv::trim(line));
    if (f.size() != kColumns) throw Error(ErrorCode::MalformedRow, "wrong field count", lineno);
    FeatureRow r;
    auto d = Date::parse(f[0]);
    auto s = parse_split(f[2]);
    if (!d || !s) throw Error(ErrorCode::MalformedRow, "bad date or split", lineno);
    r.date = *d;
    r.split = *s;
    if (table.rows.empty()) table.ticker = std::string(f[1]);
    for (std::size_t k = 0; k < kFeatureDim; ++k) r.x[k] = number(f[3 + k]);
    std::size_t c = 3 + kFeatureDim;
    r.marker.day_of_week = int(number(f[c++]));
    r.marker.day_of_month = int(number(f[c++]));
    r.marker.month = int(number(f[c++]));
    r.target.parkinson = number(f[c++]);
    r.target.garman_klass = number(f[c++]);
    r.target.rogers_satchell = number(f[c++]);
    r.target.aggregated = number(f[c++]);
    if (!table.rows.empty() && !(table.rows.back().date < r.date))
      throw Error(ErrorCode::NonMonotoneDates, "feature dates not increasing", lineno);
    table.rows.push_back(r);
  }
  return table;
}

void save_features(const std::filesystem::path& path, const FeatureTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  write_features(out, table);
}

FeatureTable load_features(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  return read_features(in);
}

}  // namespace volcast

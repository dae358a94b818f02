#include "volcast/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "json.hpp"
#include "volcast/csv.hpp"
#include "volcast/error.hpp"

namespace volcast {

MetricCell score(const std::string& ticker, const std::string& model, std::uint64_t seed, const PredictionTrace& trace,
                 double floor) {
  MetricCell cell;
  cell.ticker = ticker;
  cell.model = model;
  cell.seed = seed;
  std::vector<double> y, yhat;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!(trace.actual[i] > 0.0)) {
      ++cell.excluded_zero;
      continue;
    }
    double p = trace.predicted[i];
    if (!(p >= floor)) {
      p = floor;
      ++cell.floored;
    }
    y.push_back(trace.actual[i]);
    yhat.push_back(p);
  }
  if (y.empty()) throw Error(ErrorCode::EmptyTestSet, model + ": no scorable test observations");
  const Eigen::Map<const Eigen::VectorXd> ym(y.data(), Eigen::Index(y.size()));
  const Eigen::Map<const Eigen::VectorXd> pm(yhat.data(), Eigen::Index(yhat.size()));
  cell.qlike = qlike(ym, pm);
  cell.mape = mape(ym, pm);
  cell.samples = y.size();
  cell.first = trace.dates.front();
  cell.last = trace.dates.back();
  return cell;
}

PredictionTrace predict_windows(const Predictor& predictor, const std::vector<WindowSample>& windows) {
  PredictionTrace trace;
  for (const auto& w : windows) trace.push(w.target_date, w.target, predictor(w));
  return trace;
}

MetricCell evaluate(const std::string& ticker, const std::string& model, std::uint64_t seed, const Predictor& predictor,
                    const std::vector<WindowSample>& windows) {
  std::vector<WindowSample> test;
  for (const auto& w : windows)
    if (w.split == Split::Test) test.push_back(w);
  if (test.empty()) throw Error(ErrorCode::EmptyTestSet, "no test windows");
  return score(ticker, model, seed, predict_windows(predictor, test));
}

const ReportRow* EvalReport::find(const std::string& ticker, const std::string& model, const std::string& metric) const {
  for (const auto& r : rows)
    if (r.ticker == ticker && r.model == model && r.metric == metric) return &r;
  return nullptr;
}

EvalReport aggregate(const std::vector<MetricCell>& cells) {
  EvalReport report;
  std::map<std::pair<std::string, std::string>, std::vector<const MetricCell*>> groups;
  std::set<std::uint64_t> seeds;
  bool first = true;
  for (const auto& c : cells) {
    groups[{c.ticker, c.model}].push_back(&c);
    seeds.insert(c.seed);
    if (first || c.first < report.first) report.first = c.first;
    if (first || report.last < c.last) report.last = c.last;
    first = false;
  }
  report.seeds.assign(seeds.begin(), seeds.end());
  for (const auto& [key, group] : groups) {
    for (const char* metric : {"qlike", "mape"}) {
      ReportRow row;
      row.ticker = key.first;
      row.model = key.second;
      row.metric = metric;
      row.seeds = group.size();
      double sum = 0.0;
      for (const auto* c : group) {
        sum += std::string(metric) == "qlike" ? c->qlike : c->mape;
        row.samples += c->samples;
        row.floored += c->floored;
        row.excluded_zero += c->excluded_zero;
      }
      row.mean = sum / double(group.size());
      double sq = 0.0;
      for (const auto* c : group) {
        const double v = std::string(metric) == "qlike" ? c->qlike : c->mape;
        sq += (v - row.mean) * (v - row.mean);
      }
      row.std = std::sqrt(sq / double(group.size()));
      report.rows.push_back(row);
    }
  }
  return report;
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "ticker,model,metric,mean,std,seeds,samples,floored,excluded_zero\n";
  for (const auto& r : report.rows)
    out << r.ticker << ',' << r.model << ',' << r.metric << ',' << csv::format_double(r.mean) << ','
        << csv::format_double(r.std) << ',' << r.seeds << ',' << r.samples << ',' << r.floored << ','
        << r.excluded_zero << '\n';
}

void write_report_json(std::ostream& out, const EvalReport& report) {
  nlohmann::json j;
  j["seeds"] = report.seeds;
  j["date_range"] = {report.first.iso(), report.last.iso()};
  j["rows"] = nlohmann::json::array();
  for (const auto& r : report.rows)
    j["rows"].push_back({{"ticker", r.ticker},
                         {"model", r.model},
                         {"metric", r.metric},
                         {"mean", r.mean},
                         {"std", r.std},
                         {"seeds", r.seeds},
                         {"samples", r.samples},
                         {"floored", r.floored},
                         {"excluded_zero", r.excluded_zero}});
  out << j.dump(2) << '\n';
}

void save_metric_cell(const std::filesystem::path& path, const MetricCell& c) {
  nlohmann::json j{{"ticker", c.ticker},   {"model", c.model},     {"seed", c.seed},
                   {"qlike", c.qlike},     {"mape", c.mape},       {"samples", c.samples},
                   {"floored", c.floored}, {"excluded_zero", c.excluded_zero},
                   {"first", c.first.iso()}, {"last", c.last.iso()}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

MetricCell load_metric_cell(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    MetricCell c;
    c.ticker = j.at("ticker").get<std::string>();
    c.model = j.at("model").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.qlike = j.at("qlike").get<double>();
    c.mape = j.at("mape").get<double>();
    c.samples = j.at("samples").get<std::size_t>();
    c.floored = j.at("floored").get<std::size_t>();
    c.excluded_zero = j.at("excluded_zero").get<std::size_t>();
    c.first = Date::parse(j.at("first").get<std::string>()).value();
    c.last = Date::parse(j.at("last").get<std::string>()).value();
    return c;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::MalformedRecord, path.string() + ": " + e.what());
  }
}

void write_trace_csv(std::ostream& out, const PredictionTrace& trace) {
  out << "date,actual,predicted\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    out << trace.dates[i].iso() << ',' << csv::format_double(trace.actual[i]) << ','
        << csv::format_double(trace.predicted[i]) << '\n';
}

PredictionTrace read_trace_csv(std::istream& in) {
  PredictionTrace trace;
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || csv::trim(line) != "date,actual,predicted")
    throw Error(ErrorCode::MalformedRecord, "expected header date,actual,predicted", lineno);
  while (std::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(csv::trim(line));
    if (f.size() != 3) throw Error(ErrorCode::MalformedRecord, "expected 3 fields", lineno);
    auto d = Date::parse(f[0]);
    auto y = csv::parse_double(f[1]);
    auto p = csv::parse_double(f[2]);
    if (!d || !y || !p) throw Error(ErrorCode::MalformedRecord, "bad trace row", lineno);
    trace.push(*d, *y, *p);
  }
  return trace;
}

void write_traces_long(std::ostream& out, const std::vector<std::pair<std::string, PredictionTrace>>& traces) {
  out << "date,series,value\n";
  if (traces.empty()) return;
  std::vector<std::map<Date, double>> by_date(traces.size());
  for (std::size_t m = 0; m < traces.size(); ++m)
    for (std::size_t i = 0; i < traces[m].second.size(); ++i)
      by_date[m][traces[m].second.dates[i]] = traces[m].second.predicted[i];
  const auto& base = traces.front().second;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const Date& d = base.dates[i];
    out << d.iso() << ",actual," << csv::format_double(base.actual[i]) << '\n';
    for (std::size_t m = 0; m < traces.size(); ++m) {
      auto it = by_date[m].find(d);
      if (it != by_date[m].end()) out << d.iso() << ',' << traces[m].first << ',' << csv::format_double(it->second) << '\n';
    }
  }
}

}  // namespace volcast

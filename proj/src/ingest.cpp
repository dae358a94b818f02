#include "volcast/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "volcast/csv.hpp"
#include "volcast/error.hpp"

namespace volcast {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  return out;
}

Date require_date(std::string_view field, ErrorCode code, std::size_t line) {
  auto d = Date::parse(csv::trim(field));
  if (!d) throw Error(code, "bad date '" + std::string(field) + "'", line);
  return *d;
}

double require_double(std::string_view field, ErrorCode code, std::size_t line) {
  auto v = csv::parse_double(field);
  if (!v || !std::isfinite(*v)) throw Error(code, "bad number '" + std::string(field) + "'", line);
  return *v;
}

bool is_blank(std::string_view line) { return csv::trim(line).empty(); }

}  // namespace

bool is_valid(const OhlcvBar& b) {
  for (double v : {b.open, b.high, b.low, b.close, b.volume})
    if (!std::isfinite(v)) return false;
  return b.low > 0.0 && b.high >= b.low && b.high >= std::max(b.open, b.close) &&
         b.low <= std::min(b.open, b.close) && b.volume >= 0.0;
}

const char* to_string(Split split) {
  switch (split) {
    case Split::None: return "none";
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "none";
}

std::optional<Split> parse_split(std::string_view name) {
  name = csv::trim(name);
  if (name == "none") return Split::None;
  if (name == "train") return Split::Train;
  if (name == "validation") return Split::Validation;
  if (name == "test") return Split::Test;
  return std::nullopt;
}

Split SplitConfig::classify(const Date& d) const {
  if (train.contains(d)) return Split::Train;
  if (validation.contains(d)) return Split::Validation;
  if (test.contains(d)) return Split::Test;
  return Split::None;
}

void SplitConfig::validate() const {
  for (const auto* r : {&train, &validation, &test})
    if (r->last < r->first) throw Error(ErrorCode::InvalidConfig, "empty split range");
  if (!(train.last < validation.first && validation.last < test.first))
    throw Error(ErrorCode::InvalidConfig, "splits must be disjoint and ordered train < validation < test");
}

std::size_t AlignedPanel::count(Split split) const {
  return std::size_t(std::count_if(rows.begin(), rows.end(), [&](const PanelRow& r) { return r.split == split; }));
}

OhlcvSeries parse_ohlcv(std::istream& in, std::string ticker) {
  OhlcvSeries series{std::move(ticker), {}};
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) return series;
  ++lineno;
  if (csv::trim(line) != "date,open,high,low,close,volume")
    throw Error(ErrorCode::MalformedRow, "expected header date,open,high,low,close,volume", lineno);

  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    const auto f = csv::split(line);
    if (f.size() != 6) throw Error(ErrorCode::MalformedRow, "expected 6 fields", lineno);
    OhlcvBar bar;
    bar.date = require_date(f[0], ErrorCode::MalformedRow, lineno);
    bar.open = require_double(f[1], ErrorCode::MalformedRow, lineno);
    bar.high = require_double(f[2], ErrorCode::MalformedRow, lineno);
    bar.low = require_double(f[3], ErrorCode::MalformedRow, lineno);
    bar.close = require_double(f[4], ErrorCode::MalformedRow, lineno);
    bar.volume = require_double(f[5], ErrorCode::MalformedRow, lineno);
    if (!is_valid(bar)) throw Error(ErrorCode::MalformedRow, "bar violates OHLC invariants", lineno);
    if (bar.date.is_weekend()) throw Error(ErrorCode::MalformedRow, "weekend date " + bar.date.iso(), lineno);
    if (!series.bars.empty() && !(series.bars.back().date < bar.date))
      throw Error(ErrorCode::NonMonotoneDates, "date " + bar.date.iso() + " not after previous row", lineno);
    series.bars.push_back(bar);
  }
  return series;
}

OhlcvSeries load_ohlcv(const std::filesystem::path& path, std::string ticker) {
  auto in = open_input(path);
  return parse_ohlcv(in, std::move(ticker));
}

NewsSeries parse_news_embeddings(std::istream& in) {
  NewsSeries news;
  std::string line;
  std::size_t lineno = 0;
  // Skip leading blank lines; a file with no header at all is an empty series.
  while (std::getline(in, line)) {
    ++lineno;
    if (!is_blank(line)) break;
    line.clear();
  }
  if (is_blank(line)) return news;

  const auto header = csv::trim(line);
  if (header.substr(0, 4) != "dim=") throw Error(ErrorCode::MalformedRecord, "expected dim=<n> header", lineno);
  const auto dim = csv::parse_int(header.substr(4));
  if (!dim || *dim <= 0) throw Error(ErrorCode::MalformedRecord, "bad embedding dimension", lineno);
  news.dim = std::size_t(*dim);

  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    const auto f = csv::split(line);
    if (f.size() < 2 + news.dim) throw Error(ErrorCode::MalformedRecord, "truncated record", lineno);
    DailyNews day;
    day.date = require_date(f[0], ErrorCode::MalformedRecord, lineno);
    if (f.size() > 2 + news.dim)
      throw Error(ErrorCode::DimensionMismatch,
                  day.date.iso() + " has " + std::to_string(f.size() - 2) + " values, expected " +
                      std::to_string(news.dim),
                  lineno);
    const auto count = csv::parse_int(f[1]);
    if (!count || *count < 0) throw Error(ErrorCode::MalformedRecord, "bad article count", lineno);
    day.article_count = long(*count);
    day.embedding.resize(Eigen::Index(news.dim));
    for (std::size_t i = 0; i < news.dim; ++i)
      day.embedding[Eigen::Index(i)] = require_double(f[2 + i], ErrorCode::MalformedRecord, lineno);
    if (day.article_count == 0 && !day.embedding.isZero(0.0))
      throw Error(ErrorCode::MalformedRecord, "zero-count day with non-zero embedding", lineno);
    if (!news.days.empty() && !(news.days.back().date < day.date))
      throw Error(ErrorCode::MalformedRecord, "dates not strictly increasing", lineno);
    news.days.push_back(std::move(day));
  }
  return news;
}

NewsSeries load_news_embeddings(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_news_embeddings(in);
}

void write_ohlcv(std::ostream& out, const std::vector<OhlcvBar>& bars) {
  out << "date,open,high,low,close,volume\n";
  for (const auto& b : bars)
    out << b.date.iso() << ',' << csv::format_double(b.open) << ',' << csv::format_double(b.high) << ','
        << csv::format_double(b.low) << ',' << csv::format_double(b.close) << ',' << csv::format_double(b.volume)
        << '\n';
}

void save_ohlcv(const std::filesystem::path& path, const std::vector<OhlcvBar>& bars) {
  auto out = open_output(path);
  write_ohlcv(out, bars);
}

void write_vix(std::ostream& out, const std::map<Date, double>& vix) {
  out << "date,vix\n";
  for (const auto& [d, v] : vix) out << d.iso() << ',' << csv::format_double(v) << '\n';
}

void save_vix(const std::filesystem::path& path, const std::map<Date, double>& vix) {
  auto out = open_output(path);
  write_vix(out, vix);
}

void write_news_embeddings(std::ostream& out, const NewsSeries& news) {
  out << "dim=" << news.dim << '\n';
  for (const auto& day : news.days) {
    if (std::size_t(day.embedding.size()) != news.dim)
      throw Error(ErrorCode::DimensionMismatch, "embedding for " + day.date.iso() + " has wrong width");
    out << day.date.iso() << ',' << day.article_count;
    for (Eigen::Index i = 0; i < day.embedding.size(); ++i) out << ',' << csv::format_double(day.embedding[i]);
    out << '\n';
  }
}

void save_news_embeddings(const std::filesystem::path& path, const NewsSeries& news) {
  auto out = open_output(path);
  write_news_embeddings(out, news);
}

std::map<Date, double> parse_vix(std::istream& in) {
  std::map<Date, double> vix;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) return vix;
  ++lineno;
  if (csv::trim(line) != "date,vix") throw Error(ErrorCode::MalformedRow, "expected header date,vix", lineno);
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    const auto f = csv::split(line);
    if (f.size() != 2) throw Error(ErrorCode::MalformedRow, "expected 2 fields", lineno);
    const Date d = require_date(f[0], ErrorCode::MalformedRow, lineno);
    const double v = require_double(f[1], ErrorCode::MalformedRow, lineno);
    if (!vix.emplace(d, v).second) throw Error(ErrorCode::NonMonotoneDates, "duplicate VIX date", lineno);
  }
  return vix;
}

std::map<Date, double> load_vix(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_vix(in);
}

namespace {
DateRange range_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2)
    throw Error(ErrorCode::InvalidConfig, std::string("split '") + key + "' must be [first, last]");
  auto first = Date::parse(j[key][0].get<std::string>());
  auto last = Date::parse(j[key][1].get<std::string>());
  if (!first || !last) throw Error(ErrorCode::InvalidConfig, std::string("bad date in split '") + key + "'");
  return {*first, *last};
}
}  // namespace

SplitConfig parse_splits(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  SplitConfig s{range_from_json(j, "train"), range_from_json(j, "validation"), range_from_json(j, "test")};
  s.validate();
  return s;
}

SplitConfig load_splits(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_splits(in);
}

void save_splits(const std::filesystem::path& path, const SplitConfig& s) {
  nlohmann::json j;
  j["train"] = {s.train.first.iso(), s.train.last.iso()};
  j["validation"] = {s.validation.first.iso(), s.validation.last.iso()};
  j["test"] = {s.test.first.iso(), s.test.last.iso()};
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

std::optional<std::size_t> previous_day_news(const NewsSeries& news, const Date& day) {
  const Date wanted = day - 1;
  auto it = std::lower_bound(news.days.begin(), news.days.end(), wanted,
                             [](const DailyNews& n, const Date& d) { return n.date < d; });
  if (it == news.days.end() || it->date != wanted) return std::nullopt;
  return std::size_t(it - news.days.begin());
}

AlignedPanel align_panel(std::string ticker, const std::vector<OhlcvBar>& bars, const NewsSeries& news,
                         const std::map<Date, double>& vix, const SplitConfig& splits,
                         const AlignOptions& options) {
  if (bars.empty()) throw Error(ErrorCode::EmptyIntersection, "no bars");
  splits.validate();

  AlignedPanel panel;
  panel.ticker = std::move(ticker);
  panel.news_dim = news.dim;
  panel.splits = splits;

  for (const auto& bar : bars) {
    auto v = vix.find(bar.date);
    if (v == vix.end()) continue;
    PanelRow row;
    row.bar = bar;
    row.vix = v->second;
    row.split = splits.classify(bar.date);
    if (auto idx = previous_day_news(news, bar.date)) {
      row.news = news.days[*idx];
      row.has_news = true;
    } else {
      row.news.date = bar.date - 1;
      row.news.embedding = Eigen::VectorXd::Zero(Eigen::Index(news.dim));
      row.news.article_count = 0;
    }
    panel.rows.push_back(std::move(row));
  }
  if (panel.rows.empty()) throw Error(ErrorCode::EmptyIntersection, "no trading day has a VIX value");

  if (options.min_rows_per_split > 0) {
    for (Split s : {Split::Train, Split::Validation, Split::Test}) {
      const auto n = panel.count(s);
      if (n < options.min_rows_per_split)
        throw Error(ErrorCode::InsufficientRows, panel.ticker + ": split " + to_string(s) + " has " +
                                                     std::to_string(n) + " rows, need " +
                                                     std::to_string(options.min_rows_per_split));
    }
  }
  return panel;
}

void write_panel(std::ostream& out, const AlignedPanel& p) {
  out << "# volcast panel v1\n";
  out << "ticker=" << p.ticker << '\n';
  out << "dim=" << p.news_dim << '\n';
  out << "splits=" << p.splits.train.first.iso() << ',' << p.splits.train.last.iso() << ','
      << p.splits.validation.first.iso() << ',' << p.splits.validation.last.iso() << ','
      << p.splits.test.first.iso() << ',' << p.splits.test.last.iso() << '\n';
  out << "date,split,open,high,low,close,volume,vix,news_date,news_count";
  for (std::size_t i = 0; i < p.news_dim; ++i) out << ",e" << i;
  out << '\n';
  for (const auto& r : p.rows) {
    out << r.bar.date.iso() << ',' << to_string(r.split) << ',' << csv::format_double(r.bar.open) << ','
        << csv::format_double(r.bar.high) << ',' << csv::format_double(r.bar.low) << ','
        << csv::format_double(r.bar.close) << ',' << csv::format_double(r.bar.volume) << ','
        << csv::format_double(r.vix) << ',' << (r.has_news ? r.news.date.iso() : std::string()) << ','
        << r.news.article_count;
    for (Eigen::Index i = 0; i < r.news.embedding.size(); ++i) out << ',' << csv::format_double(r.news.embedding[i]);
    out << '\n';
  }
}

AlignedPanel read_panel(std::istream& in) {
  AlignedPanel p;
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> std::string& {
    if (!std::getline(in, line)) throw Error(ErrorCode::MalformedRecord, "truncated panel file", lineno);
    ++lineno;
    return line;
  };
  if (csv::trim(next()) != "# volcast panel v1") throw Error(ErrorCode::MalformedRecord, "not a panel file", lineno);
  auto value_of = [&](std::string_view key) {
    auto l = csv::trim(next());
    if (l.substr(0, key.size()) != key) throw Error(ErrorCode::MalformedRecord, "expected " + std::string(key), lineno);
    return std::string(l.substr(key.size()));
  };
  p.ticker = value_of("ticker=");
  const auto dim = csv::parse_int(value_of("dim="));
  if (!dim || *dim < 0) throw Error(ErrorCode::MalformedRecord, "bad dim", lineno);
  p.news_dim = std::size_t(*dim);
  {
    const auto s = value_of("splits=");
    const auto f = csv::split(s);
    if (f.size() != 6) throw Error(ErrorCode::MalformedRecord, "bad splits line", lineno);
    Date d[6];
    for (int i = 0; i < 6; ++i) d[i] = require_date(f[std::size_t(i)], ErrorCode::MalformedRecord, lineno);
    p.splits = {{d[0], d[1]}, {d[2], d[3]}, {d[4], d[5]}};
  }
  next();  // column header
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    const auto f = csv::split(line);
    if (f.size() != 10 + p.news_dim) throw Error(ErrorCode::MalformedRecord, "wrong field count", lineno);
    PanelRow r;
    r.bar.date = require_date(f[0], ErrorCode::MalformedRecord, lineno);
    auto split = parse_split(f[1]);
    if (!split) throw Error(ErrorCode::MalformedRecord, "bad split tag", lineno);
    r.split = *split;
    r.bar.open = require_double(f[2], ErrorCode::MalformedRecord, lineno);
    r.bar.high = require_double(f[3], ErrorCode::MalformedRecord, lineno);
    r.bar.low = require_double(f[4], ErrorCode::MalformedRecord, lineno);
    r.bar.close = require_double(f[5], ErrorCode::MalformedRecord, lineno);
    r.bar.volume = require_double(f[6], ErrorCode::MalformedRecord, lineno);
    r.vix = require_double(f[7], ErrorCode::MalformedRecord, lineno);
    r.has_news = !csv::trim(f[8]).empty();
    r.news.date = r.has_news ? require_date(f[8], ErrorCode::MalformedRecord, lineno) : r.bar.date - 1;
    const auto count = csv::parse_int(f[9]);
    if (!count || *count < 0) throw Error(ErrorCode::MalformedRecord, "bad news count", lineno);
    r.news.article_count = long(*count);
    r.news.embedding.resize(Eigen::Index(p.news_dim));
    for (std::size_t i = 0; i < p.news_dim; ++i)
      r.news.embedding[Eigen::Index(i)] = require_double(f[10 + i], ErrorCode::MalformedRecord, lineno);
    p.rows.push_back(std::move(r));
  }
  return p;
}

void save_panel(const std::filesystem::path& path, const AlignedPanel& panel) {
  auto out = open_output(path);
  write_panel(out, panel);
}

AlignedPanel load_panel(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_panel(in);
}

}  // namespace volcast

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "volcast/date.hpp"

namespace volcast {

struct OhlcvBar {
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double volume = 0.0;
};

/// high >= max(open, close), low <= min(open, close), high >= low > 0, volume >= 0, all finite.
bool is_valid(const OhlcvBar& bar);

struct OhlcvSeries {
  std::string ticker;
  std::vector<OhlcvBar> bars;
};

struct DailyNews {
  Date date;
  Eigen::VectorXd embedding;
  long article_count = 0;
};

/// Contents of an embedding file. `dim` is 0 only for an empty file.
struct NewsSeries {
  std::size_t dim = 0;
  std::vector<DailyNews> days;
};

enum class Split { None, Train, Validation, Test };

const char* to_string(Split split);
std::optional<Split> parse_split(std::string_view name);

/// Three disjoint, chronologically ordered date ranges.
struct SplitConfig {
  DateRange train;
  DateRange validation;
  DateRange test;

  Split classify(const Date& d) const;
  /// Throws InvalidConfig unless train < validation < test and each range is non-empty.
  void validate() const;
};

struct PanelRow {
  OhlcvBar bar;
  /// News published on the calendar day before `bar.date`; zero embedding and count 0 when absent.
  DailyNews news;
  bool has_news = false;
  double vix = 0.0;
  Split split = Split::None;
};

struct AlignedPanel {
  std::string ticker;
  std::size_t news_dim = 0;
  SplitConfig splits;
  std::vector<PanelRow> rows;

  std::size_t count(Split split) const;
};

struct AlignOptions {
  /// Reject the ticker when any split holds fewer usable rows (0 disables the check).
  std::size_t min_rows_per_split = 0;
};

/// Minimum rows per split for look-back T, horizon H and the 22-day RV lag.
constexpr std::size_t min_rows_for(std::size_t lookback, std::size_t horizon) { return lookback + horizon + 22; }

OhlcvSeries parse_ohlcv(std::istream& in, std::string ticker);
OhlcvSeries load_ohlcv(const std::filesystem::path& path, std::string ticker);
void write_ohlcv(std::ostream& out, const std::vector<OhlcvBar>& bars);
void save_ohlcv(const std::filesystem::path& path, const std::vector<OhlcvBar>& bars);

NewsSeries parse_news_embeddings(std::istream& in);
NewsSeries load_news_embeddings(const std::filesystem::path& path);
void write_news_embeddings(std::ostream& out, const NewsSeries& news);
void save_news_embeddings(const std::filesystem::path& path, const NewsSeries& news);

std::map<Date, double> parse_vix(std::istream& in);
std::map<Date, double> load_vix(const std::filesystem::path& path);
void write_vix(std::ostream& out, const std::map<Date, double>& vix);
void save_vix(const std::filesystem::path& path, const std::map<Date, double>& vix);

/// JSON: {"train": ["YYYY-MM-DD", "YYYY-MM-DD"], "validation": [...], "test": [...]}
SplitConfig parse_splits(std::istream& in);
SplitConfig load_splits(const std::filesystem::path& path);
void save_splits(const std::filesystem::path& path, const SplitConfig& splits);

/// Index into `news.days` of the record dated exactly the calendar day before `day`.
std::optional<std::size_t> previous_day_news(const NewsSeries& news, const Date& day);

AlignedPanel align_panel(std::string ticker, const std::vector<OhlcvBar>& bars, const NewsSeries& news,
                         const std::map<Date, double>& vix, const SplitConfig& splits,
                         const AlignOptions& options = {});

void write_panel(std::ostream& out, const AlignedPanel& panel);
AlignedPanel read_panel(std::istream& in);
void save_panel(const std::filesystem::path& path, const AlignedPanel& panel);
AlignedPanel load_panel(const std::filesystem::path& path);

}  // namespace volcast

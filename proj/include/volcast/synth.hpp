#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "volcast/ingest.hpp"

namespace volcast {

/// Volatility level in force from trading day `start_day` on.
struct Regime {
  int start_day = 0;
  double level = 0.012;
};

/// Generator settings. Log volatility is
///   log sigma_t = log level(t) + amplitude * sin(2 pi t / period) + x_t,
///   x_t = persistence * x_{t-1} + shock * (a e_news + b e_volume + c e_rest),
/// with a^2 = news_share, b^2 = volume_share, c^2 = the remainder. The news record read on day t
/// carries e_news of day t+1 scaled by informativeness, and day t's volume carries e_volume of day t+1.
struct SynthSpec {
  std::uint64_t seed = 1;
  std::string ticker = "SYN";
  int days = 2000;
  Date start = Date::from_ymd(2013, 1, 1);
  std::vector<Regime> regimes{{0, 0.012}};
  int period = 0;  // 0 plants no cycle
  double amplitude = 0.0;
  double persistence = 0.9;
  double shock = 0.25;
  double news_share = 0.5;
  double volume_share = 0.3;
  double informativeness = 0.0;
  int news_dim = 16;
  double article_rate = 4.0;
  int intraday_steps = 26;
  double volume_base = 1e6;
  double volume_coupling = 1.0;
  double volume_noise = 0.1;
  double train_fraction = 0.6;
  double validation_fraction = 0.2;
  int lookback = 12;
  int horizon = 1;

  /// Throws InvalidSpec.
  void validate() const;
};

SynthSpec parse_synth_spec(std::istream& in);
SynthSpec load_synth_spec(const std::filesystem::path& path);
void write_synth_spec(std::ostream& out, const SynthSpec& spec);

struct SynthData {
  OhlcvSeries ohlcv;
  NewsSeries news;
  std::map<Date, double> vix;
  SplitConfig splits;
  /// Planted daily volatility per trading day.
  std::vector<double> sigma;
};

/// Pure in the spec. Throws InvalidSpec.
SynthData generate(const SynthSpec& spec);

/// Writes ohlcv.csv, news.txt, vix.csv and splits.json into `dir`.
void write_synth(const std::filesystem::path& dir, const SynthData& data);

}  // namespace volcast

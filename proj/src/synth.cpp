#include "volcast/synth.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "volcast/error.hpp"
#include "volcast/features.hpp"

namespace volcast {

using nlohmann::json;

void SynthSpec::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::InvalidSpec, what);
  };
  require(informativeness >= 0.0 && informativeness <= 1.0, "informativeness must lie in [0, 1]");
  require(lookback >= 1 && horizon >= 1, "lookback and horizon must be positive");
  const int minimum = int(kWarmupRows) + lookback + horizon;
  require(days >= minimum, "days must be at least " + std::to_string(minimum));
  require(!regimes.empty() && regimes.front().start_day == 0, "the first regime must start on day 0");
  for (std::size_t i = 0; i < regimes.size(); ++i) {
    require(regimes[i].level > 0.0 && std::isfinite(regimes[i].level), "regime levels must be positive");
    if (i > 0) require(regimes[i].start_day > regimes[i - 1].start_day, "regime start days must increase");
  }
  require(period >= 0, "period must be non-negative");
  require(std::isfinite(amplitude), "amplitude must be finite");
  require(persistence > -1.0 && persistence < 1.0, "persistence must lie in (-1, 1)");
  require(shock >= 0.0, "shock must be non-negative");
  require(news_share >= 0.0 && volume_share >= 0.0 && news_share + volume_share <= 1.0,
          "news_share and volume_share must be non-negative and sum to at most 1");
  require(news_dim >= 1, "news_dim must be positive");
  require(article_rate >= 0.0, "article_rate must be non-negative");
  require(intraday_steps >= 1, "intraday_steps must be positive");
  require(volume_base > 0.0 && volume_noise >= 0.0, "volume_base must be positive, volume_noise non-negative");
  require(train_fraction > 0.0 && validation_fraction > 0.0 && train_fraction + validation_fraction < 1.0,
          "split fractions must be positive and leave room for a test split");
  require(!start.is_weekend(), "start must be a weekday");
}

namespace {

Date parse_date(const json& j, const char* key) {
  const auto text = j.get<std::string>();
  auto d = Date::parse(text);
  if (!d) throw Error(ErrorCode::InvalidSpec, std::string(key) + ": bad date '" + text + "'");
  return *d;
}

template <typename T>
void read(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

SynthSpec parse_synth_spec(std::istream& in) {
  SynthSpec s;
  try {
    const json j = json::parse(in);
    if (!j.is_object()) throw Error(ErrorCode::InvalidSpec, "spec must be a JSON object");
    read(j, "seed", s.seed);
    read(j, "ticker", s.ticker);
    read(j, "days", s.days);
    if (j.contains("start")) s.start = parse_date(j.at("start"), "start");
    if (j.contains("regimes")) {
      s.regimes.clear();
      for (const auto& r : j.at("regimes")) s.regimes.push_back({r.at("start_day").get<int>(), r.at("level").get<double>()});
    }
    read(j, "period", s.period);
    read(j, "amplitude", s.amplitude);
    read(j, "persistence", s.persistence);
    read(j, "shock", s.shock);
    read(j, "news_share", s.news_share);
    read(j, "volume_share", s.volume_share);
    read(j, "informativeness", s.informativeness);
    read(j, "news_dim", s.news_dim);
    read(j, "article_rate", s.article_rate);
    read(j, "intraday_steps", s.intraday_steps);
    read(j, "volume_base", s.volume_base);
    read(j, "volume_coupling", s.volume_coupling);
    read(j, "volume_noise", s.volume_noise);
    read(j, "train_fraction", s.train_fraction);
    read(j, "validation_fraction", s.validation_fraction);
    read(j, "lookback", s.lookback);
    read(j, "horizon", s.horizon);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, e.what());
  }
  s.validate();
  return s;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  return parse_synth_spec(in);
}

void write_synth_spec(std::ostream& out, const SynthSpec& s) {
  json regimes = json::array();
  for (const auto& r : s.regimes) regimes.push_back({{"start_day", r.start_day}, {"level", r.level}});
  const json j = {{"seed", s.seed},
                  {"ticker", s.ticker},
                  {"days", s.days},
                  {"start", s.start.iso()},
                  {"regimes", regimes},
                  {"period", s.period},
                  {"amplitude", s.amplitude},
                  {"persistence", s.persistence},
                  {"shock", s.shock},
                  {"news_share", s.news_share},
                  {"volume_share", s.volume_share},
                  {"informativeness", s.informativeness},
                  {"news_dim", s.news_dim},
                  {"article_rate", s.article_rate},
                  {"intraday_steps", s.intraday_steps},
                  {"volume_base", s.volume_base},
                  {"volume_coupling", s.volume_coupling},
                  {"volume_noise", s.volume_noise},
                  {"train_fraction", s.train_fraction},
                  {"validation_fraction", s.validation_fraction},
                  {"lookback", s.lookback},
                  {"horizon", s.horizon}};
  out << j.dump(2) << '\n';
}

namespace {

double level_at(const SynthSpec& s, int day) {
  double level = s.regimes.front().level;
  for (const auto& r : s.regimes)
    if (r.start_day <= day) level = r.level;
  return level;
}

/// Maximum of a Brownian bridge from a to b with variance v over the step.
double bridge_max(double a, double b, double v, double u) {
  return 0.5 * (a + b + std::sqrt((b - a) * (b - a) - 2.0 * v * std::log(u)));
}

}  // namespace

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  auto open_unit = [&] {
    double u = 0.0;
    while (u <= 0.0) u = uniform(rng);
    return u;
  };

  const int n = spec.days;
  const double a = std::sqrt(spec.news_share), b = std::sqrt(spec.volume_share);
  const double c = std::sqrt(std::max(0.0, 1.0 - spec.news_share - spec.volume_share));

  // Innovations for days 0..n so that day n-1 can leak day n.
  std::vector<double> e_news(std::size_t(n) + 1), e_volume(std::size_t(n) + 1), e_rest(std::size_t(n) + 1);
  for (int t = 0; t <= n; ++t) {
    e_news[std::size_t(t)] = normal(rng);
    e_volume[std::size_t(t)] = normal(rng);
    e_rest[std::size_t(t)] = normal(rng);
  }
  const double stationary = spec.shock / std::sqrt(1.0 - spec.persistence * spec.persistence);
  double x = stationary * normal(rng);

  SynthData data;
  data.ohlcv.ticker = spec.ticker;
  data.news.dim = std::size_t(spec.news_dim);
  data.sigma.resize(std::size_t(n));

  Eigen::VectorXd loading(spec.news_dim);
  for (Eigen::Index i = 0; i < loading.size(); ++i) loading[i] = normal(rng);

  std::vector<Date> dates;
  for (Date d = spec.start; int(dates.size()) < n; d = d + 1)
    if (!d.is_weekend()) dates.push_back(d);

  const double two_pi = 2.0 * std::numbers::pi;
  const double steps = double(spec.intraday_steps);
  std::poisson_distribution<long> articles(std::max(spec.article_rate - 1.0, 0.0));
  double close = std::log(100.0);
  for (int t = 0; t < n; ++t) {
    if (t > 0) {
      const auto i = std::size_t(t);
      x = spec.persistence * x + spec.shock * (a * e_news[i] + b * e_volume[i] + c * e_rest[i]);
    }
    double log_sigma = std::log(level_at(spec, t)) + x;
    if (spec.period > 0) log_sigma += spec.amplitude * std::sin(two_pi * t / double(spec.period));
    const double sigma = std::exp(log_sigma);
    data.sigma[std::size_t(t)] = sigma;

    const double v = sigma * sigma / steps;
    const double open = close;
    double high = open, low = open, p = open;
    for (int s = 0; s < spec.intraday_steps; ++s) {
      const double next = p + std::sqrt(v) * normal(rng);
      high = std::max(high, bridge_max(p, next, v, open_unit()));
      low = std::min(low, -bridge_max(-p, -next, v, open_unit()));
      p = next;
    }
    close = p;

    OhlcvBar bar;
    bar.date = dates[std::size_t(t)];
    bar.open = std::exp(open);
    bar.high = std::exp(high);
    bar.low = std::exp(low);
    bar.close = std::exp(close);
    bar.volume = std::round(spec.volume_base * std::exp(spec.volume_coupling * e_volume[std::size_t(t) + 1] +
                                                        spec.volume_noise * normal(rng)));
    data.ohlcv.bars.push_back(bar);

    data.vix[bar.date] = 100.0 * std::sqrt(252.0) * sigma * std::exp(0.05 * normal(rng));

    // Read by day t under the day-before rule.
    DailyNews news;
    news.date = bar.date - 1;
    news.article_count = 1 + articles(rng);
    news.embedding.resize(spec.news_dim);
    for (Eigen::Index i = 0; i < news.embedding.size(); ++i) news.embedding[i] = normal(rng);
    news.embedding = spec.informativeness * e_news[std::size_t(t) + 1] * loading +
                     (1.0 - spec.informativeness) * news.embedding;
    data.news.days.push_back(std::move(news));
  }

  const int train_end = int(std::floor(spec.train_fraction * n));
  const int val_end = int(std::floor((spec.train_fraction + spec.validation_fraction) * n));
  if (train_end < 1 || val_end <= train_end || val_end >= n)
    throw Error(ErrorCode::InvalidSpec, "split fractions leave an empty split");
  data.splits.train = {dates.front(), dates[std::size_t(train_end - 1)]};
  data.splits.validation = {dates[std::size_t(train_end)], dates[std::size_t(val_end - 1)]};
  data.splits.test = {dates[std::size_t(val_end)], dates.back()};
  return data;
}

void write_synth(const std::filesystem::path& dir, const SynthData& data) {
  std::filesystem::create_directories(dir);
  save_ohlcv(dir / "ohlcv.csv", data.ohlcv.bars);
  save_news_embeddings(dir / "news.txt", data.news);
  save_vix(dir / "vix.csv", data.vix);
  save_splits(dir / "splits.json", data.splits);
}

}  // namespace volcast

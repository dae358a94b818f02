#include <doctest.h>

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "support.hpp"
#include "volcast/error.hpp"
#include "volcast/features.hpp"
#include "volcast/spectral.hpp"
#include "volcast/synth.hpp"

using namespace volcast;

namespace {

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = double(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

/// Largest |corr| between any embedding coordinate attached to day t and log sigma of day t+1.
double max_news_correlation(const SynthSpec& spec) {
  const auto data = generate(spec);
  const auto panel = align_panel(spec.ticker, data.ohlcv.bars, data.news, data.vix, data.splits);
  REQUIRE(panel.rows.size() == data.sigma.size());
  double worst = 0;
  for (int j = 0; j < spec.news_dim; ++j) {
    std::vector<double> e, s;
    for (std::size_t t = 0; t + 1 < panel.rows.size(); ++t) {
      e.push_back(panel.rows[t].news.embedding[j]);
      s.push_back(std::log(data.sigma[t + 1]));
    }
    worst = std::max(worst, std::abs(correlation(e, s)));
  }
  return worst;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("uninformative news is uncorrelated with next-day volatility") {
  SynthSpec spec;
  spec.days = 500;
  spec.seed = 3;
  spec.informativeness = 0.0;
  CHECK(max_news_correlation(spec) < 0.1);
  spec.informativeness = 0.8;
  CHECK(max_news_correlation(spec) > 0.3);
}

TEST_CASE("planted period is the dominant period of realised volatility") {
  SynthSpec spec;
  spec.days = 600;
  spec.period = 5;
  spec.amplitude = 0.5;
  spec.shock = 0.05;
  const auto data = generate(spec);
  const auto panel = align_panel(spec.ticker, data.ohlcv.bars, data.news, data.vix, data.splits);
  const auto table = build_features(panel);
  Eigen::MatrixXd rv(500, 1);
  for (Eigen::Index i = 0; i < 500; ++i) rv(i, 0) = table.rows[std::size_t(i)].x[kRvDaily];
  const auto top = spectral::dominant_periods(spectral::dft(rv), 1);
  CHECK(top[0].length == doctest::Approx(5.0));
}

TEST_CASE("generated bars are valid and dated on consecutive weekdays") {
  SynthSpec spec;
  spec.days = 300;
  spec.informativeness = 0.5;
  const auto data = generate(spec);
  REQUIRE(data.ohlcv.bars.size() == 300);
  const auto days = test::weekdays(spec.start, 300);
  for (std::size_t i = 0; i < 300; ++i) {
    CHECK(is_valid(data.ohlcv.bars[i]));
    CHECK(data.ohlcv.bars[i].date == days[i]);
    CHECK(data.vix.count(days[i]) == 1);
    if (i) CHECK(data.ohlcv.bars[i].open == data.ohlcv.bars[i - 1].close);
  }
  for (const auto& n : data.news.days) {
    CHECK(n.article_count >= 1);
    CHECK(n.embedding.size() == spec.news_dim);
  }
  const auto panel = align_panel(spec.ticker, data.ohlcv.bars, data.news, data.vix, data.splits);
  CHECK(panel.count(Split::Train) == 180);
  CHECK(panel.count(Split::Validation) == 60);
  CHECK(panel.count(Split::Test) == 60);
}

TEST_CASE("range estimators track a constant volatility") {
  SynthSpec spec;
  spec.days = 1500;
  spec.regimes = {{0, 0.015}};
  spec.shock = 0.0;
  const auto data = generate(spec);
  double mean = 0;
  for (const auto& b : data.ohlcv.bars) mean += vol_target(b).aggregated / 1500.0;
  CHECK(std::abs(mean - 0.015) < 0.1 * 0.015);
  for (double s : data.sigma) CHECK(s == doctest::Approx(0.015).epsilon(1e-12));
}

TEST_CASE("regime schedule switches levels") {
  SynthSpec spec;
  spec.days = 400;
  spec.shock = 0.0;
  spec.regimes = {{0, 0.01}, {200, 0.03}};
  const auto data = generate(spec);
  CHECK(data.sigma[199] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(data.sigma[200] == doctest::Approx(0.03).epsilon(1e-12));
}

TEST_CASE("same seed gives byte-identical files") {
  SynthSpec spec;
  spec.days = 200;
  spec.informativeness = 0.8;
  test::TempDir a("synth-a"), b("synth-b");
  write_synth(a.path, generate(spec));
  write_synth(b.path, generate(spec));
  for (const char* f : {"ohlcv.csv", "news.txt", "vix.csv", "splits.json"}) {
    CAPTURE(f);
    CHECK(!slurp(a / f).empty());
    CHECK(slurp(a / f) == slurp(b / f));
  }
  spec.seed = 2;
  test::TempDir c("synth-c");
  write_synth(c.path, generate(spec));
  CHECK(slurp(a / "ohlcv.csv") != slurp(c / "ohlcv.csv"));

  // The files load back through the regular readers.
  const auto bars = load_ohlcv(a / "ohlcv.csv", "SYN").bars;
  CHECK(bars.size() == 200);
  CHECK(load_news_embeddings(a / "news.txt").dim == 16);
  CHECK(load_vix(a / "vix.csv").size() == 200);
  CHECK_NOTHROW(load_splits(a / "splits.json"));
}

TEST_CASE("spec validation and JSON round-trip") {
  auto rejects = [](auto mutate) {
    SynthSpec s;
    mutate(s);
    try {
      generate(s);
    } catch (const Error& e) {
      return e.code() == ErrorCode::InvalidSpec;
    }
    return false;
  };
  CHECK(rejects([](SynthSpec& s) { s.informativeness = 1.5; }));
  CHECK(rejects([](SynthSpec& s) { s.informativeness = -0.1; }));
  CHECK(rejects([](SynthSpec& s) { s.days = 70; }));
  CHECK(rejects([](SynthSpec& s) { s.news_dim = 0; }));
  CHECK(rejects([](SynthSpec& s) { s.regimes.clear(); }));
  CHECK(rejects([](SynthSpec& s) { s.news_share = 0.8; }));

  SynthSpec spec;
  spec.seed = 99;
  spec.days = 777;
  spec.regimes = {{0, 0.01}, {300, 0.02}};
  spec.informativeness = 0.25;
  std::ostringstream out;
  write_synth_spec(out, spec);
  std::istringstream in(out.str());
  const auto back = parse_synth_spec(in);
  CHECK(back.seed == 99);
  CHECK(back.days == 777);
  CHECK(back.regimes.size() == 2);
  CHECK(back.regimes[1].level == 0.02);
  CHECK(back.informativeness == 0.25);
  std::ostringstream again;
  write_synth_spec(again, back);
  CHECK(again.str() == out.str());

  std::istringstream partial(R"({"days": 400})");
  CHECK(parse_synth_spec(partial).days == 400);
  std::istringstream typo(R"({"days": "many"})");
  CHECK_THROWS_AS(parse_synth_spec(typo), Error);
}

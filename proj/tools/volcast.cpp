// Command-line front end: ingest, featurize, baseline, train, report, traces, synth.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "volcast/baselines.hpp"
#include "volcast/config.hpp"
#include "volcast/error.hpp"
#include "volcast/eval.hpp"
#include "volcast/features.hpp"
#include "volcast/ingest.hpp"
#include "volcast/synth.hpp"
#include "volcast/training.hpp"

namespace fs = std::filesystem;
using namespace volcast;

namespace {

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct IngestArgs {
  fs::path ohlcv, news, vix, splits, out;
  std::string ticker;
  std::size_t min_rows = 0;
};

void run_ingest(const IngestArgs& a) {
  const auto ticker = a.ticker.empty() ? a.ohlcv.stem().string() : a.ticker;
  const auto bars = load_ohlcv(a.ohlcv, ticker);
  const auto news = load_news_embeddings(a.news);
  const auto vix = load_vix(a.vix);
  const auto splits = load_splits(a.splits);
  const auto panel = align_panel(ticker, bars.bars, news, vix, splits, {a.min_rows});
  save_panel(a.out, panel);
  std::cerr << "ingest: " << panel.rows.size() << " rows (train " << panel.count(Split::Train) << ", validation "
            << panel.count(Split::Validation) << ", test " << panel.count(Split::Test) << ")\n";
}

void run_featurize(const fs::path& panel_path, const fs::path& out) {
  const auto table = build_features(load_panel(panel_path));
  save_features(out, table);
  std::cerr << "featurize: " << table.rows.size() << " rows, " << table.clamped_days << " clamped days\n";
}

struct BaselineArgs {
  std::string model;
  fs::path features, embeddings, out;
  int horizon = 1;
};

void run_baseline_cmd(const BaselineArgs& a) {
  const auto kind = parse_baseline(a.model);
  if (!kind) throw Error(ErrorCode::InvalidConfig, "unknown baseline '" + a.model + "'");
  const auto table = load_features(a.features);
  std::optional<Eigen::MatrixXd> news;
  if (!a.embeddings.empty()) news = news_matrix(table, load_news_embeddings(a.embeddings));
  BaselineOptions options;
  options.horizon = a.horizon;
  const auto result = run_baseline(*kind, table, news ? &*news : nullptr, options);
  const auto cell = score(table.ticker, result.model, 0, result.test);
  save_baseline_run(a.out, table.ticker, result, cell);
  std::cout << table.ticker << ' ' << result.model << " qlike " << cell.qlike << " mape " << cell.mape << " ("
            << cell.samples << " test days)\n";
}

struct TrainArgs {
  fs::path features, embeddings, config, out;
  std::string ablate = "none";
  std::uint64_t seed = 0;
};

void run_train(const TrainArgs& a) {
  RunConfig rc = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  const auto ablation = parse_ablation(a.ablate);
  if (!ablation) throw Error(ErrorCode::InvalidConfig, "unknown ablation '" + a.ablate + "'");
  rc.train.ablation = *ablation;
  rc.train.seed = a.seed;

  const auto table = load_features(a.features);
  const auto series = load_news_embeddings(a.embeddings);
  if (series.dim != 0) rc.model.news_dim = int(series.dim);
  const auto news = series.dim != 0 ? news_matrix(table, series)
                                    : Eigen::MatrixXd(Eigen::MatrixXd::Zero(Eigen::Index(table.rows.size()),
                                                                            rc.model.news_dim));
  const auto data = make_dataset(table, news, rc.model);

  M2vn model(rc.model, data.scaler, a.seed);
  const auto result = train(model, data, rc.train);
  const auto name = model_name(*ablation);
  const auto test = predict_windows([&](const WindowSample& w) { return predict(model, w); }, data.test);
  const auto cell = score(table.ticker, name, a.seed, test);
  save_run(a.out, {table.ticker, name, rc.model, rc.train, data.scaler}, model, result, test, cell);
  std::cout << table.ticker << ' ' << name << " seed " << a.seed << " epochs " << result.stop_epoch << " (best "
            << result.best_epoch << ") val qlike " << result.best_val_qlike << " test qlike " << cell.qlike
            << " mape " << cell.mape << '\n';
}

void run_report(const std::vector<fs::path>& runs, const fs::path& out) {
  std::vector<MetricCell> cells;
  for (const auto& dir : runs) cells.push_back(load_metric_cell(dir / "metrics.json"));
  const auto report = aggregate(cells);
  auto stream = open_output(out);
  if (ends_with(out.string(), ".json"))
    write_report_json(stream, report);
  else
    write_report_csv(stream, report);
}

void run_traces(const fs::path& run, const fs::path& out) {
  const auto cell = load_metric_cell(run / "metrics.json");
  std::ifstream in(run / "predictions.csv");
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + (run / "predictions.csv").string());
  const auto trace = read_trace_csv(in);
  auto stream = open_output(out);
  write_traces_long(stream, {{cell.model, trace}});
}

void run_synth(const fs::path& spec_path, const fs::path& dir) {
  const auto spec = load_synth_spec(spec_path);
  write_synth(dir, generate(spec));
  std::cerr << "synth: " << spec.days << " days written to " << dir.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volatility forecasting with price and news inputs"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Align OHLCV, news embeddings and VIX into a panel");
  ingest_cmd->add_option("--ohlcv", ingest.ohlcv)->required();
  ingest_cmd->add_option("--news", ingest.news)->required();
  ingest_cmd->add_option("--vix", ingest.vix)->required();
  ingest_cmd->add_option("--splits", ingest.splits)->required();
  ingest_cmd->add_option("--out", ingest.out)->required();
  ingest_cmd->add_option("--ticker", ingest.ticker, "Defaults to the OHLCV file stem");
  ingest_cmd->add_option("--min-rows", ingest.min_rows, "Minimum rows per split");

  fs::path panel_path, features_out;
  auto* featurize_cmd = app.add_subcommand("featurize", "Build the feature table from a panel");
  featurize_cmd->add_option("--panel", panel_path)->required();
  featurize_cmd->add_option("--out", features_out)->required();

  BaselineArgs baseline;
  auto* baseline_cmd = app.add_subcommand("baseline", "Fit a HAR or HAR-X baseline");
  baseline_cmd->add_option("--model", baseline.model)
      ->required()
      ->check(CLI::IsMember({"har", "harx-ols", "harx-ridge", "harx-lasso"}));
  baseline_cmd->add_option("--features", baseline.features)->required();
  baseline_cmd->add_option("--embeddings", baseline.embeddings, "News embeddings for the PCA columns");
  baseline_cmd->add_option("--horizon", baseline.horizon);
  baseline_cmd->add_option("--out", baseline.out, "Run directory")->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train the network");
  train_cmd->add_option("--features", train_args.features)->required();
  train_cmd->add_option("--embeddings", train_args.embeddings)->required();
  train_cmd->add_option("--config", train_args.config);
  train_cmd->add_option("--ablate", train_args.ablate)->check(CLI::IsMember({"none", "volume", "news", "align"}));
  train_cmd->add_option("--seed", train_args.seed);
  train_cmd->add_option("--out", train_args.out, "Run directory")->required();

  std::vector<fs::path> runs;
  fs::path report_out;
  auto* report_cmd = app.add_subcommand("report", "Aggregate run metrics over seeds");
  report_cmd->add_option("--runs", runs)->required();
  report_cmd->add_option("--out", report_out, ".json for JSON, CSV otherwise")->required();

  fs::path trace_run, trace_out;
  auto* traces_cmd = app.add_subcommand("traces", "Emit plot-ready forecast traces");
  traces_cmd->add_option("--run", trace_run)->required();
  traces_cmd->add_option("--out", trace_out)->required();

  fs::path spec_path, synth_dir;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--spec", spec_path)->required();
  synth_cmd->add_option("--out-dir", synth_dir)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest_cmd) run_ingest(ingest);
    if (*featurize_cmd) run_featurize(panel_path, features_out);
    if (*baseline_cmd) run_baseline_cmd(baseline);
    if (*train_cmd) run_train(train_args);
    if (*report_cmd) run_report(runs, report_out);
    if (*traces_cmd) run_traces(trace_run, trace_out);
    if (*synth_cmd) run_synth(spec_path, synth_dir);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]";
    if (e.line()) std::cerr << " line " << *e.line();
    std::cerr << ": " << e.what() << '\n';
    return 2;
  }
  return 0;
}

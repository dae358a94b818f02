#include "volcast/config.hpp"

#include <fstream>

#include "volcast/checkpoint.hpp"
#include "volcast/csv.hpp"
#include "volcast/error.hpp"

namespace volcast {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  return out;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
}

}  // namespace

json to_json(const ModelConfig& c) {
  return {{"latent_dim", c.latent_dim},     {"align_dim", c.align_dim},
          {"blocks", c.blocks},             {"top_k", c.top_k},
          {"inception_width", c.inception_width}, {"kernel_sizes", c.kernel_sizes},
          {"lookback", c.lookback},         {"horizon", c.horizon},
          {"label_len", c.label_len},       {"align_weight", c.align_weight},
          {"temperature", c.temperature},   {"news_dim", c.news_dim},
          {"feature_dim", c.feature_dim},   {"marker_dim", c.marker_dim}};
}

ModelConfig model_config_from_json(const json& j, ModelConfig c) {
  try {
    read(j, "latent_dim", c.latent_dim);
    read(j, "align_dim", c.align_dim);
    read(j, "blocks", c.blocks);
    read(j, "top_k", c.top_k);
    read(j, "inception_width", c.inception_width);
    read(j, "kernel_sizes", c.kernel_sizes);
    read(j, "lookback", c.lookback);
    read(j, "horizon", c.horizon);
    read(j, "label_len", c.label_len);
    read(j, "align_weight", c.align_weight);
    read(j, "temperature", c.temperature);
    read(j, "news_dim", c.news_dim);
    read(j, "feature_dim", c.feature_dim);
    read(j, "marker_dim", c.marker_dim);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  c.validate();
  return c;
}

json to_json(const TrainOptions& o) {
  return {{"max_epochs", o.max_epochs}, {"patience", o.patience}, {"batch_size", o.batch_size},
          {"learning_rate", o.learning_rate}, {"seed", o.seed}, {"ablation", to_string(o.ablation)}};
}

TrainOptions train_options_from_json(const json& j, TrainOptions o) {
  try {
    read(j, "max_epochs", o.max_epochs);
    read(j, "patience", o.patience);
    read(j, "batch_size", o.batch_size);
    read(j, "learning_rate", o.learning_rate);
    read(j, "seed", o.seed);
    if (j.contains("ablation")) {
      const auto name = j.at("ablation").get<std::string>();
      auto a = parse_ablation(name);
      if (!a) throw Error(ErrorCode::InvalidConfig, "unknown ablation '" + name + "'");
      o.ablation = *a;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  return o;
}

json to_json(const FeatureScaler& s) {
  return {{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
          {"scale", std::vector<double>(s.scale.data(), s.scale.data() + s.scale.size())},
          {"target_scale", s.target_scale}};
}

FeatureScaler scaler_from_json(const json& j) {
  try {
    const auto mean = j.at("mean").get<std::vector<double>>();
    const auto scale = j.at("scale").get<std::vector<double>>();
    if (mean.size() != kFeatureDim || scale.size() != kFeatureDim)
      throw Error(ErrorCode::InvalidConfig, "scaler must have " + std::to_string(kFeatureDim) + " entries");
    FeatureScaler s;
    s.mean = Eigen::Map<const Eigen::RowVectorXd>(mean.data(), Eigen::Index(mean.size()));
    s.scale = Eigen::Map<const Eigen::RowVectorXd>(scale.data(), Eigen::Index(scale.size()));
    read(j, "target_scale", s.target_scale);
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const json j = read_json(path);
  RunConfig c;
  if (j.contains("model")) c.model = model_config_from_json(j.at("model"));
  if (j.contains("train")) c.train = train_options_from_json(j.at("train"));
  return c;
}

std::string model_name(Ablation ablation) {
  return ablation == Ablation::None ? "m2vn" : std::string("m2vn-no-") + to_string(ablation);
}

void write_history_csv(std::ostream& out, const TrainResult& result) {
  out << "epoch,train_mse,train_align,train_objective,val_mse,val_align,val_qlike,learning_rate\n";
  for (const auto& r : result.history)
    out << r.epoch << ',' << csv::format_double(r.train_mse) << ',' << csv::format_double(r.train_align) << ','
        << csv::format_double(r.train_objective) << ',' << csv::format_double(r.val_mse) << ','
        << csv::format_double(r.val_align) << ',' << csv::format_double(r.val_qlike) << ','
        << csv::format_double(r.learning_rate) << '\n';
}

void save_run(const std::filesystem::path& dir, const RunInfo& info, const M2vn& model, const TrainResult& result,
              const PredictionTrace& test, const MetricCell& cell) {
  std::filesystem::create_directories(dir);
  const json config = {{"ticker", info.ticker},
                       {"model", info.model},
                       {"config", to_json(info.config)},
                       {"train", to_json(info.options)},
                       {"scaler", to_json(info.scaler)},
                       {"best_epoch", result.best_epoch},
                       {"stop_epoch", result.stop_epoch},
                       {"best_val_qlike", result.best_val_qlike},
                       {"seconds", result.seconds}};
  open_output(dir / "config.json") << config.dump(2) << '\n';
  {
    auto out = open_output(dir / "history.csv");
    write_history_csv(out, result);
  }
  {
    auto out = open_output(dir / "steps.csv");
    out << "step,mse,align,objective\n";
    for (const auto& s : result.steps)
      out << s.step << ',' << csv::format_double(s.mse) << ',' << csv::format_double(s.align) << ','
          << csv::format_double(s.objective) << '\n';
  }
  ad::save_checkpoint(dir / "checkpoint.txt", model.parameters());
  {
    auto out = open_output(dir / "predictions.csv");
    write_trace_csv(out, test);
  }
  save_metric_cell(dir / "metrics.json", cell);
}

RunInfo load_run_info(const std::filesystem::path& dir) {
  const json j = read_json(dir / "config.json");
  try {
    RunInfo info;
    info.ticker = j.at("ticker").get<std::string>();
    info.model = j.at("model").get<std::string>();
    info.config = model_config_from_json(j.at("config"));
    info.options = train_options_from_json(j.at("train"));
    info.scaler = scaler_from_json(j.at("scaler"));
    return info;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, (dir / "config.json").string() + ": " + e.what());
  }
}

M2vn load_run_model(const std::filesystem::path& dir) {
  const auto info = load_run_info(dir);
  M2vn model(info.config, info.scaler, info.options.seed);
  model.mask() = mask_for(info.options.ablation);
  ad::load_checkpoint(dir / "checkpoint.txt", model.parameters());
  return model;
}

void save_baseline_run(const std::filesystem::path& dir, const std::string& ticker, const BaselineResult& result,
                       const MetricCell& cell) {
  std::filesystem::create_directories(dir);
  json coefficients = json::object();
  for (std::size_t i = 0; i < result.labels.size(); ++i)
    coefficients[result.labels[i]] = result.coefficients[Eigen::Index(i)];
  const json config = {{"ticker", ticker},
                       {"model", result.model},
                       {"penalty", result.penalty},
                       {"news_components", result.news_components},
                       {"validation_qlike", result.validation_qlike},
                       {"singular", result.singular},
                       {"converged", result.converged},
                       {"coefficients", coefficients}};
  open_output(dir / "config.json") << config.dump(2) << '\n';
  {
    auto out = open_output(dir / "predictions.csv");
    write_trace_csv(out, result.test);
  }
  save_metric_cell(dir / "metrics.json", cell);
}

}  // namespace volcast

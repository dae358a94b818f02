#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "volcast/baselines.hpp"
#include "volcast/eval.hpp"
#include "volcast/model.hpp"
#include "volcast/training.hpp"

namespace volcast {

nlohmann::json to_json(const ModelConfig& c);
/// Keys absent from `j` keep their value in `base`. Throws InvalidConfig.
ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base = {});

nlohmann::json to_json(const TrainOptions& o);
TrainOptions train_options_from_json(const nlohmann::json& j, TrainOptions base = {});

nlohmann::json to_json(const FeatureScaler& s);
FeatureScaler scaler_from_json(const nlohmann::json& j);

/// Training configuration file: {"model": {...}, "train": {...}}, both optional.
struct RunConfig {
  ModelConfig model;
  TrainOptions train;
};

RunConfig load_run_config(const std::filesystem::path& path);

/// Model name recorded in reports: "m2vn" or "m2vn-no-<ablation>".
std::string model_name(Ablation ablation);

/// Snapshot of a finished training run.
struct RunInfo {
  std::string ticker;
  std::string model;
  ModelConfig config;
  TrainOptions options;
  FeatureScaler scaler;
};

void write_history_csv(std::ostream& out, const TrainResult& result);

/// Writes config.json, history.csv, steps.csv, checkpoint.txt, predictions.csv and metrics.json.
void save_run(const std::filesystem::path& dir, const RunInfo& info, const M2vn& model, const TrainResult& result,
              const PredictionTrace& test, const MetricCell& cell);
RunInfo load_run_info(const std::filesystem::path& dir);
/// Rebuilds the trained model with its ablation mask.
M2vn load_run_model(const std::filesystem::path& dir);

/// Writes config.json (model, penalty, coefficients), predictions.csv and metrics.json.
void save_baseline_run(const std::filesystem::path& dir, const std::string& ticker, const BaselineResult& result,
                       const MetricCell& cell);

}  // namespace volcast

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "volcast/features.hpp"
#include "volcast/model.hpp"

namespace volcast {

/// Sliding windows of `lookback` rows whose inputs and target row all share one split.
/// `news` has one row per feature row. Throws DimensionMismatch on a row count mismatch.
std::vector<WindowSample> make_windows(const FeatureTable& features, const Eigen::MatrixXd& news, int lookback,
                                       int horizon);

struct Dataset {
  std::string ticker;
  FeatureScaler scaler;
  std::vector<WindowSample> train;
  std::vector<WindowSample> validation;
  std::vector<WindowSample> test;
  double train_target_mean = 0.0;
};

/// Windows per split plus training-split statistics. Throws InsufficientHistory when the training
/// or validation split yields no window.
Dataset make_dataset(const FeatureTable& features, const Eigen::MatrixXd& news, const ModelConfig& config);

/// mean((yhat - y)^2) + lambda * align.
double joint_loss(const std::vector<double>& predicted, const std::vector<double>& actual, double align, double lambda);
ad::Tensor joint_loss(const ad::Tensor& mse, const ad::Tensor& align, double lambda);

enum class Ablation { None, Volume, News, Align };

const char* to_string(Ablation a);
std::optional<Ablation> parse_ablation(std::string_view name);
/// Model input mask for an ablation.
InputMask mask_for(Ablation a);
/// Effective alignment weight: zero when news or alignment is ablated.
double align_weight_for(Ablation a, double lambda);

struct TrainOptions {
  int max_epochs = 200;
  int patience = 10;
  int batch_size = 32;
  double learning_rate = 3e-4;
  std::uint64_t seed = 0;
  Ablation ablation = Ablation::None;
};

struct EpochRecord {
  int epoch = 0;
  double train_mse = 0.0;
  double train_align = 0.0;
  double train_objective = 0.0;
  double val_mse = 0.0;
  double val_align = 0.0;
  double val_qlike = 0.0;
  double learning_rate = 0.0;
};

struct StepRecord {
  long step = 0;
  double mse = 0.0;
  double align = 0.0;
  double objective = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::vector<StepRecord> steps;
  int best_epoch = 0;
  int stop_epoch = 0;
  double best_val_qlike = 0.0;
  double seconds = 0.0;
};

/// Batch loss terms of one forward pass over `batch`. The squared error is taken in units of the
/// scaler's target level so that it is commensurate with the contrastive term.
struct BatchLoss {
  ad::Tensor mse;
  ad::Tensor align;
  ad::Tensor objective;
  std::vector<double> predicted;
};

BatchLoss batch_loss(const M2vn& model, const std::vector<const WindowSample*>& batch, double lambda);

/// Adam with cosine decay over max_epochs x batches, early stopping on validation QLIKE and
/// restore of the best parameters. Applies the ablation mask to `model`.
/// Throws DivergedLoss on a non-finite objective.
TrainResult train(M2vn& model, const Dataset& data, const TrainOptions& options);

double predict(const M2vn& model, const WindowSample& sample);
std::vector<double> predict(const M2vn& model, const std::vector<WindowSample>& windows);
/// Mean contrastive loss of the model over `windows`.
double mean_alignment_loss(const M2vn& model, const std::vector<WindowSample>& windows);
/// QLIKE of the model on `windows` with floored forecasts.
double validation_qlike(const M2vn& model, const std::vector<WindowSample>& windows);

struct SearchSpace {
  std::vector<int> latent_dim{12, 24, 32, 64};
  std::vector<int> align_dim{32, 64, 128, 256};
  std::vector<double> temperature{0.01, 0.03, 0.07};
  std::vector<int> inception_width{24, 32, 64, 128, 256, 512};
  std::vector<int> top_k{4, 5, 6};
  int budget = 100;

  /// Draws each hyperparameter uniformly from its grid on top of `base`.
  ModelConfig sample(const ModelConfig& base, std::mt19937_64& rng) const;
  bool contains(const ModelConfig& config) const;
};

struct Trial {
  ModelConfig config;
  std::vector<double> scores;  // validation QLIKE per seed
  double mean_score = 0.0;
};

struct SearchResult {
  std::vector<Trial> trials;
  std::size_t best = 0;

  const Trial& best_trial() const { return trials.at(best); }
};

/// Scores a configuration for one seed; lower is better.
using TrialScorer = std::function<double(const ModelConfig&, std::uint64_t seed)>;

/// Samples `space.budget` configurations and ranks them by mean score over `seeds`; ties keep the
/// earlier trial.
SearchResult random_search(const SearchSpace& space, const ModelConfig& base, const std::vector<std::uint64_t>& seeds,
                           std::uint64_t search_seed, const TrialScorer& scorer);

/// Trains on `data` and returns the validation QLIKE of the restored best parameters.
TrialScorer validation_scorer(const Dataset& data, const TrainOptions& options);

}  // namespace volcast

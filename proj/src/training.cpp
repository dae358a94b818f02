#include "volcast/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "volcast/error.hpp"
#include "volcast/eval.hpp"
#include "volcast/optim.hpp"

namespace volcast {

using ad::Matrix;
using ad::Tensor;

std::vector<WindowSample> make_windows(const FeatureTable& features, const Eigen::MatrixXd& news, int lookback,
                                       int horizon) {
  if (lookback < 1 || horizon < 1) throw Error(ErrorCode::InvalidConfig, "lookback and horizon must be positive");
  const auto& rows = features.rows;
  if (news.rows() != Eigen::Index(rows.size()))
    throw Error(ErrorCode::DimensionMismatch, "news has " + std::to_string(news.rows()) + " rows, features have " +
                                                  std::to_string(rows.size()));
  const auto T = std::size_t(lookback), H = std::size_t(horizon);
  std::vector<WindowSample> out;
  for (std::size_t last = T - 1; last + H < rows.size(); ++last) {
    const std::size_t first = last + 1 - T;
    const Split split = rows[first].split;
    if (split == Split::None || rows[last + H].split != split) continue;
    bool same = true;
    for (std::size_t i = first; i <= last && same; ++i) same = rows[i].split == split;
    if (!same) continue;

    WindowSample w;
    w.last_input = rows[last].date;
    w.target_date = rows[last + H].date;
    w.split = split;
    w.features.resize(lookback, Eigen::Index(kFeatureDim));
    w.news = news.middleRows(Eigen::Index(first), lookback);
    for (std::size_t i = 0; i < T; ++i) {
      const auto& r = rows[first + i];
      for (std::size_t c = 0; c < kFeatureDim; ++c) w.features(Eigen::Index(i), Eigen::Index(c)) = r.x[c];
      w.markers.push_back(r.marker);
    }
    w.target = rows[last + H].target.aggregated;
    out.push_back(std::move(w));
  }
  return out;
}

Dataset make_dataset(const FeatureTable& features, const Eigen::MatrixXd& news, const ModelConfig& config) {
  if (news.cols() != config.news_dim)
    throw Error(ErrorCode::DimensionMismatch, "news width " + std::to_string(news.cols()) + " differs from news_dim " +
                                                  std::to_string(config.news_dim));
  Dataset data;
  data.ticker = features.ticker;
  data.scaler = FeatureScaler::fit(features.rows);
  for (auto& w : make_windows(features, news, config.lookback, config.horizon)) {
    switch (w.split) {
      case Split::Train: data.train.push_back(std::move(w)); break;
      case Split::Validation: data.validation.push_back(std::move(w)); break;
      case Split::Test: data.test.push_back(std::move(w)); break;
      case Split::None: break;
    }
  }
  if (data.train.empty()) throw Error(ErrorCode::InsufficientHistory, "no training windows");
  if (data.validation.empty()) throw Error(ErrorCode::InsufficientHistory, "no validation windows");
  double sum = 0.0;
  for (const auto& w : data.train) sum += w.target;
  data.train_target_mean = sum / double(data.train.size());
  return data;
}

double joint_loss(const std::vector<double>& predicted, const std::vector<double>& actual, double align, double lambda) {
  if (predicted.size() != actual.size()) throw Error(ErrorCode::ShapeMismatch, "prediction and target sizes differ");
  double mse = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) mse += (predicted[i] - actual[i]) * (predicted[i] - actual[i]);
  if (!predicted.empty()) mse /= double(predicted.size());
  return mse + lambda * align;
}

Tensor joint_loss(const Tensor& mse, const Tensor& align, double lambda) {
  if (lambda == 0.0) return mse;
  return ad::add(mse, ad::scale_shift(align, lambda));
}

const char* to_string(Ablation a) {
  switch (a) {
    case Ablation::None: return "none";
    case Ablation::Volume: return "volume";
    case Ablation::News: return "news";
    case Ablation::Align: return "align";
  }
  return "none";
}

std::optional<Ablation> parse_ablation(std::string_view name) {
  for (auto a : {Ablation::None, Ablation::Volume, Ablation::News, Ablation::Align})
    if (name == to_string(a)) return a;
  return std::nullopt;
}

InputMask mask_for(Ablation a) {
  InputMask m;
  m.volume = a != Ablation::Volume;
  m.news = a != Ablation::News;
  return m;
}

double align_weight_for(Ablation a, double lambda) {
  return a == Ablation::News || a == Ablation::Align ? 0.0 : lambda;
}

BatchLoss batch_loss(const M2vn& model, const std::vector<const WindowSample*>& batch, double lambda) {
  if (batch.empty()) throw Error(ErrorCode::ShapeMismatch, "empty batch");
  // Squared error in units of the training target level.
  const double unit = 1.0 / model.scaler().target_scale;
  std::vector<Tensor> predictions, aligns;
  Matrix targets(Eigen::Index(batch.size()), 1);
  BatchLoss out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto f = model.forward(*batch[i]);
    out.predicted.push_back(f.prediction.item());
    predictions.push_back(f.prediction);
    aligns.push_back(info_nce(f.pair));
    targets(Eigen::Index(i), 0) = batch[i]->target * unit;
  }
  out.mse = ad::mse(ad::scale_shift(ad::concat_rows(predictions), unit), Tensor::constant(std::move(targets)));
  out.align = ad::mean(ad::concat_rows(aligns));
  out.objective = joint_loss(out.mse, out.align, lambda);
  return out;
}

double predict(const M2vn& model, const WindowSample& sample) {
  ad::NoGradGuard guard;
  return model.forward(sample).prediction.item();
}

std::vector<double> predict(const M2vn& model, const std::vector<WindowSample>& windows) {
  std::vector<double> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(predict(model, w));
  return out;
}

double mean_alignment_loss(const M2vn& model, const std::vector<WindowSample>& windows) {
  if (windows.empty()) throw Error(ErrorCode::EmptyTestSet, "no windows");
  ad::NoGradGuard guard;
  double sum = 0.0;
  for (const auto& w : windows) sum += info_nce(model.forward(w).pair).item();
  return sum / double(windows.size());
}

double validation_qlike(const M2vn& model, const std::vector<WindowSample>& windows) {
  PredictionTrace trace;
  for (const auto& w : windows) trace.push(w.target_date, w.target, predict(model, w));
  return score("", "", 0, trace).qlike;
}

namespace {

[[noreturn]] void diverged(int epoch, long step, const BatchLoss& loss) {
  std::ostringstream msg;
  msg << "non-finite objective at epoch " << epoch << " step " << step << " (mse " << loss.mse.item() << ", align "
      << loss.align.item() << ")";
  throw Error(ErrorCode::DivergedLoss, msg.str());
}

}  // namespace

TrainResult train(M2vn& model, const Dataset& data, const TrainOptions& options) {
  if (options.max_epochs < 1 || options.batch_size < 1 || options.patience < 0)
    throw Error(ErrorCode::InvalidConfig, "max_epochs and batch_size must be positive, patience non-negative");
  if (data.train.empty() || data.validation.empty())
    throw Error(ErrorCode::InsufficientHistory, "training needs train and validation windows");
  const auto start = std::chrono::steady_clock::now();

  model.mask() = mask_for(options.ablation);
  const double lambda = align_weight_for(options.ablation, model.config().align_weight);
  model.set_output_level(data.train_target_mean);

  const std::size_t n = data.train.size(), B = std::size_t(options.batch_size);
  const long batches = long((n + B - 1) / B);
  auto& params = model.parameters();
  ad::AdamConfig adam_config;
  adam_config.learning_rate = options.learning_rate;
  adam_config.total_steps = long(options.max_epochs) * batches;
  ad::Adam adam(params.tensors(), adam_config);

  std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t(0));

  TrainResult result;
  result.best_val_qlike = std::numeric_limits<double>::infinity();
  std::vector<Matrix> best = params.values();

  for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = adam.learning_rate_at(adam.step_count());
    for (std::size_t begin = 0; begin < n; begin += B) {
      std::vector<const WindowSample*> batch;
      for (std::size_t i = begin; i < std::min(n, begin + B); ++i) batch.push_back(&data.train[order[i]]);
      adam.zero_grad();
      const auto loss = batch_loss(model, batch, lambda);
      const double objective = loss.objective.item();
      if (!std::isfinite(objective)) diverged(epoch, adam.step_count(), loss);
      ad::backward(loss.objective);
      adam.step();
      result.steps.push_back({adam.step_count(), loss.mse.item(), loss.align.item(), objective});
      const double w = double(batch.size()) / double(n);
      rec.train_mse += w * loss.mse.item();
      rec.train_align += w * loss.align.item();
      rec.train_objective += w * objective;
    }

    {
      ad::NoGradGuard guard;
      PredictionTrace trace;
      const double unit = 1.0 / model.scaler().target_scale;
      double sq = 0.0, align = 0.0;
      for (const auto& s : data.validation) {
        const auto f = model.forward(s);
        const double yhat = f.prediction.item();
        sq += (yhat - s.target) * (yhat - s.target) * unit * unit;
        align += info_nce(f.pair).item();
        trace.push(s.target_date, s.target, yhat);
      }
      const double m = double(data.validation.size());
      rec.val_mse = sq / m;
      rec.val_align = align / m;
      rec.val_qlike = score("", "", 0, trace).qlike;
    }
    if (!std::isfinite(rec.val_qlike))
      throw Error(ErrorCode::DivergedLoss, "non-finite validation QLIKE at epoch " + std::to_string(epoch));
    result.history.push_back(rec);
    result.stop_epoch = epoch;

    if (rec.val_qlike < result.best_val_qlike) {
      result.best_val_qlike = rec.val_qlike;
      result.best_epoch = epoch;
      best = params.values();
    } else if (epoch - result.best_epoch > options.patience) {
      break;
    }
  }

  params.assign(best);
  params.zero_grad();
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

namespace {

template <typename T>
T pick(const std::vector<T>& grid, std::mt19937_64& rng) {
  if (grid.empty()) throw Error(ErrorCode::InvalidConfig, "empty search grid");
  std::uniform_int_distribution<std::size_t> index(0, grid.size() - 1);
  return grid[index(rng)];
}

template <typename T>
bool in(const std::vector<T>& grid, T value) {
  return std::find(grid.begin(), grid.end(), value) != grid.end();
}

}  // namespace

ModelConfig SearchSpace::sample(const ModelConfig& base, std::mt19937_64& rng) const {
  ModelConfig c = base;
  c.latent_dim = pick(latent_dim, rng);
  c.align_dim = pick(align_dim, rng);
  c.temperature = pick(temperature, rng);
  c.inception_width = pick(inception_width, rng);
  c.top_k = pick(top_k, rng);
  return c;
}

bool SearchSpace::contains(const ModelConfig& c) const {
  return in(latent_dim, c.latent_dim) && in(align_dim, c.align_dim) && in(temperature, c.temperature) &&
         in(inception_width, c.inception_width) && in(top_k, c.top_k);
}

SearchResult random_search(const SearchSpace& space, const ModelConfig& base, const std::vector<std::uint64_t>& seeds,
                           std::uint64_t search_seed, const TrialScorer& scorer) {
  if (space.budget < 1) throw Error(ErrorCode::InvalidConfig, "search budget must be positive");
  if (seeds.empty()) throw Error(ErrorCode::InvalidConfig, "search needs at least one seed");
  std::mt19937_64 rng(search_seed);
  SearchResult result;
  for (int i = 0; i < space.budget; ++i) {
    Trial trial;
    trial.config = space.sample(base, rng);
    for (auto seed : seeds) trial.scores.push_back(scorer(trial.config, seed));
    trial.mean_score = std::accumulate(trial.scores.begin(), trial.scores.end(), 0.0) / double(seeds.size());
    result.trials.push_back(std::move(trial));
    if (result.trials.back().mean_score < result.trials[result.best].mean_score) result.best = result.trials.size() - 1;
  }
  return result;
}

TrialScorer validation_scorer(const Dataset& data, const TrainOptions& options) {
  return [&data, options](const ModelConfig& config, std::uint64_t seed) {
    M2vn model(config, data.scaler, seed);
    TrainOptions o = options;
    o.seed = seed;
    return train(model, data, o).best_val_qlike;
  };
}

}  // namespace volcast

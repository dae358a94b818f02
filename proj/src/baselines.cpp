#include "volcast/baselines.hpp"

#include <cmath>
#include <limits>

#include "volcast/error.hpp"

namespace volcast {

RegressionDesign RegressionDesign::subset(Split split) const {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < rows(); ++i)
    if (splits[std::size_t(i)] == split) keep.push_back(i);
  RegressionDesign out;
  out.labels = labels;
  out.x.resize(Eigen::Index(keep.size()), x.cols());
  out.y.resize(Eigen::Index(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.x.row(Eigen::Index(k)) = x.row(keep[k]);
    out.y[Eigen::Index(k)] = y[keep[k]];
    out.dates.push_back(dates[std::size_t(keep[k])]);
    out.target_dates.push_back(target_dates[std::size_t(keep[k])]);
    out.splits.push_back(split);
  }
  return out;
}

namespace {

RegressionDesign design_with(const FeatureTable& f, int horizon, const std::vector<std::size_t>& feature_columns,
                             const Eigen::MatrixXd* extra, const std::vector<std::string>& extra_labels) {
  if (horizon < 1) throw Error(ErrorCode::InvalidConfig, "horizon must be at least 1");
  const auto n = f.rows.size();
  if (n <= std::size_t(horizon))
    throw Error(ErrorCode::InsufficientHistory, "need more than " + std::to_string(horizon) + " feature rows");
  const auto rows = Eigen::Index(n - std::size_t(horizon));
  const auto extra_cols = extra ? extra->cols() : 0;
  RegressionDesign d;
  d.labels.push_back("intercept");
  for (auto c : feature_columns) d.labels.push_back(kFeatureNames[c]);
  d.labels.insert(d.labels.end(), extra_labels.begin(), extra_labels.end());
  d.x.resize(rows, 1 + Eigen::Index(feature_columns.size()) + extra_cols);
  d.y.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = f.rows[std::size_t(i)];
    const auto& target = f.rows[std::size_t(i + horizon)];
    d.x(i, 0) = 1.0;
    for (std::size_t c = 0; c < feature_columns.size(); ++c) d.x(i, Eigen::Index(1 + c)) = row.x[feature_columns[c]];
    if (extra) d.x.row(i).tail(extra_cols) = extra->row(i);
    d.y[i] = target.target.aggregated;
    d.dates.push_back(row.date);
    d.target_dates.push_back(target.date);
    d.splits.push_back(row.split == target.split ? row.split : Split::None);
  }
  return d;
}

}  // namespace

RegressionDesign har_design(const FeatureTable& features, int horizon) {
  return design_with(features, horizon, {kRvDaily, kRvWeekly, kRvMonthly}, nullptr, {});
}

regression::PcaReducer<double> fit_news_pca(const FeatureTable& features, const Eigen::MatrixXd& news,
                                            double threshold) {
  if (news.rows() != Eigen::Index(features.rows.size()))
    throw Error(ErrorCode::DimensionMismatch, "news rows do not match feature rows");
  std::vector<Eigen::Index> train;
  for (std::size_t i = 0; i < features.rows.size(); ++i)
    if (features.rows[i].split == Split::Train) train.push_back(Eigen::Index(i));
  if (train.empty()) throw Error(ErrorCode::InsufficientHistory, "no training rows for news PCA");
  Eigen::MatrixXd x(Eigen::Index(train.size()), news.cols());
  for (std::size_t k = 0; k < train.size(); ++k) x.row(Eigen::Index(k)) = news.row(train[k]);
  return regression::fit_pca(x, threshold);
}

RegressionDesign harx_design(const FeatureTable& features, const Eigen::MatrixXd* news,
                             const regression::PcaReducer<double>* reducer, int horizon) {
  const std::vector<std::size_t> columns{kRvDaily, kRvWeekly,  kRvMonthly, kMomWeekly, kMomMonthly,
                                         kMomQuarterly, kVolume, kVix, kNewsCount};
  if (!reducer || reducer->retained == 0) return design_with(features, horizon, columns, nullptr, {});
  if (!news) throw Error(ErrorCode::DimensionMismatch, "news PCA given without news embeddings");
  if (news->rows() != Eigen::Index(features.rows.size()))
    throw Error(ErrorCode::DimensionMismatch, "news rows do not match feature rows");
  const Eigen::MatrixXd reduced = reducer->transform(*news);
  std::vector<std::string> labels;
  for (Eigen::Index k = 0; k < reduced.cols(); ++k) labels.push_back("news_pc" + std::to_string(k + 1));
  return design_with(features, horizon, columns, &reduced, labels);
}

double predict(const Eigen::VectorXd& coefficients, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  if (row.size() != coefficients.size()) throw Error(ErrorCode::DimensionMismatch, "row width differs from model");
  return row.dot(coefficients.transpose());
}

const char* to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::Har: return "har";
    case BaselineKind::HarxOls: return "harx-ols";
    case BaselineKind::HarxRidge: return "harx-ridge";
    case BaselineKind::HarxLasso: return "harx-lasso";
  }
  return "har";
}

std::optional<BaselineKind> parse_baseline(std::string_view name) {
  for (auto k : {BaselineKind::Har, BaselineKind::HarxOls, BaselineKind::HarxRidge, BaselineKind::HarxLasso})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

std::vector<double> default_penalty_grid() {
  std::vector<double> grid;
  for (int i = -8; i <= 2; ++i) grid.push_back(std::pow(10.0, 0.5 * i));
  return grid;
}

namespace {

PredictionTrace forecast(const RegressionDesign& d, const Eigen::VectorXd& coefficients) {
  PredictionTrace t;
  for (Eigen::Index i = 0; i < d.rows(); ++i) t.push(d.target_dates[std::size_t(i)], d.y[i], predict(coefficients, d.x.row(i)));
  return t;
}

/// Ridge on unit-variance columns with the penalty on the per-observation scale, mapped back to raw units.
regression::LinearFit<double> fit_ridge_standardized(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double penalty) {
  const auto s = regression::standardize(x, y);
  const auto n = double(x.rows());
  Eigen::MatrixXd design(s.x.rows(), s.x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(s.x.cols()) = s.x;
  auto fit = regression::fit_ridge(design, s.y, n * penalty);
  Eigen::VectorXd coefficients = Eigen::VectorXd::Zero(x.cols());
  double intercept = s.y_mean + fit.coefficients[0];
  for (Eigen::Index j = 0; j < s.x.cols(); ++j) {
    if (s.scale[j] == 0.0) continue;
    coefficients[j + 1] = fit.coefficients[j + 1] / s.scale[j];
    intercept -= coefficients[j + 1] * s.mean[j];
  }
  coefficients[0] = intercept;
  fit.coefficients = std::move(coefficients);
  return fit;
}

double validation_qlike(const RegressionDesign& val, const Eigen::VectorXd& coefficients) {
  return score("", "", 0, forecast(val, coefficients)).qlike;
}

}  // namespace

BaselineResult run_baseline(BaselineKind kind, const FeatureTable& features, const Eigen::MatrixXd* news,
                            const BaselineOptions& options) {
  BaselineResult result;
  result.model = to_string(kind);

  RegressionDesign design;
  if (kind == BaselineKind::Har) {
    design = har_design(features, options.horizon);
  } else {
    std::optional<regression::PcaReducer<double>> reducer;
    if (news) reducer = fit_news_pca(features, *news, options.pca_threshold);
    design = harx_design(features, news, reducer ? &*reducer : nullptr, options.horizon);
    result.news_components = reducer ? std::size_t(reducer->retained) : 0;
  }
  result.labels = design.labels;
  const auto train = design.subset(Split::Train);
  const auto val = design.subset(Split::Validation);
  const auto test = design.subset(Split::Test);
  if (train.rows() == 0) throw Error(ErrorCode::InsufficientHistory, "no training rows");
  if (test.rows() == 0) throw Error(ErrorCode::EmptyTestSet, "no test rows");

  auto fit_with = [&](double penalty, bool& singular, bool& converged) -> Eigen::VectorXd {
    singular = false;
    converged = true;
    switch (kind) {
      case BaselineKind::Har:
      case BaselineKind::HarxOls: {
        auto fit = regression::fit_ols(train.x, train.y);
        singular = fit.singular;
        return fit.coefficients;
      }
      case BaselineKind::HarxRidge: {
        auto fit = fit_ridge_standardized(train.x, train.y, penalty);
        singular = fit.singular;
        return fit.coefficients;
      }
      case BaselineKind::HarxLasso: {
        auto fit = regression::fit_lasso(train.x, train.y, penalty);
        converged = fit.converged;
        return fit.coefficients;
      }
    }
    return {};
  };

  const bool penalised = kind == BaselineKind::HarxRidge || kind == BaselineKind::HarxLasso;
  if (!penalised || val.rows() == 0) {
    result.coefficients = fit_with(penalised ? options.penalty_grid.front() : 0.0, result.singular, result.converged);
    result.penalty = penalised ? options.penalty_grid.front() : 0.0;
    result.validation_qlike = val.rows() ? validation_qlike(val, result.coefficients)
                                         : std::numeric_limits<double>::quiet_NaN();
  } else {
    result.validation_qlike = std::numeric_limits<double>::infinity();
    for (double penalty : options.penalty_grid) {
      bool singular = false, converged = true;
      auto coefficients = fit_with(penalty, singular, converged);
      const double q = validation_qlike(val, coefficients);
      if (q < result.validation_qlike) {
        result.validation_qlike = q;
        result.coefficients = std::move(coefficients);
        result.penalty = penalty;
        result.singular = singular;
        result.converged = converged;
      }
    }
  }
  result.test = forecast(test, result.coefficients);
  return result;
}

}  // namespace volcast

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "volcast/eval.hpp"
#include "volcast/features.hpp"
#include "volcast/regression.hpp"

namespace volcast {

/// Rows are days tau (time ordered), column 0 is the intercept, target is y_{tau+H}.
struct RegressionDesign {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::string> labels;
  std::vector<Date> dates;
  std::vector<Date> target_dates;
  /// Split of the row, or None when the input day and the target day fall in different splits.
  std::vector<Split> splits;

  Eigen::Index rows() const { return x.rows(); }
  RegressionDesign subset(Split split) const;
};

/// Columns [1, rv_d, rv_w, rv_m]. Throws InsufficientHistory when the table has no more than H rows.
RegressionDesign har_design(const FeatureTable& features, int horizon = 1);

/// Fits the news PCA on training-split rows of `news` (one row per feature row).
regression::PcaReducer<double> fit_news_pca(const FeatureTable& features, const Eigen::MatrixXd& news,
                                            double threshold = 0.95);

/// HAR columns, the remaining market-state columns, then the reduced news columns when a reducer is
/// given. Throws DimensionMismatch when `news` does not match the table or the reducer.
RegressionDesign harx_design(const FeatureTable& features, const Eigen::MatrixXd* news,
                             const regression::PcaReducer<double>* reducer, int horizon = 1);

double predict(const Eigen::VectorXd& coefficients, const Eigen::Ref<const Eigen::RowVectorXd>& row);

enum class BaselineKind { Har, HarxOls, HarxRidge, HarxLasso };

const char* to_string(BaselineKind kind);
std::optional<BaselineKind> parse_baseline(std::string_view name);

/// 10^-4 ... 10^1 in half-decade steps.
std::vector<double> default_penalty_grid();

struct BaselineOptions {
  int horizon = 1;
  std::vector<double> penalty_grid = default_penalty_grid();
  double pca_threshold = 0.95;
};

struct BaselineResult {
  std::string model;
  Eigen::VectorXd coefficients;
  std::vector<std::string> labels;
  double penalty = 0.0;
  std::size_t news_components = 0;
  double validation_qlike = 0.0;
  bool singular = false;
  bool converged = true;
  PredictionTrace test;
};

/// Fits on the training split, picks the penalty by validation QLIKE (ridge and lasso), and
/// forecasts the test split. `news` may be null; HAR-X then has no news columns.
BaselineResult run_baseline(BaselineKind kind, const FeatureTable& features, const Eigen::MatrixXd* news,
                            const BaselineOptions& options = {});

}  // namespace volcast

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "volcast/error.hpp"

namespace volcast::regression {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct LinearFit {
  Vector<Scalar> coefficients;
  Eigen::Index rank = 0;
  /// Rank-deficient normal equations; `coefficients` is then the minimum-norm solution.
  bool singular = false;
};

/// Solves (X'X + P) b = X'y with a complete orthogonal decomposition, which yields the
/// minimum-norm solution when the system is singular.
template <typename Scalar>
LinearFit<Scalar> solve_normal_equations(const Matrix<Scalar>& gram, const Vector<Scalar>& moment) {
  Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> cod;
  cod.setThreshold(Scalar(1e-12));
  cod.compute(gram);
  LinearFit<Scalar> fit;
  fit.coefficients = cod.solve(moment);
  fit.rank = cod.rank();
  fit.singular = fit.rank < gram.cols();
  return fit;
}

/// Least squares over the columns of X (which should carry the intercept column itself).
template <typename DerivedX, typename DerivedY>
LinearFit<typename DerivedX::Scalar> fit_ols(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  if (x.rows() != y.rows()) throw Error(ErrorCode::DimensionMismatch, "design and target lengths differ");
  const Matrix<Scalar> gram = x.transpose() * x;
  const Vector<Scalar> moment = x.transpose() * y;
  return solve_normal_equations<Scalar>(gram, moment);
}

/// (X'X + lambda I) b = X'y with the first (intercept) column unpenalised.
template <typename DerivedX, typename DerivedY>
LinearFit<typename DerivedX::Scalar> fit_ridge(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
                                               typename DerivedX::Scalar lambda) {
  using Scalar = typename DerivedX::Scalar;
  if (x.rows() != y.rows()) throw Error(ErrorCode::DimensionMismatch, "design and target lengths differ");
  if (lambda < Scalar(0)) throw Error(ErrorCode::InvalidConfig, "ridge penalty must be non-negative");
  Matrix<Scalar> gram = x.transpose() * x;
  for (Eigen::Index j = 1; j < gram.cols(); ++j) gram(j, j) += lambda;
  const Vector<Scalar> moment = x.transpose() * y;
  return solve_normal_equations<Scalar>(gram, moment);
}

template <typename Scalar>
struct LassoFit {
  /// On the original column scale, intercept first.
  Vector<Scalar> coefficients;
  /// Non-intercept coefficients on standardised columns.
  Vector<Scalar> standardized;
  Vector<Scalar> column_mean;
  Vector<Scalar> column_scale;
  int sweeps = 0;
  bool converged = false;
};

template <typename Scalar>
Scalar soft_threshold(Scalar v, Scalar t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return Scalar(0);
}

struct LassoOptions {
  double tolerance = 1e-8;
  int max_sweeps = 10000;
};

/// Standardised predictors and centred target used by the lasso solve (intercept column dropped).
template <typename Scalar>
struct Standardized {
  Matrix<Scalar> x;
  Vector<Scalar> y;
  Vector<Scalar> mean;
  Vector<Scalar> scale;
  Scalar y_mean{0};
};

/// Centres columns 1.. of X and scales them to unit (population) variance; constant columns get scale 0.
template <typename DerivedX, typename DerivedY>
Standardized<typename DerivedX::Scalar> standardize(const Eigen::MatrixBase<DerivedX>& x,
                                                    const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Index n = x.rows(), p = x.cols() - 1;
  Standardized<Scalar> s;
  s.x = x.rightCols(p);
  s.mean = s.x.colwise().mean().transpose();
  s.x.rowwise() -= s.mean.transpose();
  s.scale = (s.x.colwise().squaredNorm() / Scalar(n)).cwiseSqrt().transpose();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (s.scale[j] > Scalar(1e-12))
      s.x.col(j) /= s.scale[j];
    else {
      s.scale[j] = Scalar(0);
      s.x.col(j).setZero();
    }
  }
  s.y_mean = y.mean();
  s.y = y.array() - s.y_mean;
  return s;
}

/// Smallest penalty at which every standardised coefficient is zero: max |x_j' y_c| / n.
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar lasso_lambda_max(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y) {
  const auto s = standardize(x, y);
  using Scalar = typename DerivedX::Scalar;
  // Same per-column expression as the first coordinate update, so the threshold is exact in floating point.
  Scalar lmax{0};
  for (Eigen::Index j = 0; j < s.x.cols(); ++j) lmax = std::max(lmax, std::abs(s.x.col(j).dot(s.y) / Scalar(x.rows())));
  return lmax;
}

/// Minimises (1/2n)||y - b0 - X b||^2 + lambda ||b||_1 over standardised columns by cyclic
/// coordinate descent. Column 0 of X must be the intercept column of ones; it is unpenalised.
template <typename DerivedX, typename DerivedY>
LassoFit<typename DerivedX::Scalar> fit_lasso(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
                                              typename DerivedX::Scalar lambda, const LassoOptions& options = {}) {
  using Scalar = typename DerivedX::Scalar;
  if (x.rows() != y.rows()) throw Error(ErrorCode::DimensionMismatch, "design and target lengths differ");
  if (lambda < Scalar(0)) throw Error(ErrorCode::InvalidConfig, "lasso penalty must be non-negative");
  const Eigen::Index n = x.rows(), p = x.cols() - 1;
  const auto s = standardize(x, y);

  Vector<Scalar> beta = Vector<Scalar>::Zero(p);
  Vector<Scalar> residual = s.y;
  LassoFit<Scalar> fit;
  for (fit.sweeps = 0; fit.sweeps < options.max_sweeps;) {
    ++fit.sweeps;
    Scalar max_change{0};
    for (Eigen::Index j = 0; j < p; ++j) {
      if (s.scale[j] == Scalar(0)) continue;
      const Scalar old = beta[j];
      // Columns have unit variance, so the coordinate curvature is 1.
      const Scalar rho = s.x.col(j).dot(residual) / Scalar(n) + old;
      const Scalar updated = soft_threshold(rho, lambda);
      if (updated != old) {
        residual -= (updated - old) * s.x.col(j);
        beta[j] = updated;
        max_change = std::max(max_change, std::abs(updated - old));
      }
    }
    if (max_change < Scalar(options.tolerance)) {
      fit.converged = true;
      break;
    }
  }

  fit.standardized = beta;
  fit.column_mean = s.mean;
  fit.column_scale = s.scale;
  fit.coefficients = Vector<Scalar>::Zero(p + 1);
  Scalar intercept = s.y_mean;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (s.scale[j] == Scalar(0)) continue;
    fit.coefficients[j + 1] = beta[j] / s.scale[j];
    intercept -= fit.coefficients[j + 1] * s.mean[j];
  }
  // Constant predictor columns are absorbed by the intercept and stay at zero.
  fit.coefficients[0] = intercept;
  return fit;
}

template <typename Scalar>
struct PcaReducer {
  Vector<Scalar> mean;
  /// d x d eigenvectors of the covariance, columns ordered by descending eigenvalue.
  Matrix<Scalar> basis;
  Vector<Scalar> eigenvalues;
  Vector<Scalar> explained_ratio;
  Eigen::Index retained = 0;

  Eigen::Index input_dim() const { return mean.size(); }
  Matrix<Scalar> components() const { return basis.leftCols(retained); }

  template <typename Derived>
  Matrix<Scalar> transform(const Eigen::MatrixBase<Derived>& x) const {
    if (x.cols() != input_dim()) throw Error(ErrorCode::DimensionMismatch, "PCA input width differs from fit");
    return (x.rowwise() - mean.transpose()) * components();
  }
};

/// PCA via eigendecomposition of the (1/n) covariance; keeps the fewest leading components whose
/// cumulative explained variance reaches `threshold`. Zero total variance keeps none.
template <typename Derived>
PcaReducer<typename Derived::Scalar> fit_pca(const Eigen::MatrixBase<Derived>& x, double threshold = 0.95) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.rows(), d = x.cols();
  if (n == 0) throw Error(ErrorCode::DimensionMismatch, "PCA needs at least one row");
  PcaReducer<Scalar> pca;
  pca.mean = x.colwise().mean().transpose();
  const Matrix<Scalar> centered = x.rowwise() - pca.mean.transpose();
  const Matrix<Scalar> cov = centered.transpose() * centered / Scalar(n);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(cov);
  // Ascending from Eigen; flip to descending and clamp round-off negatives.
  pca.eigenvalues = eig.eigenvalues().reverse().cwiseMax(Scalar(0));
  pca.basis = eig.eigenvectors().rowwise().reverse();
  const Scalar total = pca.eigenvalues.sum();
  pca.explained_ratio = Vector<Scalar>::Zero(d);
  if (!(total > Scalar(0))) return pca;
  pca.explained_ratio = pca.eigenvalues / total;
  Scalar cumulative{0};
  for (Eigen::Index i = 0; i < d; ++i) {
    cumulative += pca.explained_ratio[i];
    if (pca.eigenvalues[i] > Scalar(0)) pca.retained = i + 1;
    if (cumulative >= Scalar(threshold) - Scalar(1e-12)) break;
  }
  return pca;
}

}  // namespace volcast::regression

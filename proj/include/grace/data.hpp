#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "grace/core.hpp"

namespace grace {

/// Design matrix and response. When `standardized()`, y and every column
/// of X are centered and every column satisfies x_j'x_j = n.
class RegressionData {
 public:
  RegressionData(Matrix X, Vector y, bool standardized = false)
      : X_(std::move(X)), y_(std::move(y)), standardized_(standardized) {
    if (X_.rows() != y_.size()) {
      throw InvalidArgument("design has " + std::to_string(X_.rows()) + " rows but response has " +
                            std::to_string(y_.size()) + " entries");
    }
    detail::require(X_.rows() >= 1 && X_.cols() >= 1, "regression data must be nonempty");
  }

  Index n() const noexcept { return X_.rows(); }
  Index p() const noexcept { return X_.cols(); }
  const Matrix& X() const noexcept { return X_; }
  const Vector& y() const noexcept { return y_; }
  bool standardized() const noexcept { return standardized_; }

  /// Scaled Gram matrix X'X/n.
  Matrix gram() const {
    Matrix G = Matrix::Zero(p(), p());
    G.selfadjointView<Eigen::Lower>().rankUpdate(X_.transpose(), 1.0 / static_cast<double>(n()));
    return G.selfadjointView<Eigen::Lower>();
  }

 private:
  Matrix X_;
  Vector y_;
  bool standardized_;
};

/// Centering and scaling constants: X_std(:,j) = (X_raw(:,j) - x_mean_j) / x_scale_j.
struct Standardization {
  Vector x_mean;
  Vector x_scale;
  double y_mean = 0.0;

  /// Maps raw rows through the stored constants.
  Matrix apply(const Matrix& X_raw) const {
    return (X_raw.rowwise() - x_mean.transpose()).array().rowwise() / x_scale.transpose().array();
  }

  /// Coefficients on the raw scale and the matching intercept.
  std::pair<Vector, double> to_raw(const Vector& beta) const {
    Vector raw = beta.cwiseQuotient(x_scale);
    return {raw, y_mean - x_mean.dot(raw)};
  }
};

struct StandardizedData {
  RegressionData data;
  Standardization constants;
};

/// Centers y, centers columns of X and rescales them to x_j'x_j = n.
inline StandardizedData standardize(const Matrix& X_raw, const Vector& y_raw) {
  detail::require(X_raw.rows() == y_raw.size(), "standardize: X and y disagree on n");
  const Index n = X_raw.rows();
  if (n < 2) throw InvalidArgument("standardize: need at least 2 samples");

  Standardization c;
  c.x_mean = X_raw.colwise().mean().transpose();
  c.y_mean = y_raw.mean();
  Matrix X = X_raw.rowwise() - c.x_mean.transpose();
  c.x_scale = (X.colwise().squaredNorm() / static_cast<double>(n)).cwiseSqrt().transpose();
  for (Index j = 0; j < X.cols(); ++j) {
    const double magnitude = std::max(1.0, std::abs(c.x_mean(j)));
    if (!(c.x_scale(j) > 1e-12 * magnitude)) {
      throw ZeroVarianceError("column " + std::to_string(j + 1) + " has zero variance", j);
    }
    X.col(j) /= c.x_scale(j);
  }
  Vector y = y_raw.array() - c.y_mean;
  return {RegressionData(std::move(X), std::move(y), true), std::move(c)};
}

/// Largest deviation from the standardization invariants, relative to
/// their natural scales (||y||, sqrt(n), n).
inline double standardization_defect(const RegressionData& data) {
  const double n = static_cast<double>(data.n());
  const double ynorm = std::max(data.y().norm(), 1.0);
  double defect = std::abs(data.y().sum()) / ynorm;
  for (Index j = 0; j < data.p(); ++j) {
    defect = std::max(defect, std::abs(data.X().col(j).sum()) / std::sqrt(n));
    defect = std::max(defect, std::abs(data.X().col(j).squaredNorm() - n) / n);
  }
  return defect;
}

}  // namespace grace

#pragma once

// Lasso initial estimator and scaled-lasso noise level.
//
// Objective: (1/n)||y - X b||^2 + lambda ||b||_1, solved by cyclic coordinate
// descent on the covariance form (G = X'X/n, c = X'y/n).

#include <cmath>
#include <vector>

#include "grace/core.hpp"
#include "grace/data.hpp"
#include "grace/diagnostics.hpp"

namespace grace {

struct LassoOptions {
  double tolerance = 1e-7;  ///< max absolute coefficient change per sweep
  int max_sweeps = 10000;
};

struct LassoFit {
  Vector beta;
  double lambda = 0.0;
  int iterations = 0;  ///< coordinate sweeps
  bool converged = false;
  std::vector<double> objective;  ///< objective after each sweep
  double kkt_violation = 0.0;
};

struct NoiseEstimate {
  double sigma = 0.0;
  Vector beta;
  int iterations = 0;
  bool converged = false;
};

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

inline double lasso_objective(const RegressionData& data, const Vector& beta, double lambda) {
  return (data.y() - data.X() * beta).squaredNorm() / static_cast<double>(data.n()) +
         lambda * beta.lpNorm<1>();
}

/// Largest violation of the coordinate-wise stationarity conditions,
/// recomputed from the raw data.
inline double lasso_kkt_violation(const RegressionData& data, const Vector& beta, double lambda) {
  const Vector grad =
      (2.0 / static_cast<double>(data.n())) * (data.X().transpose() * (data.y() - data.X() * beta));
  double worst = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    const double v = beta(j) == 0.0 ? std::max(0.0, std::abs(grad(j)) - lambda)
                                    : std::abs(grad(j) - lambda * (beta(j) > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

namespace detail {

class CovarianceLasso {
 public:
  explicit CovarianceLasso(const RegressionData& data)
      : data_(data),
        gram_(data.gram()),
        xty_(data.X().transpose() * data.y() / static_cast<double>(data.n())),
        yty_(data.y().squaredNorm() / static_cast<double>(data.n())) {}

  LassoFit solve(double lambda, const Vector& start, const LassoOptions& options) const {
    require(lambda >= 0.0 && std::isfinite(lambda), "lasso: lambda must be nonnegative");
    const Index p = gram_.rows();
    LassoFit fit;
    fit.lambda = lambda;
    fit.beta = start.size() == p ? start : Vector::Zero(p);
    Vector gb = gram_ * fit.beta;
    const double half = 0.5 * lambda;

    auto sweep = [&](bool active_only) {
      double max_change = 0.0;
      for (Index j = 0; j < p; ++j) {
        const double old = fit.beta(j);
        if (active_only && old == 0.0) continue;
        const double gjj = gram_(j, j);
        const double updated =
            gjj > 0.0 ? soft_threshold(xty_(j) - gb(j) + gjj * old, half) / gjj : 0.0;
        const double delta = updated - old;
        if (delta != 0.0) {
          fit.beta(j) = updated;
          gb.noalias() += gram_.col(j) * delta;
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      ++fit.iterations;
      fit.objective.push_back(yty_ - 2.0 * xty_.dot(fit.beta) + fit.beta.dot(gb) +
                              lambda * fit.beta.lpNorm<1>());
      return max_change;
    };

    while (fit.iterations < options.max_sweeps) {
      if (sweep(false) < options.tolerance) {
        // Confirm stationarity with a fresh product before declaring victory.
        gb.noalias() = gram_ * fit.beta;
        double worst = 0.0;
        for (Index j = 0; j < p; ++j) {
          const double g = 2.0 * (xty_(j) - gb(j));
          worst = std::max(worst, fit.beta(j) == 0.0
                                      ? std::abs(g) - lambda
                                      : std::abs(g - lambda * (fit.beta(j) > 0 ? 1.0 : -1.0)));
        }
        if (worst <= 1e-7) {
          fit.converged = true;
          break;
        }
        continue;
      }
      while (fit.iterations < options.max_sweeps && sweep(true) >= options.tolerance) {
      }
    }
    fit.kkt_violation = lasso_kkt_violation(data_, fit.beta, lambda);
    diagnostics::record_lasso(fit.kkt_violation);
    return fit;
  }

 private:
  const RegressionData& data_;
  Matrix gram_;
  Vector xty_;
  double yty_;
};

}  // namespace detail

/// Lasso fit. Non-convergence is reported through `converged`, not thrown.
inline LassoFit lasso(const RegressionData& data, double lambda, const LassoOptions& options = {},
                      const Vector& warm_start = Vector()) {
  return detail::CovarianceLasso(data).solve(lambda, warm_start, options);
}

/// 4 sigma sqrt(3 log_p / n) for a given natural log of p.
inline double lasso_lambda_from_log_p(double sigma_hat, Index n, double log_p) {
  detail::require(n >= 2 && log_p > 0.0, "lasso lambda: need n >= 2 and p >= 2");
  return 4.0 * sigma_hat * std::sqrt(3.0 * log_p / static_cast<double>(n));
}

/// h_Lasso = 4 sigma sqrt(3 log p / n), natural log.
inline double default_lasso_lambda(double sigma_hat, Index n, Index p) {
  detail::require(p >= 2, "default_lasso_lambda: need p >= 2");
  return lasso_lambda_from_log_p(sigma_hat, n, std::log(static_cast<double>(p)));
}

/// Universal scaled-lasso penalty sqrt(2 log p / n), doubled to match the
/// (1/n)||.||^2 normalization used by `lasso`.
inline double default_scaled_lasso_lambda0(Index n, Index p) {
  detail::require(n >= 2 && p >= 2, "default_scaled_lasso_lambda0: need n >= 2 and p >= 2");
  return 2.0 * std::sqrt(2.0 * std::log(static_cast<double>(p)) / static_cast<double>(n));
}

/// Joint coefficient / noise-level estimate by alternating
/// beta <- lasso(lambda0 * sigma) and sigma <- ||y - X beta|| / sqrt(n),
/// until the relative change in sigma drops below `tolerance`.
inline NoiseEstimate scaled_lasso(const RegressionData& data, double lambda0,
                                  const LassoOptions& options = {}, int max_iterations = 100,
                                  double tolerance = 1e-8) {
  detail::require(lambda0 > 0.0, "scaled_lasso: lambda0 must be positive");
  const detail::CovarianceLasso solver(data);
  const double root_n = std::sqrt(static_cast<double>(data.n()));
  NoiseEstimate out;
  out.sigma = data.y().norm() / root_n;
  out.beta = Vector::Zero(data.p());
  if (out.sigma < 1e-12) throw DegenerateFitError("scaled_lasso: response is identically zero");

  while (out.iterations < max_iterations) {
    const LassoFit fit = solver.solve(lambda0 * out.sigma, out.beta, options);
    out.beta = fit.beta;
    ++out.iterations;
    const double sigma = (data.y() - data.X() * out.beta).norm() / root_n;
    if (sigma < 1e-12) {
      throw DegenerateFitError("scaled_lasso: residual scale collapsed to zero (perfect fit)");
    }
    const bool done = std::abs(sigma - out.sigma) < tolerance * out.sigma;
    out.sigma = sigma;
    if (done) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace grace

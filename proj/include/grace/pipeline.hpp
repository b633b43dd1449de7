#pragma once

// End-to-end test for one method: tune, fit, correct, bound, p-values.

#include <memory>
#include <optional>
#include <utility>

#include "grace/core.hpp"
#include "grace/cv.hpp"
#include "grace/data.hpp"
#include "grace/estimator.hpp"
#include "grace/inference.hpp"
#include "grace/lasso.hpp"

namespace grace {

/// Noise level and lasso initial estimator shared by every method.
struct InitialEstimate {
  double sigma_hat = 0.0;
  double lasso_lambda = 0.0;
  Vector beta_tilde;
  NoiseEstimate noise;
  LassoFit lasso;
};

/// sigma_hat by the scaled lasso, then the lasso at 4 sigma_hat sqrt(3 log p / n).
inline InitialEstimate initial_estimate(const RegressionData& data,
                                        std::optional<double> lambda0 = std::nullopt) {
  InitialEstimate out;
  out.noise = scaled_lasso(data, lambda0.value_or(default_scaled_lasso_lambda0(data.n(), data.p())));
  out.sigma_hat = out.noise.sigma;
  out.lasso_lambda = default_lasso_lambda(out.sigma_hat, data.n(), data.p());
  out.lasso = lasso(data, out.lasso_lambda);
  out.beta_tilde = out.lasso.beta;
  return out;
}

struct MethodOptions {
  CvPlan plan;                 ///< grids are restricted per method
  double ridge_h2 = 1.0;       ///< fixed tuning of the ridge comparator
  int threads = 1;
  const PenaltySpectrum* spectrum = nullptr;  ///< eigendecomposition of L, optional
};

struct MethodResult {
  TestReport report;
  std::optional<CvResult> cv;
};

/// Runs one test. `L` is ignored by gracei and ridge, which penalize with I.
inline MethodResult run_method(const RegressionData& data, const Vector& beta_tilde, double sigma_hat,
                               Method method, const PenaltyPtr& L, const TestConfig& config,
                               const MethodOptions& options) {
  config.validate();
  const Index p = data.p();
  MethodResult out;

  PenaltyPtr penalty = L;
  const PenaltySpectrum* spectrum = options.spectrum;
  if (method == Method::gracei || method == Method::ridge) {
    penalty = std::make_shared<const PenaltyMatrix>(identity_penalty(p));
    spectrum = nullptr;
  }
  detail::require(penalty != nullptr, "run_method: penalty matrix required");

  std::optional<FitResult> result;
  if (method == Method::ridge) {
    result.emplace(fit(data, GracePenaltySpec(penalty, 0.0, options.ridge_h2), sigma_hat));
  } else {
    CvPlan plan = options.plan;
    if (method == Method::grace) plan.grid_2 = {0.0};
    if (method == Method::gracei) plan.grid_G = {0.0};
    PenaltySpectrum identity_basis;
    if (method == Method::gracei && data.n() < p) {
      identity_basis = {Vector::Ones(p), Matrix::Identity(p, p)};
      spectrum = &identity_basis;
    }
    out.cv = cross_validate(data, *penalty, plan, options.threads, spectrum);
    for (std::size_t idx : out.cv->fallback_order()) {
      const auto& e = out.cv->table[idx];
      try {
        result.emplace(fit(data, GracePenaltySpec(penalty, e.h_G, e.h_2), sigma_hat));
        break;
      } catch (const SingularSystemError&) {
      }
    }
    if (!result) throw SelectionError("no cross-validated grid point gives a nonsingular full-data fit");
  }

  // The ridge comparator is uncorrected: its statistic is the estimate itself.
  const Vector z = method == Method::ridge ? result->beta_hat() : grace_statistic(*result, beta_tilde);
  const Vector gamma =
      method == Method::ridge ? Vector::Zero(p) : gamma_bound(*result, config, data.n(), p);
  const Vector variance = statistic_covariance_diag(*result, data);
  out.report = make_report(z, gamma, variance, config, method, sigma_hat);
  out.report.h_G = result->spec().h_G;
  out.report.h_2 = result->spec().h_2;
  return out;
}

}  // namespace grace

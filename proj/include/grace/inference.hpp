#pragma once

// Bias-corrected test statistics, stochastic bounds, p-values and
// multiple-testing adjustments.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "grace/core.hpp"
#include "grace/estimator.hpp"
#include "grace/normal.hpp"

namespace grace {

enum class BoundVariant { offdiag, fullrow };
enum class Correction { none, by, holm };
enum class Method { grace, gracer, gracei, ridge };

inline const char* to_string(BoundVariant v) { return v == BoundVariant::offdiag ? "offdiag" : "fullrow"; }

inline const char* to_string(Correction c) {
  switch (c) {
    case Correction::none: return "none";
    case Correction::by: return "by";
    case Correction::holm: return "holm";
  }
  return "unknown";
}

inline const char* to_string(Method m) {
  switch (m) {
    case Method::grace: return "grace";
    case Method::gracer: return "gracer";
    case Method::gracei: return "gracei";
    case Method::ridge: return "ridge";
  }
  return "unknown";
}

inline Method parse_method(const std::string& name) {
  if (name == "grace") return Method::grace;
  if (name == "gracer") return Method::gracer;
  if (name == "gracei") return Method::gracei;
  if (name == "ridge") return Method::ridge;
  throw InvalidArgument("unknown method '" + name + "'");
}

inline Correction parse_correction(const std::string& name) {
  if (name == "none") return Correction::none;
  if (name == "by") return Correction::by;
  if (name == "holm") return Correction::holm;
  throw InvalidArgument("unknown correction '" + name + "'");
}

struct TestConfig {
  double xi = 0.05;  ///< sparsity exponent, in (0, 1/2)
  BoundVariant bound = BoundVariant::offdiag;
  bool scale_invariant = false;  ///< multiply the bound by sigma_eps
  double alpha = 0.05;
  Correction correction = Correction::by;

  void validate() const {
    detail::require(xi > 0.0 && xi < 0.5, "xi must lie in (0, 0.5)");
    detail::require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  }
};

/// (log p / n)^(1/2 - xi), natural log.
inline double bound_rate(double xi, Index n, Index p) {
  return std::pow(std::log(static_cast<double>(p)) / static_cast<double>(n), 0.5 - xi);
}

/// z = beta_hat + A^{-1} M beta_tilde.
inline Vector grace_statistic(const FitResult& result, const Vector& beta_tilde) {
  if (beta_tilde.size() != result.p()) throw InvalidArgument("grace_statistic: dimension mismatch");
  const Vector correction = result.factor().solve(result.spec().effective() * beta_tilde);
  return result.beta_hat() + correction;
}

/// Row-wise max |(A^{-1}M)_(j,i)| over i != j (offdiag) or over all i
/// (fullrow), times the rate factor and optionally sigma_eps.
inline Vector gamma_bound(const FitResult& result, const TestConfig& config, Index n, Index p) {
  config.validate();
  const Matrix B = result.correction_operator();
  const Index dim = B.rows();
  Vector gamma(dim);
  for (Index j = 0; j < dim; ++j) {
    double worst = 0.0;
    for (Index i = 0; i < dim; ++i) {
      if (i == j && config.bound == BoundVariant::offdiag) continue;
      worst = std::max(worst, std::abs(B(j, i)));
    }
    gamma(j) = worst;
  }
  double factor = bound_rate(config.xi, n, p);
  if (config.scale_invariant) {
    detail::require(std::isfinite(result.sigma_eps()), "scale-invariant bound needs sigma_eps");
    factor *= result.sigma_eps();
  }
  return gamma * factor;
}

/// Two-sided p-values 2(1 - Phi[(|z| - Gamma)_+ / sd]).
inline Vector p_values(const Vector& z, const Vector& gamma, const Vector& sd) {
  detail::require(z.size() == gamma.size() && z.size() == sd.size(), "p_values: size mismatch");
  Vector out(z.size());
  for (Index j = 0; j < z.size(); ++j) {
    if (!(sd(j) > 0.0)) {
      throw InvalidArgument("p_values: standard deviation of covariate " + std::to_string(j + 1) +
                            " is not positive");
    }
    const double excess = std::max(std::abs(z(j)) - gamma(j), 0.0);
    out(j) = two_sided_tail(excess / sd(j));
  }
  return out;
}

namespace detail {

inline void check_probabilities(const Vector& p) {
  for (Index i = 0; i < p.size(); ++i) {
    if (!(p(i) >= 0.0 && p(i) <= 1.0)) throw InvalidArgument("p-values must lie in [0, 1]");
  }
}

/// Indices sorted by ascending p; ties keep input order.
inline std::vector<Index> ascending_order(const Vector& p) {
  std::vector<Index> order(static_cast<std::size_t>(p.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return p(a) < p(b); });
  return order;
}

}  // namespace detail

/// Benjamini-Yekutieli step-up adjustment with c(m) = sum_{i<=m} 1/i.
inline Vector adjust_by(const Vector& p) {
  detail::check_probabilities(p);
  const Index m = p.size();
  Vector out(m);
  if (m == 0) return out;
  double harmonic = 0.0;
  for (Index i = 1; i <= m; ++i) harmonic += 1.0 / static_cast<double>(i);
  const auto order = detail::ascending_order(p);
  double running = 1.0;
  for (Index k = m; k >= 1; --k) {
    const Index idx = order[static_cast<std::size_t>(k - 1)];
    const double candidate =
        static_cast<double>(m) * harmonic * p(idx) / static_cast<double>(k);
    running = std::min(running, std::min(1.0, candidate));
    out(idx) = running;
  }
  return out;
}

/// Holm step-down adjustment.
inline Vector adjust_holm(const Vector& p) {
  detail::check_probabilities(p);
  const Index m = p.size();
  Vector out(m);
  const auto order = detail::ascending_order(p);
  double running = 0.0;
  for (Index k = 0; k < m; ++k) {
    const Index idx = order[static_cast<std::size_t>(k)];
    running = std::max(running, std::min(1.0, static_cast<double>(m - k) * p(idx)));
    out(idx) = running;
  }
  return out;
}

inline Vector adjust(const Vector& p, Correction correction) {
  switch (correction) {
    case Correction::by: return adjust_by(p);
    case Correction::holm: return adjust_holm(p);
    case Correction::none: detail::check_probabilities(p); return p;
  }
  return p;
}

/// Sufficient detection size 2 Gamma_j + q_(1-alpha/2) sd_j + q_(1-psi/2).
inline Vector detection_threshold(const Vector& gamma, const Vector& sd, double alpha, double psi) {
  detail::require(gamma.size() == sd.size(), "detection_threshold: size mismatch");
  detail::require(alpha > 0.0 && alpha < 1.0 && psi > 0.0 && psi < 1.0,
                  "detection_threshold: alpha and psi must lie in (0, 1)");
  const double q_alpha = -normal_quantile(alpha / 2.0);
  const double q_psi = -normal_quantile(psi / 2.0);
  Vector out(gamma.size());
  for (Index j = 0; j < gamma.size(); ++j) {
    detail::require(sd(j) > 0.0, "detection_threshold: standard deviations must be positive");
    out(j) = 2.0 * gamma(j) + q_alpha * sd(j) + q_psi;
  }
  return out;
}

inline Vector detection_threshold(const FitResult& result, const RegressionData& data,
                                  const TestConfig& config, double psi) {
  const Vector gamma = gamma_bound(result, config, data.n(), data.p());
  const Vector sd = statistic_covariance_diag(result, data).cwiseSqrt();
  return detection_threshold(gamma, sd, config.alpha, psi);
}

struct CovariateResult {
  double z = 0.0;
  double gamma = 0.0;
  double sd = 0.0;
  double p_raw = 1.0;
  double p_adj = 1.0;
  bool rejected = false;
};

struct TestReport {
  Method method = Method::grace;
  Correction correction = Correction::by;
  double alpha = 0.05;
  double sigma_used = 0.0;
  double h_G = 0.0;
  double h_2 = 0.0;
  std::vector<CovariateResult> rows;

  std::size_t rejections() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.rejected; }));
  }
};

/// Assembles per-covariate results from statistic, bound and variance.
inline TestReport make_report(const Vector& z, const Vector& gamma, const Vector& variance,
                              const TestConfig& config, Method method, double sigma_used) {
  config.validate();
  const Vector sd = variance.cwiseMax(0.0).cwiseSqrt();
  const Vector raw = p_values(z, gamma, sd);
  const Vector adjusted = adjust(raw, config.correction);
  TestReport report;
  report.method = method;
  report.correction = config.correction;
  report.alpha = config.alpha;
  report.sigma_used = sigma_used;
  report.rows.resize(static_cast<std::size_t>(z.size()));
  for (Index j = 0; j < z.size(); ++j) {
    auto& r = report.rows[static_cast<std::size_t>(j)];
    r = {z(j), gamma(j), sd(j), raw(j), std::max(adjusted(j), raw(j)), false};
    r.rejected = r.p_adj <= config.alpha;
  }
  return report;
}

/// Formats a double in full-precision scientific notation.
inline std::string format_real(double x) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17e", x);
  return buffer;
}

/// CSV `covariate,z,gamma,sd,p_raw,p_adj,rejected`, covariates 1-based.
inline void write_report_csv(std::ostream& out, const TestReport& report) {
  out << "covariate,z,gamma,sd,p_raw,p_adj,rejected\n";
  for (std::size_t j = 0; j < report.rows.size(); ++j) {
    const auto& r = report.rows[j];
    out << (j + 1) << ',' << format_real(r.z) << ',' << format_real(r.gamma) << ','
        << format_real(r.sd) << ',' << format_real(r.p_raw) << ',' << format_real(r.p_adj) << ','
        << (r.rejected ? 1 : 0) << '\n';
  }
}

}  // namespace grace

#pragma once

// Closed-form graph-penalized estimators
//
//   beta_hat = (X'X + h_G L + h_2 I)^{-1} X'y
//
// Grace is (h, 0); GraceI is (0, h) with L unused; GraceR uses both. The
// factorization of A = X'X + M is kept in the FitResult and shared by the
// statistic, its variance and the stochastic bound.

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <utility>

#include "grace/core.hpp"
#include "grace/data.hpp"
#include "grace/diagnostics.hpp"
#include "grace/graph.hpp"

namespace grace {

struct GracePenaltySpec {
  PenaltyPtr L;
  double h_G = 0.0;
  double h_2 = 0.0;

  GracePenaltySpec() = default;
  GracePenaltySpec(PenaltyPtr penalty, double hg, double h2)
      : L(std::move(penalty)), h_G(hg), h_2(h2) {
    detail::require(L != nullptr, "penalty spec needs a penalty matrix");
    detail::require(h_G >= 0.0 && h_2 >= 0.0 && std::isfinite(h_G) && std::isfinite(h_2),
                    "tuning parameters must be nonnegative and finite");
  }

  Index dim() const { return L->dim(); }

  /// M = h_G L + h_2 I.
  Matrix effective() const {
    Matrix M = h_G == 0.0 ? Matrix::Zero(dim(), dim()) : Matrix(h_G * L->entries());
    M.diagonal().array() += h_2;
    return M;
  }
};

inline GracePenaltySpec make_spec(const PenaltyMatrix& L, double h_G, double h_2) {
  return GracePenaltySpec(std::make_shared<const PenaltyMatrix>(L), h_G, h_2);
}

/// Factorization of A = X'X + M with a positive-definiteness verdict.
class SystemFactor {
 public:
  SystemFactor() = default;

  explicit SystemFactor(const Matrix& A) : ldlt_(A) {
    const Index p = A.rows();
    const Vector pivots = ldlt_.vectorD();
    smallest_pivot_ = pivots.minCoeff();
    const double floor = 1e-10 * A.trace() / static_cast<double>(p);
    if (ldlt_.info() != Eigen::Success || !(smallest_pivot_ > floor) || !(floor > 0.0)) {
      std::ostringstream msg;
      msg << "system matrix X'X + h_G*L + h_2*I is not positive definite (smallest pivot "
          << smallest_pivot_ << "); add diagonal jitter to the penalty or increase h_2";
      throw SingularSystemError(msg.str(), smallest_pivot_);
    }
  }

  template <class Rhs>
  auto solve(const Eigen::MatrixBase<Rhs>& rhs) const {
    return ldlt_.solve(rhs);
  }

  double smallest_pivot() const noexcept { return smallest_pivot_; }

 private:
  Eigen::LDLT<Matrix> ldlt_;
  double smallest_pivot_ = 0.0;
};

class FitResult {
 public:
  FitResult(Vector beta_hat, GracePenaltySpec spec, std::shared_ptr<const SystemFactor> factor,
            double sigma_eps, double relative_residual)
      : beta_hat_(std::move(beta_hat)),
        spec_(std::move(spec)),
        factor_(std::move(factor)),
        sigma_eps_(sigma_eps),
        relative_residual_(relative_residual) {}

  const Vector& beta_hat() const noexcept { return beta_hat_; }
  const GracePenaltySpec& spec() const noexcept { return spec_; }
  const SystemFactor& factor() const noexcept { return *factor_; }
  double sigma_eps() const noexcept { return sigma_eps_; }
  /// ||A beta_hat - X'y|| / ||X'y||.
  double relative_residual() const noexcept { return relative_residual_; }
  Index p() const noexcept { return beta_hat_.size(); }

  /// A^{-1} M, the bias-correction operator.
  Matrix correction_operator() const { return factor_->solve(spec_.effective()); }

 private:
  Vector beta_hat_;
  GracePenaltySpec spec_;
  std::shared_ptr<const SystemFactor> factor_;
  double sigma_eps_;
  double relative_residual_;
};

inline Matrix system_matrix(const RegressionData& data, const GracePenaltySpec& spec) {
  const Index p = data.p();
  Matrix A = Matrix::Zero(p, p);
  A.selfadjointView<Eigen::Lower>().rankUpdate(data.X().transpose());
  A = A.selfadjointView<Eigen::Lower>();
  if (spec.h_G != 0.0) A.noalias() += spec.h_G * spec.L->entries();
  A.diagonal().array() += spec.h_2;
  return A;
}

/// Solves the penalized normal equations. `sigma_eps` is carried along for
/// the variance of the test statistic.
inline FitResult fit(const RegressionData& data, const GracePenaltySpec& spec,
                     double sigma_eps = std::numeric_limits<double>::quiet_NaN()) {
  if (spec.dim() != data.p()) {
    throw InvalidArgument("penalty is " + std::to_string(spec.dim()) + "x" +
                          std::to_string(spec.dim()) + " but data has p = " +
                          std::to_string(data.p()));
  }
  const Matrix A = system_matrix(data, spec);
  auto factor = std::make_shared<const SystemFactor>(A);
  const Vector xty = data.X().transpose() * data.y();
  Vector beta = factor->solve(xty);
  const double scale = xty.norm();
  const double residual = (A * beta - xty).norm() / (scale > 0.0 ? scale : 1.0);
  diagnostics::record_grace(residual);
  return FitResult(std::move(beta), spec, std::move(factor), sigma_eps, residual);
}

/// Var(Z_j | X) = sigma^2 [A^{-1} X'X A^{-1}]_jj = n sigma^2 [A^{-1} S A^{-1}]_jj.
inline Vector statistic_covariance_diag(const FitResult& result, const RegressionData& data) {
  detail::require(std::isfinite(result.sigma_eps()),
                  "statistic_covariance_diag: fit carries no noise level");
  const Matrix W = result.factor().solve(data.X().transpose());
  return result.sigma_eps() * result.sigma_eps() * W.rowwise().squaredNorm();
}

/// Smallest eigenvalue of A by inverse power iteration on its factorization.
inline double smallest_eigenvalue(const FitResult& result, int max_iterations = 10000,
                                  double tolerance = 1e-13) {
  const Index p = result.p();
  Vector v(p);
  for (Index i = 0; i < p; ++i) v(i) = 1.0 + 0.1 * std::sin(static_cast<double>(i + 1));
  v.normalize();
  double mu = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Vector w = result.factor().solve(v);
    const double next = v.dot(w);
    v = w.normalized();
    if (it > 0 && std::abs(next - mu) <= tolerance * std::abs(next)) {
      mu = next;
      break;
    }
    mu = next;
  }
  return 1.0 / mu;
}

/// Bias bound ||M beta*|| / lambda_0(A) for a known beta*.
inline double bias_bound(const FitResult& result, const Vector& beta_star) {
  detail::require(beta_star.size() == result.p(), "bias_bound: dimension mismatch");
  const double numerator = (result.spec().effective() * beta_star).norm();
  if (numerator == 0.0) return 0.0;
  return numerator / smallest_eigenvalue(result);
}

}  // namespace grace

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "grace/inference.hpp"
#include "helpers.hpp"

namespace {

using grace::Matrix;
using grace::Vector;

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<grace::Index>(v.size()));
  grace::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

TEST(Statistic, ZeroInitialEstimateLeavesEstimate) {
  const auto data = testing_helpers::random_standardized(20, 5, 1);
  const auto result = grace::fit(data, grace::make_spec(grace::identity_penalty(5), 0.0, 3.0));
  EXPECT_TRUE(grace::grace_statistic(result, Vector::Zero(5)).isApprox(result.beta_hat()));
}

TEST(Statistic, NoPenaltyIsLeastSquares) {
  const auto data = testing_helpers::random_standardized(30, 4, 2);
  const auto result = grace::fit(data, grace::make_spec(grace::identity_penalty(4), 0.0, 0.0));
  const Vector ols = data.X().colPivHouseholderQr().solve(data.y());
  EXPECT_TRUE(grace::grace_statistic(result, Vector::Ones(4)).isApprox(ols, 1e-10));
}

TEST(Statistic, CorrectionRemovesPenaltyBias) {
  // With beta_tilde = beta* and no noise, z recovers beta* exactly.
  const Matrix X = grace::standardize(testing_helpers::random_matrix(15, 30, 3), Vector::Zero(15)).data.X();
  const Vector beta = Vector::LinSpaced(30, -1.0, 1.0);
  const grace::RegressionData data(X, X * beta, true);
  const grace::WeightedGraph g(30, {{0, 1, 1.0}, {5, 6, 1.0}});
  const auto result = grace::fit(data, grace::make_spec(grace::laplacian(g), 4.0, 0.5));
  EXPECT_TRUE(grace::grace_statistic(result, beta).isApprox(beta, 1e-9));
}

TEST(GammaBound, OrthonormalGraceIHasZeroBound) {
  const Matrix X = testing_helpers::orthonormal_design(25, 4, 4);
  const grace::RegressionData data(X, Vector::Zero(25), true);
  const auto result = grace::fit(data, grace::make_spec(grace::identity_penalty(4), 0.0, 10.0));
  EXPECT_LT(grace::gamma_bound(result, {}, 25, 4).cwiseAbs().maxCoeff(), 1e-15);
  grace::TestConfig full;
  full.bound = grace::BoundVariant::fullrow;
  EXPECT_NEAR(grace::gamma_bound(result, full, 25, 4)(0), 10.0 / 35.0 * grace::bound_rate(0.05, 25, 4), 1e-14);
}

TEST(GammaBound, TwoCovariateClosedForm) {
  const grace::Index n = 100;
  const double h = 100.0, rho = 0.5;
  const Matrix X = testing_helpers::correlated_pair(n, rho, 5);
  const grace::RegressionData data(X, Vector::Zero(n), true);
  for (double l : {0.5, 0.9}) {
    Matrix L(2, 2);
    L << 1, l, l, 1;
    const auto result = grace::fit(data, grace::make_spec(grace::custom_penalty(L), h, 0.0));
    const double det = (n + h) * (n + h) - (n * rho + h * l) * (n * rho + h * l);
    const double expected = std::abs(n * h * (l - rho)) / det * std::pow(std::log(2.0) / n, 0.45);
    EXPECT_NEAR(grace::gamma_bound(result, {}, n, 2)(0), expected, 1e-15);
  }
  // l = 0.9: 100*100*0.4 / (40000 - 19600) * (ln 2 / 100)^0.45 = 0.196078... * 0.107789...
  Matrix L(2, 2);
  L << 1, 0.9, 0.9, 1;
  const auto result = grace::fit(data, grace::make_spec(grace::custom_penalty(L), h, 0.0));
  EXPECT_NEAR(grace::gamma_bound(result, {}, n, 2)(0), 4000.0 / 20400.0 * std::exp(0.45 * std::log(std::log(2.0) / 100.0)), 1e-15);
}

TEST(GammaBound, ScaleInvariantMultipliesBySigma) {
  const auto data = testing_helpers::random_standardized(20, 6, 6);
  const grace::WeightedGraph g(6, {{0, 1, 1.0}, {1, 2, 1.0}, {4, 5, 1.0}});
  const auto result = grace::fit(data, grace::make_spec(grace::laplacian(g), 5.0, 0.1), 2.5);
  grace::TestConfig scaled;
  scaled.scale_invariant = true;
  EXPECT_TRUE(grace::gamma_bound(result, scaled, 20, 6).isApprox(2.5 * grace::gamma_bound(result, {}, 20, 6)));
}

TEST(PValues, Examples) {
  EXPECT_DOUBLE_EQ(grace::p_values(vec({0.3}), vec({0.5}), vec({1.0}))(0), 1.0);
  EXPECT_NEAR(grace::p_values(vec({1.959964 * 0.3}), vec({0.0}), vec({0.3}))(0), 0.05, 1e-4);
  EXPECT_NEAR(grace::p_values(vec({0.5}), vec({0.1}), vec({0.2}))(0), 0.04550, 5e-6);
  EXPECT_NEAR(grace::p_values(vec({-0.5}), vec({0.1}), vec({0.2}))(0), 0.04550, 5e-6);
  EXPECT_THROW(grace::p_values(vec({1.0}), vec({0.0}), vec({0.0})), grace::InvalidArgument);
}

TEST(AdjustBy, Examples) {
  EXPECT_EQ(grace::adjust_by(vec({0.013}))(0), 0.013);
  const Vector adj = grace::adjust_by(vec({0.01, 0.02, 0.03}));
  for (grace::Index i = 0; i < 3; ++i) EXPECT_NEAR(adj(i), 0.055, 1e-15);
  EXPECT_TRUE(grace::adjust_by(Vector::Ones(4)).isApprox(Vector::Ones(4)));
}

TEST(AdjustHolm, Examples) {
  EXPECT_EQ(grace::adjust_holm(vec({0.2}))(0), 0.2);
  const Vector a = grace::adjust_holm(vec({0.01, 0.04}));
  EXPECT_NEAR(a(0), 0.02, 1e-15);
  EXPECT_NEAR(a(1), 0.04, 1e-15);
  const Vector b = grace::adjust_holm(vec({0.03, 0.03, 0.03}));
  for (grace::Index i = 0; i < 3; ++i) EXPECT_NEAR(b(i), 0.09, 1e-15);
}

TEST(Adjust, RejectsInvalidProbabilities) {
  EXPECT_THROW(grace::adjust_by(vec({0.5, 1.5})), grace::InvalidArgument);
  EXPECT_THROW(grace::adjust_holm(vec({-0.1})), grace::InvalidArgument);
  EXPECT_THROW(grace::adjust(vec({std::nan("")}), grace::Correction::none), grace::InvalidArgument);
}

TEST(Adjust, RandomVectorProperties) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const grace::Index m = 1 + trial % 17;
    Vector p(m);
    for (auto& v : p) v = unif(gen) * (trial % 3 == 0 ? 0.05 : 1.0);
    for (auto correction : {grace::Correction::by, grace::Correction::holm}) {
      const Vector adj = grace::adjust(p, correction);
      std::vector<grace::Index> order(static_cast<std::size_t>(m));
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return p(a) < p(b); });
      for (grace::Index i = 0; i < m; ++i) {
        EXPECT_GE(adj(i), p(i));
        EXPECT_LE(adj(i), 1.0);
      }
      for (std::size_t k = 1; k < order.size(); ++k) EXPECT_LE(adj(order[k - 1]), adj(order[k]));
    }
  }
}

TEST(DetectionThreshold, Examples) {
  EXPECT_NEAR(grace::detection_threshold(vec({0.0}), vec({1.0}), 0.05, 0.05)(0), 2 * 1.959964, 1e-5);
  EXPECT_NEAR(grace::detection_threshold(vec({0.5}), vec({0.1}), 0.05, 0.5)(0), 1.8705, 1e-4);
  EXPECT_THROW(grace::detection_threshold(vec({0.5}), vec({0.0}), 0.05, 0.5), grace::InvalidArgument);
}

TEST(Report, CsvLayout) {
  grace::TestConfig config;
  config.correction = grace::Correction::none;
  const auto report = grace::make_report(vec({0.5, 0.0}), vec({0.1, 0.0}), vec({0.04, 1.0}), config,
                                         grace::Method::grace, 1.0);
  std::ostringstream out;
  grace::write_report_csv(out, report);
  std::istringstream lines(out.str());
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  EXPECT_EQ(header, "covariate,z,gamma,sd,p_raw,p_adj,rejected");
  EXPECT_EQ(first.substr(0, 2), "1,");
  EXPECT_EQ(first.back(), '1');
  EXPECT_EQ(report.rejections(), 1u);
  for (const auto& r : report.rows) EXPECT_GE(r.p_adj, r.p_raw);
}

TEST(Parse, NamesRoundTrip) {
  for (auto m : {grace::Method::grace, grace::Method::gracer, grace::Method::gracei, grace::Method::ridge}) {
    EXPECT_EQ(grace::parse_method(grace::to_string(m)), m);
  }
  EXPECT_THROW(grace::parse_method("lasso"), grace::InvalidArgument);
  EXPECT_EQ(grace::parse_correction("holm"), grace::Correction::holm);
}

}  // namespace

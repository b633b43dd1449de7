#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "grace/cv.hpp"
#include "grace/simulation.hpp"
#include "helpers.hpp"

namespace {

using grace::Matrix;
using grace::Vector;

TEST(Folds, BalancedAndReproducible) {
  const auto a = grace::fold_assignment(103, 10, 5);
  EXPECT_EQ(a, grace::fold_assignment(103, 10, 5));
  EXPECT_NE(a, grace::fold_assignment(103, 10, 6));
  std::vector<int> sizes(10, 0);
  for (int f : a) ++sizes[static_cast<std::size_t>(f)];
  EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1);
  EXPECT_THROW(grace::fold_assignment(5, 6, 1), grace::InvalidArgument);
}

TEST(LogGrid, Endpoints) {
  const auto g = grace::default_cv_grid();
  ASSERT_EQ(g.size(), 20u);
  EXPECT_NEAR(g.front(), 1e-2, 1e-16);
  EXPECT_NEAR(g.back(), 1e6, 1e-8);
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
}

/// Reference CV error computed with an explicit p x p solve per fold.
double reference_cv_error(const grace::RegressionData& data, const grace::PenaltyMatrix& L, int folds,
                          std::uint64_t seed, double hg, double h2) {
  const auto fold = grace::fold_assignment(data.n(), folds, seed);
  double total = 0.0;
  for (int k = 0; k < folds; ++k) {
    std::vector<grace::Index> train, test;
    for (grace::Index i = 0; i < data.n(); ++i) (fold[static_cast<std::size_t>(i)] == k ? test : train).push_back(i);
    const Matrix Xtr_raw = data.X()(train, Eigen::all);
    const auto std_train = grace::standardize(Xtr_raw, data.y()(train));
    const Matrix Xte = std_train.constants.apply(data.X()(test, Eigen::all));
    Matrix A = std_train.data.X().transpose() * std_train.data.X() + hg * L.entries();
    A.diagonal().array() += h2;
    const Vector beta = A.llt().solve(std_train.data.X().transpose() * std_train.data.y());
    const Vector resid = (data.y()(test).array() - std_train.constants.y_mean).matrix() - Xte * beta;
    total += resid.squaredNorm();
  }
  return total;
}

TEST(CrossValidate, MatchesReferenceOnBothPaths) {
  const auto graph = grace::WeightedGraph(12, {{0, 1, 1.0}, {1, 2, 1.0}, {3, 4, 1.0}, {5, 6, 2.0}, {8, 9, 1.0}});
  const auto L = grace::laplacian(graph, 0.05);
  for (grace::Index p : {6, 12}) {
    const auto data = testing_helpers::random_standardized(10, p, 20 + static_cast<std::uint64_t>(p));
    const grace::PenaltyMatrix Lp(L.entries().topLeftCorner(p, p), grace::PenaltyKind::custom, 0.05);
    grace::CvPlan plan;
    plan.folds = 5;
    plan.grid_G = {0.5, 5.0};
    plan.grid_2 = {0.1, 2.0};
    plan.seed = 3;
    const auto cv = grace::cross_validate(data, Lp, plan);
    for (const auto& e : cv.table) {
      EXPECT_NEAR(e.cv_error, reference_cv_error(data, Lp, 5, 3, e.h_G, e.h_2), 1e-9 * e.cv_error) << p;
    }
  }
}

TEST(CrossValidate, SinglePointAndTies) {
  const auto data = testing_helpers::random_standardized(20, 5, 4);
  const auto L = grace::identity_penalty(5);
  grace::CvPlan plan;
  plan.folds = 4;
  plan.grid_2 = {3.0};
  const auto single = grace::cross_validate(data, L, plan);
  EXPECT_EQ(single.h_2, 3.0);
  EXPECT_EQ(single.table.size(), 1u);

  plan.grid_G = {0.0};
  plan.grid_2 = {1.0, 1.0};
  const auto tie = grace::cross_validate(data, L, plan);
  EXPECT_EQ(tie.table[0].cv_error, tie.table[1].cv_error);
  EXPECT_EQ(tie.selected, grace::cross_validate(data, L, plan).selected);

  // identical errors for every h_G when L = 0: the largest h_G wins
  const grace::PenaltyMatrix zero(Matrix::Zero(5, 5), grace::PenaltyKind::custom, 0.0);
  plan.grid_G = {1.0, 10.0, 100.0};
  plan.grid_2 = {1.0};
  EXPECT_EQ(grace::cross_validate(data, zero, plan).h_G, 100.0);
}

TEST(CrossValidate, GridOrderDoesNotChangeErrors) {
  const auto data = testing_helpers::random_standardized(30, 8, 5);
  const auto L = grace::laplacian(grace::WeightedGraph(8, {{0, 1, 1.0}, {2, 3, 1.0}}), 0.01);
  grace::CvPlan plan;
  plan.grid_G = {1.0, 10.0, 100.0};
  plan.seed = 9;
  const auto a = grace::cross_validate(data, L, plan);
  plan.grid_G = {1.0, 100.0};
  const auto b = grace::cross_validate(data, L, plan);
  EXPECT_EQ(a.table[0].cv_error, b.table[0].cv_error);
  EXPECT_EQ(a.table[2].cv_error, b.table[1].cv_error);
}

TEST(CrossValidate, ThreadCountDoesNotChangeResult) {
  const auto data = testing_helpers::random_standardized(40, 60, 6);
  const auto L = grace::laplacian(grace::WeightedGraph(60, {{0, 1, 1.0}, {1, 2, 1.0}, {10, 11, 1.0}}));
  grace::CvPlan plan;
  plan.grid_G = grace::log_grid(1e-2, 1e4, 6);
  plan.grid_2 = grace::log_grid(1e-2, 1e4, 6);
  plan.seed = 1;
  const auto a = grace::cross_validate(data, L, plan, 1);
  const auto b = grace::cross_validate(data, L, plan, 3);
  std::ostringstream sa, sb;
  grace::write_cv_table_csv(sa, a);
  grace::write_cv_table_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(CrossValidate, SingularPointsAreSkipped) {
  const auto data = testing_helpers::random_standardized(10, 30, 7);
  const auto L = grace::identity_penalty(30);
  grace::CvPlan plan;
  plan.folds = 5;
  plan.grid_G = {0.0};
  plan.grid_2 = {0.0, 1.0};
  const auto cv = grace::cross_validate(data, L, plan);
  EXPECT_EQ(cv.failures, 1);
  EXPECT_FALSE(cv.table[0].feasible);
  EXPECT_EQ(cv.h_2, 1.0);
  plan.grid_2 = {0.0};
  EXPECT_THROW(grace::cross_validate(data, L, plan), grace::SelectionError);
  std::ostringstream out;
  grace::write_cv_table_csv(out, cv);
  EXPECT_NE(out.str().find(",NA\n"), std::string::npos);
}

TEST(CrossValidate, SelectedErrorIsNotWorseThanExtremes) {
  grace::SimDesign design;
  const auto graph = grace::hub_satellite_graph(design);
  const auto raw = grace::generate_data(design, grace::laplacian(graph), 4.8, 0);
  const auto data = grace::standardize(raw.X, raw.y).data;
  grace::CvPlan plan;
  plan.grid_G = grace::default_cv_grid();
  plan.seed = 2;
  const auto cv = grace::cross_validate(data, grace::laplacian(graph, 0.01), plan);
  EXPECT_LE(cv.cv_error, cv.table.front().cv_error);
  EXPECT_LE(cv.cv_error, cv.table.back().cv_error);
}

}  // namespace

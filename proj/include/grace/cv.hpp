#pragma once

// K-fold cross-validation over (h_G, h_2).
//
// Training folds are re-standardized; held-out rows are mapped through the
// training constants. When the training fold is wide (n_k < p) and the
// penalty M = h_G L + h_2 I is positive definite, fits use the eigenbasis of
// L and the n_k x n_k push-through identity
//
//   (X'X + M)^{-1} X'y = M^{-1} X' (I + X M^{-1} X')^{-1} y,
//
// otherwise the p x p system is factored directly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <vector>

#include "grace/core.hpp"
#include "grace/data.hpp"
#include "grace/estimator.hpp"
#include "grace/graph.hpp"
#include "grace/inference.hpp"
#include "grace/parallel.hpp"
#include "grace/random.hpp"

namespace grace {

struct CvPlan {
  int folds = 10;
  std::vector<double> grid_G{0.0};
  std::vector<double> grid_2{0.0};
  std::uint64_t seed = 0;

  void validate(Index n) const {
    detail::require(folds >= 2 && folds <= n, "cv: folds must lie in [2, n]");
    for (const auto* grid : {&grid_G, &grid_2}) {
      detail::require(!grid->empty(), "cv: grids must be nonempty");
      detail::require(std::is_sorted(grid->begin(), grid->end()), "cv: grids must be ascending");
      for (double h : *grid) {
        detail::require(h >= 0.0 && std::isfinite(h), "cv: grid values must be nonnegative");
      }
    }
  }
};

struct CvEntry {
  double h_G = 0.0;
  double h_2 = 0.0;
  double cv_error = std::numeric_limits<double>::quiet_NaN();
  bool feasible = false;
};

struct CvResult {
  double h_G = 0.0;
  double h_2 = 0.0;
  double cv_error = 0.0;
  std::size_t selected = 0;  ///< index into table
  std::vector<CvEntry> table;
  int failures = 0;  ///< infeasible grid points

  /// Feasible table indices ordered by log-distance from the selection.
  std::vector<std::size_t> fallback_order() const {
    auto lg = [](double h) { return std::log10(std::max(h, 1e-300)); };
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (table[i].feasible) idx.push_back(i);
    }
    auto dist = [&](std::size_t i) {
      const double a = lg(table[i].h_G) - lg(h_G), b = lg(table[i].h_2) - lg(h_2);
      return a * a + b * b;
    };
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return dist(a) < dist(b); });
    return idx;
  }
};

/// `count` log-spaced values from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, int count) {
  detail::require(lo > 0.0 && hi >= lo && count >= 1, "log_grid: need 0 < lo <= hi, count >= 1");
  std::vector<double> out;
  if (count == 1) return {lo};
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < count; ++i) {
    out.push_back(std::pow(10.0, a + (b - a) * i / (count - 1)));
  }
  return out;
}

/// Default grid: 20 log-spaced points on [1e-2, 1e6].
inline std::vector<double> default_cv_grid() { return log_grid(1e-2, 1e6, 20); }

/// Fold label of each sample from a seeded permutation; sizes differ by <= 1.
inline std::vector<int> fold_assignment(Index n, int folds, std::uint64_t seed) {
  detail::require(folds >= 2 && folds <= n, "fold_assignment: folds must lie in [2, n]");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i + 1)))]);
  }
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) fold[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = static_cast<int>(i % folds);
  return fold;
}

/// Eigendecomposition of a penalty matrix, reusable across CV calls.
struct PenaltySpectrum {
  Vector values;
  Matrix vectors;
};

inline PenaltySpectrum penalty_spectrum(const PenaltyMatrix& L) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(L.entries());
  if (solver.info() != Eigen::Success) throw Error("eigendecomposition of the penalty failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

namespace detail {

struct FoldData {
  Matrix X_train;
  Vector y_train;
  Matrix X_test;
  Vector y_test;
  double y_mean = 0.0;
  Matrix X_train_rot;  ///< X_train U, when the eigenbasis path is used
  Matrix X_test_rot;
};

inline FoldData make_fold(const RegressionData& data, const std::vector<int>& fold, int k) {
  std::vector<Index> train, test;
  for (Index i = 0; i < data.n(); ++i) (fold[static_cast<std::size_t>(i)] == k ? test : train).push_back(i);
  FoldData f;
  const Matrix Xtr = data.X()(train, Eigen::all);
  const Matrix Xte = data.X()(test, Eigen::all);
  const Vector ytr = data.y()(train);
  f.y_test = data.y()(test);

  const auto nt = static_cast<double>(train.size());
  const Eigen::RowVectorXd mean = Xtr.colwise().mean();
  Eigen::RowVectorXd scale = ((Xtr.rowwise() - mean).colwise().squaredNorm() / nt).cwiseSqrt();
  for (Index j = 0; j < scale.size(); ++j) {
    // A column constant within the training fold carries no information;
    // it is centered to zero and left unscaled.
    if (!(scale(j) > 1e-12 * std::max(1.0, std::abs(mean(j))))) scale(j) = 1.0;
  }
  f.X_train = (Xtr.rowwise() - mean).array().rowwise() / scale.array();
  f.X_test = (Xte.rowwise() - mean).array().rowwise() / scale.array();
  f.y_mean = ytr.mean();
  f.y_train = ytr.array() - f.y_mean;
  return f;
}

/// Held-out SSE for one grid point, or NaN when the system is singular.
inline double fold_sse(const FoldData& f, const PenaltyMatrix& L, const PenaltySpectrum* spectrum,
                       double h_G, double h_2) {
  const Index n = f.X_train.rows();
  const Index p = f.X_train.cols();
  Vector predictions;
  bool done = false;

  if (spectrum != nullptr && f.X_train_rot.size() > 0) {
    const Vector d = (h_G * spectrum->values).array() + h_2;
    const double dmax = d.cwiseAbs().maxCoeff();
    if (d.minCoeff() > 1e-12 * dmax && dmax > 0.0) {
      const Vector w = d.cwiseInverse();
      const Matrix weighted = f.X_train_rot * w.asDiagonal();
      Matrix K = Matrix::Identity(n, n);
      K.noalias() += weighted * f.X_train_rot.transpose();
      Eigen::LLT<Matrix> llt(K);
      if (llt.info() == Eigen::Success) {
        const Vector a = llt.solve(f.y_train);
        const Vector coef = weighted.transpose() * a;
        predictions = f.X_test_rot * coef;
        done = true;
      }
    }
  }
  if (!done) {
    Matrix A = Matrix::Zero(p, p);
    A.selfadjointView<Eigen::Lower>().rankUpdate(f.X_train.transpose());
    A = A.selfadjointView<Eigen::Lower>();
    if (h_G != 0.0) A.noalias() += h_G * L.entries();
    A.diagonal().array() += h_2;
    try {
      const SystemFactor factor(A);
      const Vector beta = factor.solve(f.X_train.transpose() * f.y_train);
      predictions = f.X_test * beta;
    } catch (const SingularSystemError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  }
  return (f.y_test.array() - f.y_mean - predictions.array()).square().sum();
}

}  // namespace detail

/// Cross-validated choice of (h_G, h_2) minimizing held-out squared error.
/// Exact ties go to the larger h_G, then the larger h_2. `spectrum`, when
/// given, must be the eigendecomposition of `L`.
inline CvResult cross_validate(const RegressionData& data, const PenaltyMatrix& L, const CvPlan& plan,
                               int threads = 1, const PenaltySpectrum* spectrum = nullptr) {
  plan.validate(data.n());
  detail::require(L.dim() == data.p(), "cross_validate: penalty dimension does not match p");
  const auto fold = fold_assignment(data.n(), plan.folds, plan.seed);

  CvResult result;
  for (double hg : plan.grid_G) {
    for (double h2 : plan.grid_2) result.table.push_back({hg, h2, 0.0, true});
  }
  const auto points = static_cast<Index>(result.table.size());

  const Index largest_train = data.n() - data.n() / plan.folds;
  PenaltySpectrum local;
  if (spectrum == nullptr && largest_train < data.p()) {
    local = penalty_spectrum(L);
    spectrum = &local;
  }

  std::vector<double> sse(result.table.size());
  for (int k = 0; k < plan.folds; ++k) {
    detail::FoldData f = detail::make_fold(data, fold, k);
    if (spectrum != nullptr && f.X_train.rows() < f.X_train.cols()) {
      f.X_train_rot = f.X_train * spectrum->vectors;
      f.X_test_rot = f.X_test * spectrum->vectors;
    }
    parallel_for(points, threads, [&](Index g) {
      const auto& e = result.table[static_cast<std::size_t>(g)];
      sse[static_cast<std::size_t>(g)] = detail::fold_sse(f, L, spectrum, e.h_G, e.h_2);
    });
    for (std::size_t g = 0; g < sse.size(); ++g) {
      auto& e = result.table[g];
      if (!std::isfinite(sse[g])) e.feasible = false;
      e.cv_error += sse[g];
    }
  }

  bool any = false;
  for (std::size_t g = 0; g < result.table.size(); ++g) {
    auto& e = result.table[g];
    if (!e.feasible) {
      e.cv_error = std::numeric_limits<double>::quiet_NaN();
      ++result.failures;
      continue;
    }
    const auto& best = result.table[result.selected];
    const bool better = !any || e.cv_error < best.cv_error ||
                        (e.cv_error == best.cv_error &&
                         (e.h_G > best.h_G || (e.h_G == best.h_G && e.h_2 > best.h_2)));
    if (better) {
      result.selected = g;
      any = true;
    }
  }
  if (!any) throw SelectionError("cross-validation: every grid point produced a singular system");
  const auto& best = result.table[result.selected];
  result.h_G = best.h_G;
  result.h_2 = best.h_2;
  result.cv_error = best.cv_error;
  return result;
}

/// CSV `h_G,h_2,cv_error`; infeasible points are written as NA.
inline void write_cv_table_csv(std::ostream& out, const CvResult& cv) {
  out << "h_G,h_2,cv_error\n";
  for (const auto& e : cv.table) {
    out << format_real(e.h_G) << ',' << format_real(e.h_2) << ','
        << (e.feasible ? format_real(e.cv_error) : std::string("NA")) << '\n';
  }
}

}  // namespace grace

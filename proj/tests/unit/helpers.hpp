#pragma once

#include <cmath>
#include <random>

#include "grace/data.hpp"

namespace testing_helpers {

inline grace::Matrix random_matrix(grace::Index rows, grace::Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  grace::Matrix m(rows, cols);
  for (grace::Index j = 0; j < cols; ++j) {
    for (grace::Index i = 0; i < rows; ++i) m(i, j) = z(gen);
  }
  return m;
}

inline grace::Vector random_vector(grace::Index size, std::uint64_t seed) {
  return random_matrix(size, 1, seed).col(0);
}

/// Centered design with X'X = nI exactly (up to rounding).
inline grace::Matrix orthonormal_design(grace::Index n, grace::Index p, std::uint64_t seed) {
  grace::Matrix raw = random_matrix(n, p, seed);
  raw.rowwise() -= raw.colwise().mean();
  Eigen::HouseholderQR<grace::Matrix> qr(raw);
  const grace::Matrix Q = qr.householderQ() * grace::Matrix::Identity(n, p);
  return std::sqrt(static_cast<double>(n)) * Q;
}

inline grace::RegressionData random_standardized(grace::Index n, grace::Index p, std::uint64_t seed,
                                                 double noise = 1.0) {
  const grace::Matrix X = random_matrix(n, p, seed);
  grace::Vector beta = grace::Vector::Zero(p);
  for (grace::Index j = 0; j < std::min<grace::Index>(p, 3); ++j) beta(j) = 1.0 - 0.5 * static_cast<double>(j);
  const grace::Vector y = X * beta + noise * random_vector(n, seed + 1000);
  return grace::standardize(X, y).data;
}

}  // namespace testing_helpers

namespace testing_helpers {

/// Standardized two-column design with x_j'x_j = n and x_1'x_2 = n rho.
inline grace::Matrix correlated_pair(grace::Index n, double rho, std::uint64_t seed) {
  const grace::Matrix Q = orthonormal_design(n, 2, seed);
  grace::Matrix X(n, 2);
  X.col(0) = Q.col(0);
  X.col(1) = rho * Q.col(0) + std::sqrt(1.0 - rho * rho) * Q.col(1);
  return X;
}

}  // namespace testing_helpers

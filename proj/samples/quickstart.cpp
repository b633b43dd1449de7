// Simulates one hub-satellite dataset and runs the Grace test on it.

#include <iostream>

#include "grace/grace.hpp"

int main() {
  grace::SimDesign design;
  design.seed = 2024;
  const grace::WeightedGraph graph = grace::hub_satellite_graph(design);
  const grace::PenaltyMatrix L_star = grace::laplacian(graph);
  const grace::GeneratedData raw = grace::generate_data(design, L_star, 4.8, 0);

  const grace::RegressionData data = grace::standardize(raw.X, raw.y).data;
  const grace::InitialEstimate init = grace::initial_estimate(data);
  std::cout << "sigma_hat = " << init.sigma_hat << '\n';

  auto L = std::make_shared<const grace::PenaltyMatrix>(grace::laplacian(graph, 0.01));
  grace::TestConfig config;
  grace::MethodOptions options;
  options.plan.grid_G = grace::default_cv_grid();
  options.plan.seed = 7;
  const auto result = grace::run_method(data, init.beta_tilde, init.sigma_hat, grace::Method::grace, L,
                                        config, options);

  std::cout << "h_G = " << result.report.h_G << ", rejections = " << result.report.rejections() << '\n';
  for (std::size_t j = 0; j < 12; ++j) {
    const auto& r = result.report.rows[j];
    std::cout << "covariate " << j + 1 << ": z = " << r.z << ", p_adj = " << r.p_adj
              << (r.rejected ? "  *" : "") << '\n';
  }
}

#pragma once

// Monte-Carlo power / type-I error study on hub-satellite graphs.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "grace/core.hpp"
#include "grace/cv.hpp"
#include "grace/data.hpp"
#include "grace/graph.hpp"
#include "grace/inference.hpp"
#include "grace/parallel.hpp"
#include "grace/pipeline.hpp"
#include "grace/random.hpp"

namespace grace {

struct SimDesign {
  int hubs = 50;
  int satellites_per_hub = 9;
  Index n = 100;
  int active = 10;                         ///< leading covariates with nonzero effect
  double active_value = 1.0 / std::sqrt(10.0);
  std::vector<double> r2_levels{0.1, 0.2, 0.3};
  std::vector<std::int64_t> npe_list{-165, -70, -10, 0, 15, 135, 350};
  int replicates = 100;
  std::uint64_t seed = 1;
  double precision_ridge = 0.11;           ///< Sigma = (L* + 0.11 I)^{-1}

  Index p() const { return static_cast<Index>(hubs) * (1 + satellites_per_hub); }

  Vector beta_star() const {
    Vector b = Vector::Zero(p());
    b.head(active).setConstant(active_value);
    return b;
  }

  void validate() const {
    detail::require(hubs >= 1 && satellites_per_hub >= 0, "design: need at least one hub");
    detail::require(n >= 2, "design: need n >= 2");
    detail::require(active >= 0 && active <= p(), "design: active count out of range");
    detail::require(replicates >= 1, "design: need at least one replicate");
    detail::require(!r2_levels.empty(), "design: no R^2 levels");
    for (double r2 : r2_levels) detail::require(r2 > 0.0 && r2 < 1.0, "design: R^2 must lie in (0, 1)");
    detail::require(precision_ridge > 0.0, "design: precision ridge must be positive");
  }
};

/// Hub k (0-based) is node k(s+1); its satellites follow it, so the first
/// cluster occupies covariates 1..s+1. Unit weights, hub-to-satellite only.
inline WeightedGraph hub_satellite_graph(const SimDesign& design) {
  const Index size = 1 + design.satellites_per_hub;
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(design.hubs * design.satellites_per_hub));
  for (Index k = 0; k < design.hubs; ++k) {
    for (Index s = 1; s < size; ++s) edges.push_back({k * size, k * size + s, 1.0});
  }
  return WeightedGraph(design.p(), std::move(edges));
}

/// Noise standard deviation for a target R^2: the values used in the
/// reference study for 0.1, 0.2 and 0.3, otherwise solved from
/// R^2 = s / (s + sigma^2) with s = beta*' Sigma beta*.
inline double sigma_for_r2(double r2, double signal_variance) {
  static const std::map<double, double> reference{{0.1, 9.5}, {0.2, 6.3}, {0.3, 4.8}};
  for (const auto& [level, sigma] : reference) {
    if (std::abs(level - r2) < 1e-12) return sigma;
  }
  detail::require(r2 > 0.0 && r2 < 1.0, "sigma_for_r2: R^2 must lie in (0, 1)");
  detail::require(signal_variance > 0.0, "sigma_for_r2: no signal to calibrate against");
  return std::sqrt(signal_variance * (1.0 - r2) / r2);
}

/// Draws rows x ~ N(0, Sigma) with Sigma = P^{-1}, P = L* + c I.
class DesignSampler {
 public:
  DesignSampler(const PenaltyMatrix& L_star, double precision_ridge) {
    Matrix P = L_star.entries();
    P.diagonal().array() += precision_ridge;
    llt_.compute(P);
    if (llt_.info() != Eigen::Success) {
      throw SingularSystemError("L* + c I is not positive definite", 0.0);
    }
  }

  /// X = Z C^{-1} for P = C C', so each row has covariance C^{-T} C^{-1} = P^{-1}.
  Matrix sample(Index n, std::uint64_t seed) const {
    const Index p = llt_.matrixL().rows();
    Rng rng(seed);
    Matrix Zt(p, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < p; ++j) Zt(j, i) = rng.normal();
    }
    return llt_.matrixU().solve(Zt).transpose();
  }

  Matrix covariance() const {
    const Index p = llt_.matrixL().rows();
    return llt_.solve(Matrix::Identity(p, p));
  }

 private:
  Eigen::LLT<Matrix> llt_;
};

struct GeneratedData {
  Matrix X;
  Vector y;
  Vector beta_star;
};

inline Vector standard_noise(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Vector e(n);
  for (Index i = 0; i < n; ++i) e(i) = rng.normal();
  return e;
}

/// One replicate's raw data. Deterministic in (design.seed, replicate).
inline GeneratedData generate_data(const SimDesign& design, const PenaltyMatrix& L_star, double sigma_eps,
                                   std::uint64_t replicate) {
  detail::require(sigma_eps > 0.0, "generate_data: sigma_eps must be positive");
  const DesignSampler sampler(L_star, design.precision_ridge);
  GeneratedData out;
  out.X = sampler.sample(design.n, derive_seed(design.seed, replicate, Stream::design));
  out.beta_star = design.beta_star();
  out.y = out.X * out.beta_star +
          sigma_eps * standard_noise(design.n, derive_seed(design.seed, replicate, Stream::noise));
  return out;
}

struct StudyOptions {
  TestConfig config{.correction = Correction::none};
  std::vector<double> grid_G = default_cv_grid();
  std::vector<double> grid_2 = default_cv_grid();
  int folds = 10;
  double grace_jitter = 0.01;  ///< added to L's diagonal for Grace only
  double ridge_h2 = 1.0;
  int threads = 1;
  bool keep_details = false;
};

struct SimRow {
  Method method = Method::grace;
  std::optional<std::int64_t> npe;  ///< empty for methods that ignore the graph
  double r2 = 0.0;
  std::optional<double> power_mean;
  std::optional<double> power_se;
  double level_mean = 0.0;
  std::optional<double> level_se;
  int replicates = 0;
};

struct ReplicateRecord {
  Method method = Method::grace;
  std::optional<std::int64_t> npe;
  double r2 = 0.0;
  int replicate = 0;
  std::optional<double> power;
  double level = 0.0;
  double h_G = 0.0;
  double h_2 = 0.0;
  double sigma_hat = 0.0;
};

struct SimReport {
  std::vector<SimRow> rows;
  std::vector<ReplicateRecord> details;
  int failed_replicates = 0;
};

inline bool uses_graph(Method m) { return m == Method::grace || m == Method::gracer; }

namespace detail {

struct ReplicateOutcome {
  bool ok = false;
  std::string error;
  std::vector<ReplicateRecord> records;  ///< in report-row order
};

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_real(*v) : std::string("NA");
}

inline std::string format_npe(const std::optional<std::int64_t>& npe) {
  return npe ? std::to_string(*npe) : std::string("NA");
}

}  // namespace detail

/// Runs every replicate and aggregates power over the active covariates and
/// type-I error over the rest. Replicates run in parallel; results do not
/// depend on the worker count.
inline SimReport run_study(const SimDesign& design, const std::vector<Method>& methods,
                           const StudyOptions& options) {
  design.validate();
  options.config.validate();
  detail::require(!methods.empty(), "run_study: no methods requested");

  const WeightedGraph true_graph = hub_satellite_graph(design);
  const PenaltyMatrix L_star = laplacian(true_graph, 0.0);
  const DesignSampler sampler(L_star, design.precision_ridge);
  const Vector beta_star = design.beta_star();
  const double signal_variance = beta_star.dot(sampler.covariance() * beta_star);
  std::vector<double> sigmas;
  for (double r2 : design.r2_levels) sigmas.push_back(sigma_for_r2(r2, signal_variance));

  bool any_graph = false;
  for (Method m : methods) any_graph = any_graph || uses_graph(m);
  const std::vector<std::int64_t> npes = any_graph ? design.npe_list : std::vector<std::int64_t>{};

  std::vector<Index> active, inactive;
  for (Index j = 0; j < design.p(); ++j) (beta_star(j) != 0.0 ? active : inactive).push_back(j);

  std::vector<detail::ReplicateOutcome> outcomes(static_cast<std::size_t>(design.replicates));
  parallel_for(design.replicates, options.threads, [&](Index r) {
    auto& outcome = outcomes[static_cast<std::size_t>(r)];
    try {
      const auto rep = static_cast<std::uint64_t>(r);
      const Matrix X = sampler.sample(design.n, derive_seed(design.seed, rep, Stream::design));
      const Vector noise = standard_noise(design.n, derive_seed(design.seed, rep, Stream::noise));

      struct GraphPenalties {
        PenaltyPtr grace, gracer;
        PenaltySpectrum grace_spectrum, gracer_spectrum;
      };
      std::vector<GraphPenalties> penalties(npes.size());
      for (std::size_t k = 0; k < npes.size(); ++k) {
        const WeightedGraph g = perturb_edges(
            true_graph, npes[k],
            derive_seed(design.seed, rep, Stream::perturbation, static_cast<std::uint64_t>(npes[k])));
        auto& gp = penalties[k];
        gp.gracer = std::make_shared<const PenaltyMatrix>(laplacian(g, 0.0));
        gp.grace = std::make_shared<const PenaltyMatrix>(laplacian(g, options.grace_jitter));
        gp.gracer_spectrum = penalty_spectrum(*gp.gracer);
        gp.grace_spectrum = {gp.gracer_spectrum.values.array() + options.grace_jitter,
                             gp.gracer_spectrum.vectors};
      }

      for (std::size_t level = 0; level < sigmas.size(); ++level) {
        const Vector y = X * beta_star + sigmas[level] * noise;
        const RegressionData data = standardize(X, y).data;
        const InitialEstimate init = initial_estimate(data);

        MethodOptions mo;
        mo.plan.folds = options.folds;
        mo.plan.grid_G = options.grid_G;
        mo.plan.grid_2 = options.grid_2;
        mo.plan.seed = derive_seed(design.seed, rep, Stream::folds);
        mo.ridge_h2 = options.ridge_h2;
        mo.threads = 1;

        auto record = [&](Method m, std::optional<std::int64_t> npe, const TestReport& report) {
          ReplicateRecord rec{m, npe, design.r2_levels[level], static_cast<int>(r), std::nullopt, 0.0,
                              report.h_G, report.h_2, init.sigma_hat};
          auto rate = [&](const std::vector<Index>& idx) {
            double hits = 0.0;
            for (Index j : idx) hits += report.rows[static_cast<std::size_t>(j)].rejected ? 1.0 : 0.0;
            return hits / static_cast<double>(idx.size());
          };
          if (!active.empty()) rec.power = rate(active);
          rec.level = inactive.empty() ? 0.0 : rate(inactive);
          outcome.records.push_back(rec);
        };

        for (Method m : methods) {
          if (!uses_graph(m)) {
            mo.spectrum = nullptr;
            const auto res =
                run_method(data, init.beta_tilde, init.sigma_hat, m, nullptr, options.config, mo);
            record(m, std::nullopt, res.report);
            continue;
          }
          for (std::size_t k = 0; k < npes.size(); ++k) {
            const auto& gp = penalties[k];
            const bool grace = m == Method::grace;
            mo.spectrum = grace ? &gp.grace_spectrum : &gp.gracer_spectrum;
            const auto res = run_method(data, init.beta_tilde, init.sigma_hat, m,
                                        grace ? gp.grace : gp.gracer, options.config, mo);
            record(m, npes[k], res.report);
          }
        }
      }
      outcome.ok = true;
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.error = e.what();
      outcome.records.clear();
    }
  });

  SimReport report;
  std::vector<const detail::ReplicateOutcome*> good;
  for (const auto& o : outcomes) {
    if (o.ok) {
      good.push_back(&o);
    } else {
      ++report.failed_replicates;
    }
  }
  if (report.failed_replicates * 10 > design.replicates) {
    throw Error("simulation aborted: " + std::to_string(report.failed_replicates) + " of " +
                std::to_string(design.replicates) + " replicates failed (first error: " +
                [&] {
                  for (const auto& o : outcomes) {
                    if (!o.ok) return o.error;
                  }
                  return std::string();
                }() +
                ")");
  }
  if (good.empty()) return report;

  auto mean_se = [](const std::vector<double>& v) -> std::pair<double, std::optional<double>> {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return {mean, std::nullopt};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
  };

  const std::size_t keys = good.front()->records.size();
  for (std::size_t key = 0; key < keys; ++key) {
    const auto& first = good.front()->records[key];
    SimRow row{first.method, first.npe, first.r2, std::nullopt, std::nullopt, 0.0, std::nullopt,
               static_cast<int>(good.size())};
    std::vector<double> powers, levels;
    for (const auto* o : good) {
      const auto& rec = o->records[key];
      if (rec.power) powers.push_back(*rec.power);
      levels.push_back(rec.level);
      if (options.keep_details) report.details.push_back(rec);
    }
    if (!powers.empty()) std::tie(row.power_mean, row.power_se) = mean_se(powers);
    std::tie(row.level_mean, row.level_se) = mean_se(levels);
    report.rows.push_back(row);
  }
  return report;
}

/// CSV `method,npe,r2,power_mean,power_se,level_mean,level_se,replicates`.
inline void write_sim_report_csv(std::ostream& out, const SimReport& report) {
  out << "method,npe,r2,power_mean,power_se,level_mean,level_se,replicates\n";
  for (const auto& row : report.rows) {
    out << to_string(row.method) << ',' << detail::format_npe(row.npe) << ',' << format_real(row.r2)
        << ',' << detail::format_optional(row.power_mean) << ','
        << detail::format_optional(row.power_se) << ',' << format_real(row.level_mean) << ','
        << detail::format_optional(row.level_se) << ',' << row.replicates << '\n';
  }
}

/// Long-format curves with 95% bands (mean +- 1.96 SE).
inline void write_curves_csv(std::ostream& out, const SimReport& report) {
  out << "method,npe,r2,metric,mean,lower,upper\n";
  for (const auto& row : report.rows) {
    auto emit = [&](const char* metric, const std::optional<double>& mean,
                    const std::optional<double>& se) {
      if (!mean) return;
      out << to_string(row.method) << ',' << detail::format_npe(row.npe) << ','
          << format_real(row.r2) << ',' << metric << ',' << format_real(*mean) << ',';
      if (se) {
        out << format_real(*mean - 1.96 * *se) << ',' << format_real(*mean + 1.96 * *se) << '\n';
      } else {
        out << "NA,NA\n";
      }
    };
    emit("power", row.power_mean, row.power_se);
    emit("level", row.level_mean, row.level_se);
  }
}

inline void write_replicates_csv(std::ostream& out, const SimReport& report) {
  out << "method,npe,r2,replicate,power,level,h_G,h_2,sigma_hat\n";
  for (const auto& rec : report.details) {
    out << to_string(rec.method) << ',' << detail::format_npe(rec.npe) << ',' << format_real(rec.r2)
        << ',' << rec.replicate << ',' << detail::format_optional(rec.power) << ','
        << format_real(rec.level) << ',' << format_real(rec.h_G) << ',' << format_real(rec.h_2)
        << ',' << format_real(rec.sigma_hat) << '\n';
  }
}

}  // namespace grace

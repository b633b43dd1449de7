// grace-infer: command-line front end.
//
//   grace-infer test --x X.csv --y y.csv --edges g.txt --method grace --out DIR
//   grace-infer simulate --replicates 20 --out DIR
//   grace-infer figure1 --k 10 --t 0.25 --out DIR
//   grace-infer graph-info --edges g.txt

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "grace/grace.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

/// "LO:HI:N" for a log grid, or a single value.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  auto number = [&](const std::string& s) {
    double v;
    if (!grace::detail::parse_real(s, v)) throw grace::InvalidArgument("bad grid '" + text + "'");
    return v;
  };
  if (parts.size() == 1) return {number(parts[0])};
  if (parts.size() != 3) throw grace::InvalidArgument("grid must be LO:HI:N, got '" + text + "'");
  const double count = number(parts[2]);
  if (count < 1 || count != static_cast<int>(count)) {
    throw grace::InvalidArgument("grid count must be a positive integer in '" + text + "'");
  }
  return grace::log_grid(number(parts[0]), number(parts[1]), static_cast<int>(count));
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw grace::Error("cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw grace::Error("failed writing '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed, bool& generated) {
  generated = !seed.has_value();
  if (seed) return *seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

int resolve_threads(int flag) { return flag > 0 ? flag : grace::default_thread_count(); }

grace::PenaltyKind parse_penalty(const std::string& name) {
  if (name == "laplacian") return grace::PenaltyKind::laplacian;
  if (name == "normalized") return grace::PenaltyKind::normalized_laplacian;
  if (name == "identity") return grace::PenaltyKind::identity;
  throw grace::InvalidArgument("unknown penalty '" + name + "'");
}

std::string error_line(const std::exception& e) {
  json j;
  j["error"] = "runtime";
  j["message"] = e.what();
  if (auto* pe = dynamic_cast<const grace::ParseError*>(&e)) {
    j["error"] = "parse";
    j["line"] = pe->line();
    j["column"] = pe->column();
  } else if (auto* se = dynamic_cast<const grace::SingularSystemError*>(&e)) {
    j["error"] = "singular_system";
    j["smallest_pivot"] = se->smallest_pivot();
  } else if (auto* ze = dynamic_cast<const grace::ZeroVarianceError*>(&e)) {
    j["error"] = "zero_variance";
    j["column"] = ze->column() + 1;
  } else if (dynamic_cast<const grace::InvalidArgument*>(&e)) {
    j["error"] = "invalid_argument";
  } else if (dynamic_cast<const grace::GraphError*>(&e)) {
    j["error"] = "graph";
  } else if (dynamic_cast<const grace::SelectionError*>(&e)) {
    j["error"] = "selection";
  } else if (dynamic_cast<const grace::DegenerateFitError*>(&e)) {
    j["error"] = "degenerate_fit";
  }
  return j.dump();
}

struct CommonTestFlags {
  double xi = 0.05;
  double alpha = 0.05;
  std::string correction;
  std::string bound = "offdiag";
  bool scale_invariant = false;
  std::string grid_g = "1e-2:1e6:20";
  std::string grid_2 = "1e-2:1e6:20";
  int folds = 10;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  int threads = 0;
  double ridge_h2 = 1.0;

  grace::TestConfig config() const {
    grace::TestConfig c;
    c.xi = xi;
    c.alpha = alpha;
    c.correction = grace::parse_correction(correction);
    c.bound = bound == "fullrow" ? grace::BoundVariant::fullrow : grace::BoundVariant::offdiag;
    c.scale_invariant = scale_invariant;
    c.validate();
    return c;
  }

  json settings() const {
    return {{"xi", xi},           {"alpha", alpha},     {"correction", correction},
            {"bound", bound},     {"scale_invariant", scale_invariant},
            {"grid_g", grid_g},   {"grid_2", grid_2},   {"folds", folds},
            {"ridge_h2", ridge_h2}};
  }
};

void add_common(CLI::App* cmd, CommonTestFlags& f, const std::string& default_correction) {
  f.correction = default_correction;
  cmd->add_option("--xi", f.xi, "sparsity exponent in (0, 0.5)")->capture_default_str();
  cmd->add_option("--alpha", f.alpha, "significance level")->capture_default_str();
  cmd->add_option("--correction", f.correction, "multiple-testing adjustment")
      ->check(CLI::IsMember({"by", "holm", "none"}))
      ->capture_default_str();
  cmd->add_option("--bound", f.bound, "bias bound variant")
      ->check(CLI::IsMember({"offdiag", "fullrow"}))
      ->capture_default_str();
  cmd->add_flag("--scale-invariant", f.scale_invariant, "multiply the bound by sigma_hat");
  cmd->add_option("--grid-g", f.grid_g, "h_G grid LO:HI:N (log spaced) or a single value")
      ->capture_default_str();
  cmd->add_option("--grid-2", f.grid_2, "h_2 grid LO:HI:N (log spaced) or a single value")
      ->capture_default_str();
  cmd->add_option("--folds", f.folds, "cross-validation folds")->capture_default_str();
  cmd->add_option("--ridge-h2", f.ridge_h2, "fixed h_2 of the ridge test")->capture_default_str();
  cmd->add_option("--seed", f.seed, "master seed (generated when absent)");
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  cmd->add_option("--threads", f.threads, "worker threads (default: GRACE_INFER_THREADS or all cores)");
}

struct TestFlags {
  std::string x, y, edges;
  std::string method = "grace";
  std::string penalty = "laplacian";
  std::optional<double> jitter;
  CommonTestFlags common;
};

int cmd_test(const TestFlags& f) {
  const grace::Method method = grace::parse_method(f.method);
  const grace::TestConfig config = f.common.config();
  const grace::PenaltyKind kind = parse_penalty(f.penalty);
  bool seed_generated = false;
  const std::uint64_t seed = resolve_seed(f.common.seed, seed_generated);
  const int threads = resolve_threads(f.common.threads);
  // Grace alone has no ridge term, so its graph penalty gets a small default jitter.
  const double jitter = f.jitter.value_or(method == grace::Method::grace ? 0.01 : 0.0);

  const grace::Matrix X_raw = grace::read_csv_matrix(f.x);
  const grace::Vector y_raw = grace::read_csv_vector(f.y);
  if (X_raw.rows() != y_raw.size()) {
    throw grace::InvalidArgument("X has " + std::to_string(X_raw.rows()) + " rows but y has " +
                                 std::to_string(y_raw.size()) + " entries");
  }
  const auto standardized = grace::standardize(X_raw, y_raw);
  const grace::RegressionData& data = standardized.data;
  const grace::Index p = data.p();

  const bool graph_method = grace::uses_graph(method);
  grace::PenaltyPtr L;
  if (graph_method) {
    if (kind == grace::PenaltyKind::identity) {
      L = std::make_shared<const grace::PenaltyMatrix>(grace::identity_penalty(p));
    } else {
      if (f.edges.empty()) throw grace::InvalidArgument("--edges is required for method " + f.method);
      const grace::WeightedGraph g = grace::read_edge_list(f.edges);
      if (g.num_nodes() != p) {
        throw grace::InvalidArgument("edge list declares " + std::to_string(g.num_nodes()) +
                                     " nodes but X has " + std::to_string(p) + " columns");
      }
      L = std::make_shared<const grace::PenaltyMatrix>(
          kind == grace::PenaltyKind::laplacian ? grace::laplacian(g, jitter)
                                                 : grace::normalized_laplacian(g, jitter));
    }
  }

  const grace::InitialEstimate init = grace::initial_estimate(data);
  grace::MethodOptions mo;
  mo.plan.folds = f.common.folds;
  mo.plan.grid_G = parse_grid(f.common.grid_g);
  mo.plan.grid_2 = parse_grid(f.common.grid_2);
  mo.plan.seed = grace::derive_seed(seed, 0, grace::Stream::folds);
  mo.ridge_h2 = f.common.ridge_h2;
  mo.threads = threads;
  const grace::MethodResult result =
      grace::run_method(data, init.beta_tilde, init.sigma_hat, method, L, config, mo);

  const fs::path dir(f.common.out);
  fs::create_directories(dir);
  {
    const auto path = dir / "report.csv";
    auto out = open_output(path);
    grace::write_report_csv(out, result.report);
    finish(out, path);
  }
  if (result.cv) {
    const auto path = dir / "cv_table.csv";
    auto out = open_output(path);
    grace::write_cv_table_csv(out, *result.cv);
    finish(out, path);
  }
  json meta = f.common.settings();
  meta["mode"] = "test";
  meta["x"] = f.x;
  meta["y"] = f.y;
  meta["edges"] = f.edges;
  meta["method"] = f.method;
  meta["penalty"] = graph_method ? f.penalty : "identity";
  meta["jitter"] = graph_method ? jitter : 0.0;
  meta["seed"] = seed;
  meta["seed_generated"] = seed_generated;
  meta["threads"] = threads;
  meta["n"] = data.n();
  meta["p"] = p;
  meta["sigma_hat"] = init.sigma_hat;
  meta["lasso_lambda"] = init.lasso_lambda;
  meta["h_G"] = result.report.h_G;
  meta["h_2"] = result.report.h_2;
  meta["rejections"] = result.report.rejections();
  write_json(dir / "run_meta.json", meta);
  return 0;
}

struct SimulateFlags {
  int replicates = 100;
  std::vector<std::int64_t> npe{-165, -70, -10, 0, 15, 135, 350};
  std::vector<double> r2{0.1, 0.2, 0.3};
  std::vector<std::string> methods{"grace", "gracer", "gracei", "ridge"};
  long n = 100;
  int hubs = 50;
  double jitter = 0.01;
  bool details = false;
  CommonTestFlags common;
};

int cmd_simulate(const SimulateFlags& f) {
  std::vector<grace::Method> methods;
  for (const auto& m : f.methods) methods.push_back(grace::parse_method(m));
  bool seed_generated = false;
  const std::uint64_t seed = resolve_seed(f.common.seed, seed_generated);
  const int threads = resolve_threads(f.common.threads);

  grace::SimDesign design;
  design.n = f.n;
  design.hubs = f.hubs;
  design.replicates = f.replicates;
  design.npe_list = f.npe;
  design.r2_levels = f.r2;
  design.seed = seed;

  grace::StudyOptions options;
  options.config = f.common.config();
  options.grid_G = parse_grid(f.common.grid_g);
  options.grid_2 = parse_grid(f.common.grid_2);
  options.folds = f.common.folds;
  options.grace_jitter = f.jitter;
  options.ridge_h2 = f.common.ridge_h2;
  options.threads = threads;
  options.keep_details = f.details;
  const grace::SimReport report = grace::run_study(design, methods, options);

  const fs::path dir(f.common.out);
  fs::create_directories(dir);
  auto emit = [&](const char* name, auto writer) {
    const auto path = dir / name;
    auto out = open_output(path);
    writer(out, report);
    finish(out, path);
  };
  emit("simreport.csv", grace::write_sim_report_csv);
  emit("curves.csv", grace::write_curves_csv);
  if (f.details) emit("replicates.csv", grace::write_replicates_csv);

  json meta = f.common.settings();
  meta["mode"] = "simulate";
  meta["replicates"] = f.replicates;
  meta["failed_replicates"] = report.failed_replicates;
  meta["npe"] = f.npe;
  meta["r2"] = f.r2;
  meta["methods"] = f.methods;
  meta["n"] = f.n;
  meta["hubs"] = f.hubs;
  meta["p"] = design.p();
  meta["jitter"] = f.jitter;
  meta["seed"] = seed;
  meta["seed_generated"] = seed_generated;
  meta["threads"] = threads;
  write_json(dir / "run_meta.json", meta);
  return 0;
}

struct Figure1Flags {
  double k = 10.0;
  double t = 0.25;
  double beta1 = 1.0;
  double step = 0.1;
  std::string out = ".";
};

void write_panel(const fs::path& path, const std::vector<grace::Figure1Point>& points, const char* column) {
  auto out = open_output(path);
  out << "l,rho," << column << ",mark\n";
  for (const auto& pt : points) {
    out << grace::format_real(pt.l) << ',' << grace::format_real(pt.rho) << ','
        << (std::isfinite(pt.value) ? grace::format_real(pt.value) : std::string("-inf")) << ','
        << grace::to_char(pt.mark) << '\n';
  }
  finish(out, path);
}

int cmd_figure1(const Figure1Flags& f) {
  const auto grid = grace::figure1_grid(f.k, std::abs(f.beta1), f.t, grace::grid_values(-1.0, 1.0, f.step),
                                        grace::grid_values(-0.9, 0.9, f.step));
  const fs::path dir(f.out);
  fs::create_directories(dir);
  write_panel(dir / "figure1a.csv", grid.panel_a, "ratio");
  write_panel(dir / "figure1b.csv", grid.panel_b, "log_ratio");
  return 0;
}

struct GraphInfoFlags {
  std::string edges;
  std::string penalty = "laplacian";
  double jitter = 0.0;
};

int cmd_graph_info(const GraphInfoFlags& f) {
  const grace::WeightedGraph g = grace::read_edge_list(f.edges);
  const grace::PenaltyKind kind = parse_penalty(f.penalty);
  const grace::PenaltyMatrix L = kind == grace::PenaltyKind::laplacian ? grace::laplacian(g, f.jitter)
                                 : kind == grace::PenaltyKind::normalized_laplacian
                                     ? grace::normalized_laplacian(g, f.jitter)
                                     : grace::identity_penalty(g.num_nodes());
  const grace::Vector deg = g.degrees();
  const auto spectrum = grace::penalty_spectrum(L);
  json info{{"nodes", g.num_nodes()},
            {"edges", g.edges().size()},
            {"isolated_nodes", (deg.array() == 0.0).count()},
            {"max_degree", deg.maxCoeff()},
            {"penalty", f.penalty},
            {"jitter", f.jitter},
            {"smallest_eigenvalue", spectrum.values.minCoeff()},
            {"largest_eigenvalue", spectrum.values.maxCoeff()}};
  std::cout << info.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-constrained regression tests"};
  app.require_subcommand(1);

  TestFlags test;
  auto* test_cmd = app.add_subcommand("test", "test every covariate of one dataset");
  test_cmd->add_option("--x", test.x, "n x p design matrix (CSV)")->required()->check(CLI::ExistingFile);
  test_cmd->add_option("--y", test.y, "length-n response (CSV)")->required()->check(CLI::ExistingFile);
  test_cmd->add_option("--edges", test.edges, "edge list with a 'nodes <p>' header")->check(CLI::ExistingFile);
  test_cmd->add_option("--method", test.method, "test")
      ->check(CLI::IsMember({"grace", "gracer", "gracei", "ridge"}))
      ->capture_default_str();
  test_cmd->add_option("--penalty", test.penalty, "graph penalty")
      ->check(CLI::IsMember({"laplacian", "normalized", "identity"}))
      ->capture_default_str();
  test_cmd->add_option("--jitter", test.jitter, "added to the penalty diagonal (default 0.01 for grace, else 0)");
  add_common(test_cmd, test.common, "by");

  SimulateFlags sim;
  auto* sim_cmd = app.add_subcommand("simulate", "power and type-I error study on hub-satellite graphs");
  sim_cmd->add_option("--replicates", sim.replicates, "Monte-Carlo replicates")->capture_default_str();
  sim_cmd->add_option("--npe", sim.npe, "net perturbed edges")->delimiter(',')->capture_default_str();
  sim_cmd->add_option("--r2", sim.r2, "R^2 levels")->delimiter(',')->capture_default_str();
  sim_cmd->add_option("--methods", sim.methods, "tests to run")
      ->delimiter(',')
      ->check(CLI::IsMember({"grace", "gracer", "gracei", "ridge"}))
      ->capture_default_str();
  sim_cmd->add_option("--n", sim.n, "sample size")->capture_default_str();
  sim_cmd->add_option("--hubs", sim.hubs, "hub-satellite clusters of 10 covariates")->capture_default_str();
  sim_cmd->add_option("--jitter", sim.jitter, "diagonal jitter for grace")->capture_default_str();
  sim_cmd->add_flag("--details", sim.details, "also write per-replicate replicates.csv");
  add_common(sim_cmd, sim.common, "none");

  Figure1Flags fig;
  auto* fig_cmd = app.add_subcommand("figure1", "two-covariate power comparison grids");
  fig_cmd->add_option("--k", fig.k, "tuning ratio h/n")->capture_default_str();
  fig_cmd->add_option("--t", fig.t, "bound rate (log p / n)^(1/2 - xi)")->capture_default_str();
  fig_cmd->add_option("--beta1", fig.beta1, "|beta_1|")->capture_default_str();
  fig_cmd->add_option("--step", fig.step, "grid step for l and rho")->capture_default_str();
  fig_cmd->add_option("--out", fig.out, "output directory")->capture_default_str();

  GraphInfoFlags gi;
  auto* gi_cmd = app.add_subcommand("graph-info", "summarize an edge list");
  gi_cmd->add_option("--edges", gi.edges, "edge list")->required()->check(CLI::ExistingFile);
  gi_cmd->add_option("--penalty", gi.penalty, "penalty")
      ->check(CLI::IsMember({"laplacian", "normalized", "identity"}))
      ->capture_default_str();
  gi_cmd->add_option("--jitter", gi.jitter, "diagonal jitter")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*test_cmd) return cmd_test(test);
    if (*sim_cmd) return cmd_simulate(sim);
    if (*fig_cmd) return cmd_figure1(fig);
    if (*gi_cmd) return cmd_graph_info(gi);
  } catch (const std::exception& e) {
    std::cerr << error_line(e) << '\n';
    return 1;
  }
  return 1;
}

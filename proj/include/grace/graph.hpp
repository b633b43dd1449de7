#pragma once

// Weighted graphs and the penalty weight matrices built from them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "grace/core.hpp"
#include "grace/random.hpp"

namespace grace {

/// Undirected edge between 0-based nodes u < v.
struct Edge {
  Index u = 0;
  Index v = 0;
  double w = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected graph with nonnegative edge weights on nodes 0..p-1.
///
/// Edges are stored with u < v and sorted lexicographically, so two graphs
/// with the same edge set compare equal regardless of input order.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  WeightedGraph(Index num_nodes, std::vector<Edge> edges)
      : num_nodes_(num_nodes), edges_(std::move(edges)) {
    if (num_nodes_ < 1) throw GraphError("graph must have at least one node");
    for (auto& e : edges_) {
      if (e.u < 0 || e.u >= num_nodes_ || e.v < 0 || e.v >= num_nodes_) {
        throw GraphError("edge (" + std::to_string(e.u + 1) + ", " + std::to_string(e.v + 1) +
                         ") has a node index outside [1, " + std::to_string(num_nodes_) + "]");
      }
      if (e.u == e.v) throw GraphError("self-loop at node " + std::to_string(e.u + 1));
      if (!(e.w >= 0.0) || !std::isfinite(e.w)) {
        throw GraphError("edge (" + std::to_string(e.u + 1) + ", " + std::to_string(e.v + 1) +
                         ") has a negative or non-finite weight");
      }
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return std::pair(a.u, a.v) < std::pair(b.u, b.v); });
    for (std::size_t k = 1; k < edges_.size(); ++k) {
      if (edges_[k].u == edges_[k - 1].u && edges_[k].v == edges_[k - 1].v) {
        throw GraphError("duplicate edge (" + std::to_string(edges_[k].u + 1) + ", " +
                         std::to_string(edges_[k].v + 1) + ")");
      }
    }
  }

  Index num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  bool has_edge(Index a, Index b) const {
    if (a > b) std::swap(a, b);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair(a, b),
                               [](const Edge& e, const std::pair<Index, Index>& key) {
                                 return std::pair(e.u, e.v) < key;
                               });
    return it != edges_.end() && it->u == a && it->v == b;
  }

  /// Weighted degrees d_u.
  Vector degrees() const {
    Vector d = Vector::Zero(num_nodes_);
    for (const auto& e : edges_) {
      d(e.u) += e.w;
      d(e.v) += e.w;
    }
    return d;
  }

  friend bool operator==(const WeightedGraph&, const WeightedGraph&) = default;

 private:
  Index num_nodes_ = 0;
  std::vector<Edge> edges_;
};

enum class PenaltyKind { laplacian, normalized_laplacian, identity, custom };

inline const char* to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::laplacian: return "laplacian";
    case PenaltyKind::normalized_laplacian: return "normalized_laplacian";
    case PenaltyKind::identity: return "identity";
    case PenaltyKind::custom: return "custom";
  }
  return "unknown";
}

/// Dense symmetric p x p penalty weight matrix with its provenance.
///
/// `entries()` already includes the diagonal jitter.
class PenaltyMatrix {
 public:
  PenaltyMatrix(Matrix entries, PenaltyKind kind, double jitter)
      : entries_(std::move(entries)), kind_(kind), jitter_(jitter) {
    detail::require(entries_.rows() == entries_.cols() && entries_.rows() > 0,
                    "penalty matrix must be square and nonempty");
    detail::require(jitter_ >= 0.0 && std::isfinite(jitter_), "jitter must be nonnegative");
  }

  Index dim() const noexcept { return entries_.rows(); }
  const Matrix& entries() const noexcept { return entries_; }
  PenaltyKind kind() const noexcept { return kind_; }
  double jitter() const noexcept { return jitter_; }

 private:
  Matrix entries_;
  PenaltyKind kind_;
  double jitter_;
};

using PenaltyPtr = std::shared_ptr<const PenaltyMatrix>;

/// Graph Laplacian L(u,u) = d_u + jitter, L(u,v) = -w(u,v).
inline PenaltyMatrix laplacian(const WeightedGraph& g, double jitter = 0.0) {
  const Index p = g.num_nodes();
  Matrix L = Matrix::Zero(p, p);
  for (const auto& e : g.edges()) {
    L(e.u, e.v) -= e.w;
    L(e.v, e.u) -= e.w;
    L(e.u, e.u) += e.w;
    L(e.v, e.v) += e.w;
  }
  L.diagonal().array() += jitter;
  return PenaltyMatrix(std::move(L), PenaltyKind::laplacian, jitter);
}

/// D^{-1/2} L D^{-1/2}; rows and columns of isolated nodes are zero before
/// the jitter is added.
inline PenaltyMatrix normalized_laplacian(const WeightedGraph& g, double jitter = 0.0) {
  const Index p = g.num_nodes();
  const Vector d = g.degrees();
  Vector s(p);
  for (Index u = 0; u < p; ++u) s(u) = d(u) > 0.0 ? 1.0 / std::sqrt(d(u)) : 0.0;

  Matrix L = Matrix::Zero(p, p);
  for (Index u = 0; u < p; ++u) L(u, u) = d(u) > 0.0 ? 1.0 : 0.0;
  for (const auto& e : g.edges()) {
    const double value = -e.w * s(e.u) * s(e.v);
    L(e.u, e.v) += value;
    L(e.v, e.u) += value;
  }
  L.diagonal().array() += jitter;
  return PenaltyMatrix(std::move(L), PenaltyKind::normalized_laplacian, jitter);
}

inline PenaltyMatrix identity_penalty(Index p) {
  detail::require(p >= 1, "identity_penalty: p must be positive");
  return PenaltyMatrix(Matrix::Identity(p, p), PenaltyKind::identity, 0.0);
}

/// User kernel. Only symmetry is checked; positive semidefiniteness is the
/// caller's responsibility.
inline PenaltyMatrix custom_penalty(Matrix entries, double jitter = 0.0) {
  detail::require(entries.rows() == entries.cols(), "custom penalty must be square");
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  if ((entries - entries.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument("custom penalty matrix is not symmetric");
  }
  Matrix sym = 0.5 * (entries + entries.transpose());
  sym.diagonal().array() += jitter;
  return PenaltyMatrix(std::move(sym), PenaltyKind::custom, jitter);
}

/// Removes |npe| edges (npe < 0) or adds npe unit-weight edges (npe > 0),
/// sampled uniformly without replacement. Deterministic in `seed`.
inline WeightedGraph perturb_edges(const WeightedGraph& g, std::int64_t npe, std::uint64_t seed) {
  if (npe == 0) return g;
  Rng rng(seed);
  const auto& edges = g.edges();
  const Index p = g.num_nodes();

  if (npe < 0) {
    const auto remove = static_cast<std::size_t>(-npe);
    if (remove > edges.size()) {
      throw GraphError("cannot remove " + std::to_string(remove) + " edges from a graph with " +
                       std::to_string(edges.size()));
    }
    std::vector<std::size_t> order(edges.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t k = 0; k < remove; ++k) {
      const auto j = k + rng.below(order.size() - k);
      std::swap(order[k], order[j]);
    }
    std::vector<Edge> kept;
    kept.reserve(edges.size() - remove);
    for (std::size_t k = remove; k < order.size(); ++k) kept.push_back(edges[order[k]]);
    return WeightedGraph(p, std::move(kept));
  }

  const auto add = static_cast<std::uint64_t>(npe);
  const auto pairs = static_cast<std::uint64_t>(p) * static_cast<std::uint64_t>(p - 1) / 2;
  const std::uint64_t absent = pairs - edges.size();
  if (add > absent) {
    throw GraphError("cannot add " + std::to_string(add) + " edges: only " + std::to_string(absent) +
                     " node pairs are unconnected");
  }

  std::vector<Edge> out = edges;
  out.reserve(edges.size() + add);
  if (2 * add > absent) {
    std::vector<Edge> candidates;
    candidates.reserve(absent);
    for (Index a = 0; a < p; ++a) {
      for (Index b = a + 1; b < p; ++b) {
        if (!g.has_edge(a, b)) candidates.push_back({a, b, 1.0});
      }
    }
    for (std::uint64_t k = 0; k < add; ++k) {
      const auto j = k + rng.below(candidates.size() - k);
      std::swap(candidates[k], candidates[j]);
      out.push_back(candidates[k]);
    }
  } else {
    std::set<std::pair<Index, Index>> chosen;
    while (chosen.size() < add) {
      auto a = static_cast<Index>(rng.below(p));
      auto b = static_cast<Index>(rng.below(p));
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      if (g.has_edge(a, b) || !chosen.emplace(a, b).second) continue;
      out.push_back({a, b, 1.0});
    }
  }
  return WeightedGraph(p, std::move(out));
}

/// Spectral norm of a symmetric matrix.
inline double symmetric_spectral_norm(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// ||a - b||_2 / ||b||_2.
inline double spectral_distance(const PenaltyMatrix& a, const PenaltyMatrix& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("spectral_distance: dimension mismatch");
  const double denom = symmetric_spectral_norm(b.entries());
  if (denom == 0.0) throw InvalidArgument("spectral_distance: reference matrix is zero");
  return symmetric_spectral_norm(a.entries() - b.entries()) / denom;
}

}  // namespace grace

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "relsum/hetero_graph.hpp"

namespace relsum {

struct Transition {
  std::uint32_t to;
  double probability;
};

/// Row-stochastic transition structure for one EUD: each out-arc carries
/// eud[type] * base_weight, normalised over the source's arcs. Parallel arcs
/// to the same node are merged. Rows with zero mass are empty (dangling).
class TransitionTable {
 public:
  TransitionTable(const HeteroGraph& graph, const EudVector& eud);

  std::span<const Transition> row(std::size_t index) const { return rows_.at(index); }
  bool dangling(std::size_t index) const { return rows_.at(index).empty(); }
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<std::vector<Transition>> rows_;
};

/// Outgoing transition distribution of one node, keyed by target node.
/// Throws Error(unknown_node) when `from` is not in the graph.
std::vector<std::pair<NodeId, double>> transition_probability(const HeteroGraph& graph,
                                                              const EudVector& eud,
                                                              const NodeId& from);

struct PageRankOptions {
  double damping = 0.85;
  double tolerance = 1e-10;  // on the L1 change between iterations
  std::size_t max_iterations = 200;
};

struct ScoreVector {
  std::vector<double> values;  // aligned with HeteroGraph node indices
  std::size_t iterations = 0;
  bool converged = false;
};

/// Fixed point of s = (1-d) * prior + d * (P^T s + dangling(s) * prior).
/// `prior` must be aligned with the graph's node indices and sum to one.
ScoreVector pagerank_with_priors(const HeteroGraph& graph, const EudVector& eud,
                                 std::span<const double> prior, const PageRankOptions& options = {});
ScoreVector pagerank_with_priors(const HeteroGraph& graph, const TransitionTable& transitions,
                                 std::span<const double> prior, const PageRankOptions& options = {});

struct Recommendation {
  std::vector<NodeId> papers;
  bool truncated = false;  // fewer than n other papers exist
};

/// Papers other than the target ranked by PageRank with all prior mass on
/// the target. Scores are compared on a 1e-12 grid so that values equal up
/// to rounding tie and fall back to ascending id.
Recommendation recommend_top_n(const HeteroGraph& graph, const EudVector& eud, const NodeId& target,
                               std::size_t n, const PageRankOptions& options = {});
Recommendation recommend_top_n(const HeteroGraph& graph, const TransitionTable& transitions,
                               const NodeId& target, std::size_t n,
                               const PageRankOptions& options = {});

}  // namespace relsum

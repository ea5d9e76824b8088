#include "relsum/pagerank.hpp"

#include <algorithm>
#include <cmath>

#include "relsum/error.hpp"

namespace relsum {

TransitionTable::TransitionTable(const HeteroGraph& graph, const EudVector& eud)
    : rows_(graph.node_count()) {
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    const auto arcs = graph.out_arcs(i);
    double z = 0.0;
    for (const auto& a : arcs) z += eud[a.type] * a.base_weight;
    if (!(z > 0.0)) continue;
    auto& row = rows_[i];
    // Arcs are sorted by target, so parallel arcs are consecutive.
    for (const auto& a : arcs) {
      const double mass = eud[a.type] * a.base_weight;
      if (!(mass > 0.0)) continue;
      if (!row.empty() && row.back().to == a.to) {
        row.back().probability += mass;
      } else {
        row.push_back({a.to, mass});
      }
    }
    for (auto& t : row) t.probability /= z;
  }
}

std::vector<std::pair<NodeId, double>> transition_probability(const HeteroGraph& graph,
                                                              const EudVector& eud,
                                                              const NodeId& from) {
  const std::size_t idx = graph.index_of(from);
  const auto arcs = graph.out_arcs(idx);
  double z = 0.0;
  for (const auto& a : arcs) z += eud[a.type] * a.base_weight;
  std::vector<std::pair<NodeId, double>> out;
  if (!(z > 0.0)) return out;
  for (const auto& a : arcs) {
    const double mass = eud[a.type] * a.base_weight;
    if (!(mass > 0.0)) continue;
    if (!out.empty() && out.back().first == graph.node(a.to)) {
      out.back().second += mass;
    } else {
      out.emplace_back(graph.node(a.to), mass);
    }
  }
  for (auto& [node, p] : out) p /= z;
  return out;
}

ScoreVector pagerank_with_priors(const HeteroGraph& graph, const EudVector& eud,
                                 std::span<const double> prior, const PageRankOptions& options) {
  return pagerank_with_priors(graph, TransitionTable(graph, eud), prior, options);
}

ScoreVector pagerank_with_priors(const HeteroGraph& graph, const TransitionTable& transitions,
                                 std::span<const double> prior, const PageRankOptions& options) {
  const std::size_t n = graph.node_count();
  if (prior.size() != n) {
    throw Error(ErrorCategory::dimension_mismatch, "prior length differs from node count");
  }
  if (!(options.damping >= 0.0 && options.damping < 1.0)) {
    throw Error(ErrorCategory::invalid_argument, "damping must lie in [0,1)");
  }
  const double d = options.damping;

  ScoreVector result;
  std::vector<double> score(prior.begin(), prior.end());
  std::vector<double> next(n);
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    double dangling = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (transitions.dangling(u)) dangling += score[u];
    }
    for (std::size_t v = 0; v < n; ++v) next[v] = ((1.0 - d) + d * dangling) * prior[v];
    for (std::size_t u = 0; u < n; ++u) {
      const double su = d * score[u];
      if (su == 0.0) continue;
      for (const auto& t : transitions.row(u)) next[t.to] += su * t.probability;
    }
    double change = 0.0;
    for (std::size_t v = 0; v < n; ++v) change += std::abs(next[v] - score[v]);
    score.swap(next);
    result.iterations = iter + 1;
    if (change < options.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.values = std::move(score);
  return result;
}

Recommendation recommend_top_n(const HeteroGraph& graph, const EudVector& eud, const NodeId& target,
                               std::size_t n, const PageRankOptions& options) {
  return recommend_top_n(graph, TransitionTable(graph, eud), target, n, options);
}

Recommendation recommend_top_n(const HeteroGraph& graph, const TransitionTable& transitions,
                               const NodeId& target, std::size_t n,
                               const PageRankOptions& options) {
  const std::size_t t = graph.index_of(target);
  if (target.kind != NodeKind::paper) {
    throw Error(ErrorCategory::invalid_argument, "recommendation target must be a paper");
  }
  std::vector<double> prior(graph.node_count(), 0.0);
  prior[t] = 1.0;
  const auto scores = pagerank_with_priors(graph, transitions, prior, options);

  struct Ranked {
    long long key;
    std::size_t index;
  };
  std::vector<Ranked> ranked;
  for (std::size_t i : graph.paper_indices()) {
    if (i == t) continue;
    ranked.push_back({std::llround(scores.values[i] * 1e12), i});
  }
  // Node indices follow (kind, key) order, so index order is id order among papers.
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    return a.key != b.key ? a.key > b.key : a.index < b.index;
  });

  Recommendation rec;
  rec.truncated = ranked.size() < n;
  const std::size_t take = std::min(n, ranked.size());
  rec.papers.reserve(take);
  for (std::size_t k = 0; k < take; ++k) rec.papers.push_back(graph.node(ranked[k].index));
  return rec;
}

}  // namespace relsum

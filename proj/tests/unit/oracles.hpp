#pragma once

// Independent reference implementations used only by tests.

#include <Eigen/Dense>
#include <vector>

#include "relsum/hetero_graph.hpp"

namespace oracle {

// Dense row-stochastic matrix built straight from the edge list.
inline Eigen::MatrixXd transition_matrix(const relsum::HeteroGraph& g, const relsum::EudVector& eud) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) {
    p(static_cast<Eigen::Index>(g.index_of(e.from)), static_cast<Eigen::Index>(g.index_of(e.to))) +=
        eud[e.type] * e.base_weight;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = p.row(i).sum();
    if (z > 0) p.row(i) /= z;
  }
  return p;
}

// Solves s = (1-d) r + d (P^T s + (dangling . s) r) exactly.
inline std::vector<double> pagerank(const relsum::HeteroGraph& g, const relsum::EudVector& eud,
                                    const std::vector<double>& prior, double d) {
  const Eigen::MatrixXd p = transition_matrix(g, eud);
  const auto n = p.rows();
  Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(prior.data(), n);
  Eigen::VectorXd dangling = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) dangling(i) = p.row(i).sum() == 0 ? 1.0 : 0.0;
  const Eigen::MatrixXd m = p.transpose() + r * dangling.transpose();
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - d * m;
  const Eigen::VectorXd s = a.fullPivLu().solve((1 - d) * r);
  return {s.data(), s.data() + n};
}

}  // namespace oracle

#include <gtest/gtest.h>

#include <cmath>

#include "relsum/embedding.hpp"
#include "relsum/error.hpp"

using namespace relsum;

namespace {

NodeId p(const std::string& k) { return NodeId::paper(k); }

Eigen::VectorXd random_vector(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.uniform(-0.5, 0.5);
  return v;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

HeteroGraph two_cliques() {
  std::vector<NodeId> nodes;
  std::vector<TypedEdge> edges;
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 4; ++i) nodes.push_back(p("c" + std::to_string(c) + "n" + std::to_string(i)));
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) edges.push_back({nodes[c * 4 + i], nodes[c * 4 + j], edge_type::cites, 1});
  return HeteroGraph::with_uniform_weights(nodes, edges);
}

}  // namespace

TEST(Walks, IsolatedNodeHasLengthOne) {
  const HeteroGraph g = HeteroGraph::from_edges({p("solo")}, {});
  Rng rng(1);
  const auto walks = generate_walks(g, EudVector::uniform(), {3, 10, 1, 1}, rng);
  ASSERT_EQ(walks.size(), 3u);
  for (const auto& w : walks) EXPECT_EQ(w.nodes, (std::vector<std::uint32_t>{0}));
}

TEST(Walks, TwoNodeAlternation) {
  const std::vector<NodeId> n = {p("a"), p("b")};
  const HeteroGraph g = HeteroGraph::with_uniform_weights(n, {{n[0], n[1], 1, 1}, {n[1], n[0], 1, 1}});
  Rng rng(2);
  const auto walks = generate_walks(g, EudVector::uniform(), {1, 4, 0.5, 2.0}, rng);
  ASSERT_EQ(walks.size(), 2u);
  EXPECT_EQ(walks[0].nodes, (std::vector<std::uint32_t>{0, 1, 0, 1}));
  EXPECT_EQ(walks[1].nodes, (std::vector<std::uint32_t>{1, 0, 1, 0}));
}

TEST(Walks, UnbiasedStepEqualsTransitionRow) {
  const HeteroGraph g = two_cliques();
  EudVector eud = EudVector::uniform();
  const TransitionTable t(g, eud);
  const auto w = walk_step_weights(g, t, 0, 1, {1, 5, 1.0, 1.0});
  const auto row = t.row(1);
  ASSERT_EQ(w.size(), row.size());
  double z = 0;
  for (double x : w) z += x;
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(w[i] / z, row[i].probability, 1e-15);
}

TEST(Walks, ReturnAndInOutBias) {
  // a -> b, b -> {a, c, d}, a -> c. From b having come from a: a gets 1/p, c (adjacent to a) 1, d 1/q.
  const std::vector<NodeId> n = {p("a"), p("b"), p("c"), p("d")};
  const HeteroGraph g = HeteroGraph::with_uniform_weights(
      n, {{n[0], n[1], 1, 1}, {n[0], n[2], 1, 1}, {n[1], n[0], 1, 1}, {n[1], n[2], 1, 1}, {n[1], n[3], 1, 1}});
  const TransitionTable t(g, EudVector::uniform());
  const auto w = walk_step_weights(g, t, 0, 1, {1, 5, 2.0, 4.0});
  ASSERT_EQ(w.size(), 3u);
  double z = 0;
  for (double x : w) z += x;
  const double third = 1.0 / 3.0;
  const double raw[3] = {third / 2.0, third, third / 4.0};
  const double rz = raw[0] + raw[1] + raw[2];
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(w[i] / z, raw[i] / rz, 1e-12);
}

TEST(Walks, OnlyTraverseEdges) {
  const HeteroGraph g = two_cliques();
  Rng rng(3);
  for (const auto& w : generate_walks(g, EudVector::uniform(), {2, 12, 0.5, 2}, rng))
    for (std::size_t i = 1; i < w.nodes.size(); ++i) {
      bool found = false;
      for (const auto& a : g.out_arcs(w.nodes[i - 1])) found |= a.to == w.nodes[i];
      EXPECT_TRUE(found);
    }
}

TEST(Sgns, GradientsMatchFiniteDifferences) {
  Rng rng(4);
  const int dim = 8;
  const Eigen::VectorXd v = random_vector(rng, dim), u = random_vector(rng, dim);
  std::vector<Eigen::VectorXd> neg = {random_vector(rng, dim), random_vector(rng, dim), random_vector(rng, dim)};
  const SgnsGradients g = sgns_gradients(v, u, neg);
  const double h = 1e-5;
  auto check = [&](const Eigen::VectorXd& analytic, auto perturb) {
    for (int i = 0; i < dim; ++i) {
      const double numeric = (perturb(i, h) - perturb(i, -h)) / (2 * h);
      const double denom = std::max({std::abs(numeric), std::abs(analytic(i)), 1e-8});
      EXPECT_LT(std::abs(numeric - analytic(i)) / denom, 1e-4);
    }
  };
  check(g.center, [&](int i, double e) {
    Eigen::VectorXd x = v;
    x(i) += e;
    return sgns_loss(x, u, neg);
  });
  check(g.context, [&](int i, double e) {
    Eigen::VectorXd x = u;
    x(i) += e;
    return sgns_loss(v, x, neg);
  });
  for (std::size_t k = 0; k < neg.size(); ++k)
    check(g.negatives[k], [&](int i, double e) {
      auto n2 = neg;
      n2[k](i) += e;
      return sgns_loss(v, u, n2);
    });
}

TEST(Sgns, SmallStepDecreasesLoss) {
  Rng rng(5);
  Eigen::VectorXd v = random_vector(rng, 8), u = random_vector(rng, 8);
  std::vector<Eigen::VectorXd> neg = {random_vector(rng, 8), random_vector(rng, 8)};
  const double before = sgns_loss(v, u, neg);
  const SgnsGradients g = sgns_gradients(v, u, neg);
  v -= 0.01 * g.center;
  u -= 0.01 * g.context;
  for (std::size_t k = 0; k < neg.size(); ++k) neg[k] -= 0.01 * g.negatives[k];
  EXPECT_LT(sgns_loss(v, u, neg), before);
}

TEST(SkipGram, SingleTokenCorpus) {
  Rng rng(6);
  const std::vector<std::vector<std::string>> seqs = {{"x", "x", "x", "x"}};
  SkipGramOptions o;
  o.dim = 6;
  o.epochs = 1;
  const EmbeddingTable t = train_skipgram(seqs, o, rng);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(t.at("x").size(), 6u);
  EXPECT_FALSE(t.contains("y"));
}

TEST(EmbedNodes, CliquesSeparate) {
  const HeteroGraph g = two_cliques();
  NodeEmbeddingOptions o;
  o.walks = {20, 20, 1, 1};
  o.skipgram.dim = 16;
  o.skipgram.window = 3;
  o.skipgram.epochs = 10;
  o.seed = 11;
  const EmbeddingTable t = embed_nodes(g, EudVector::uniform(), o);
  double intra = 0, inter = 0;
  int ni = 0, nx = 0;
  for (std::size_t a = 0; a < 8; ++a)
    for (std::size_t b = a + 1; b < 8; ++b) {
      const double c = cosine(t.at(g.node(a).label()), t.at(g.node(b).label()));
      if ((a < 4) == (b < 4)) {
        intra += c;
        ++ni;
      } else {
        inter += c;
        ++nx;
      }
    }
  EXPECT_GT(intra / ni, inter / nx);
}

TEST(EmbedNodes, CoverageDimAndReproducibility) {
  const std::vector<NodeId> n = {p("a"), p("b"), NodeId::author("x"), NodeId::venue("v")};
  const HeteroGraph g = HeteroGraph::with_uniform_weights(
      n, {{n[0], n[1], 1, 1}, {n[2], n[0], 3, 1}, {n[0], n[3], 8, 1}, {n[3], n[0], 9, 1}});
  NodeEmbeddingOptions o;
  o.walks = {3, 6, 1, 1};
  o.skipgram.dim = 12;
  o.skipgram.epochs = 2;
  o.seed = 5;
  const EmbeddingTable a = embed_nodes(g, EudVector::uniform(), o);
  EXPECT_EQ(a.size(), g.node_count());
  EXPECT_EQ(a.dim(), 12u);
  for (const auto& node : g.nodes()) EXPECT_TRUE(a.contains(node.label()));
  EXPECT_EQ(a, embed_nodes(g, EudVector::uniform(), o));
}

TEST(EmbeddingTable, FileRoundTripAndValidation) {
  EmbeddingTable t(3);
  t.set("paper:a", {0.1, -2.5, 1.0 / 3.0});
  t.set("author:b", {1e-9, 0, 7});
  EXPECT_EQ(parse_embeddings(format_embeddings(t)).size(), 2u);
  EXPECT_EQ(format_embeddings(parse_embeddings(format_embeddings(t))), format_embeddings(t));
  EXPECT_THROW(t.set("x", {1, 2}), Error);
  EXPECT_THROW(t.set("x", {1, 2, NAN}), Error);
  EXPECT_THROW(t.at("missing"), Error);
}

#include <benchmark/benchmark.h>

#include "relsum/embedding.hpp"
#include "relsum/pagerank.hpp"
#include "relsum/summarizer.hpp"
#include "relsum/synthetic.hpp"

using namespace relsum;

namespace {

const HeteroGraph& synthetic_graph() {
  static const HeteroGraph g = [] {
    Corpus c;
    for (auto& r : generate_synthetic_corpus()) c.add(std::move(r));
    c.resolve_references();
    return build_graph(c, 3000);
  }();
  return g;
}

void BM_PageRankWithPriors(benchmark::State& state) {
  const HeteroGraph& g = synthetic_graph();
  const TransitionTable t(g, EudVector::uniform());
  std::vector<double> prior(g.node_count(), 0.0);
  prior[g.paper_indices().front()] = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(pagerank_with_priors(g, t, prior));
  state.counters["nodes"] = static_cast<double>(g.node_count());
}
BENCHMARK(BM_PageRankWithPriors);

void BM_SummarizerForwardBackward(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  std::vector<std::string> vocab = {std::string(kUnknownToken)};
  for (int i = 1; i < 200; ++i) vocab.push_back("w" + std::to_string(i));
  const SummarizerModel model = SummarizerModel::initialize(dim, {3, 4, 5}, vocab, rng);
  SummarizerInput input;
  std::vector<int> labels;
  for (int r = 0; r < 8; ++r) {
    DocumentInput doc{"r" + std::to_string(r), {}};
    for (int s = 0; s < 10; ++s) {
      std::vector<int> ids;
      for (int k = 0; k < 20; ++k) ids.push_back(static_cast<int>(rng.below(200)));
      doc.sentences.push_back(std::move(ids));
      labels.push_back(s == 0);
    }
    input.references.push_back(std::move(doc));
    input.reference_nodes.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)));
  }
  input.target = {"t", {input.references[0].sentences[0]}};
  input.target_node = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  SummarizerModel grads = model.zeros_like();
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_gradients(model, AttentionConfig::all(), input, labels, grads));
  state.counters["sentences"] = static_cast<double>(labels.size());
}
BENCHMARK(BM_SummarizerForwardBackward)->Arg(16)->Arg(64);

void BM_SkipGram(benchmark::State& state) {
  Rng walk_rng(2);
  const auto walks = generate_walks(synthetic_graph(), EudVector::uniform(), {2, 20, 1, 1}, walk_rng);
  std::vector<std::vector<std::string>> seqs;
  for (const auto& w : walks) {
    std::vector<std::string> s;
    for (auto n : w.nodes) s.push_back(synthetic_graph().node(n).label());
    seqs.push_back(std::move(s));
  }
  SkipGramOptions o;
  o.dim = 16;
  o.epochs = 1;
  for (auto _ : state) {
    Rng rng(3);
    benchmark::DoNotOptimize(train_skipgram(seqs, o, rng));
  }
}
BENCHMARK(BM_SkipGram);

}  // namespace
BENCHMARK_MAIN();

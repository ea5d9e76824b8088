// One line per criterion: "PASS <n> <name> (<detail>)" or "FAIL ...".

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "../unit/oracles.hpp"
#include "relsum/checksum.hpp"
#include "relsum/corpus.hpp"
#include "relsum/embedding.hpp"
#include "relsum/evolution.hpp"
#include "relsum/pagerank.hpp"
#include "relsum/pipeline.hpp"
#include "relsum/rouge.hpp"
#include "relsum/summarizer.hpp"
#include "relsum/synthetic.hpp"
#include "relsum/text.hpp"

using namespace relsum;
namespace fs = std::filesystem;

namespace {

// Tolerances and time limits.
constexpr double kRougeTol = 1e-9;
constexpr double kPageRankL1 = 1e-8;
constexpr double kMassTol = 1e-9;
constexpr double kGradRelErr = 1e-4;
constexpr double kOracleRatio = 0.63;
constexpr double kLimit1 = 1, kLimit2 = 5, kLimit3 = 5, kLimit4 = 120, kLimit5 = 60, kLimit6 = 1, kLimit7 = 30,
                 kLimit8 = 900, kLimit9 = 60, kLimit10 = 2 * kLimit8;

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void report(int n, const char* name, double limit, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = o.ok && secs < limit;
  if (!ok) ++failures;
  std::printf("%s %d %s (%s; %.2fs of %.0fs)\n", ok ? "PASS" : "FAIL", n, name, o.detail.c_str(), secs, limit);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

// ---- 1 ----

Outcome rouge_fixtures() {
  struct Fixture {
    const char* cand;
    const char* ref;
    double r1, p1, r2, p2, rl, pl;
    std::optional<std::size_t> limit;
  };
  const std::vector<Fixture> fixtures = {
      {"the cat sat", "the cat ran", 2. / 3, 2. / 3, 1. / 2, 1. / 2, 2. / 3, 2. / 3, {}},
      {"a b c d", "a b c d", 1, 1, 1, 1, 1, 1, {}},
      {"a b c d", "a c b d", 1, 1, 0, 0, 3. / 4, 3. / 4, {}},
      {"x y z", "p q r", 0, 0, 0, 0, 0, 0, {}},
      {"a a a", "a b", 1. / 2, 1. / 3, 0, 0, 1. / 2, 1. / 3, {}},
      {"the cat sat on the mat", "the cat is on the mat", 5. / 6, 5. / 6, 3. / 5, 3. / 5, 5. / 6, 5. / 6, {}},
      {"beta", "alpha beta gamma", 1. / 2, 1, 0, 0, 1. / 2, 1, 10},
      {"x y", "y x", 1, 1, 0, 0, 1. / 2, 1. / 2, {}},
      {"a b a b", "a b a", 1, 3. / 4, 1, 2. / 3, 1, 3. / 4, {}},
      {"w1 w2 w3", "w3 w2 w1 w0", 3. / 4, 1, 0, 0, 1. / 4, 1. / 3, {}},
  };
  auto f1 = [](double r, double p) { return r + p > 0 ? 2 * r * p / (r + p) : 0.0; };
  double worst = 0;
  for (const auto& f : fixtures) {
    const Tokens c = tokenize(f.cand), r = tokenize(f.ref);
    const RougeScore s1 = rouge_n(c, r, 1, f.limit), s2 = rouge_n(c, r, 2, f.limit), sl = rouge_l(c, r, f.limit);
    for (auto [got, want] : std::initializer_list<std::pair<double, double>>{
             {s1.recall, f.r1}, {s1.precision, f.p1}, {s1.f1, f1(f.r1, f.p1)},
             {s2.recall, f.r2}, {s2.precision, f.p2}, {s2.f1, f1(f.r2, f.p2)},
             {sl.recall, f.rl}, {sl.precision, f.pl}, {sl.f1, f1(f.rl, f.pl)}})
      worst = std::max(worst, std::abs(got - want));
  }
  return {worst <= kRougeTol, fmt("10 fixtures, max error %.3g", worst)};
}

// ---- 2, 3 ----

HeteroGraph random_graph(Rng& rng, std::size_t papers, std::size_t others, double density) {
  std::vector<NodeId> nodes;
  for (std::size_t i = 0; i < papers; ++i) nodes.push_back(NodeId::paper("p" + std::to_string(i)));
  for (std::size_t i = 0; i < others; ++i) nodes.push_back(NodeId::author("a" + std::to_string(i)));
  std::vector<TypedEdge> edges;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = 0; j < nodes.size(); ++j)
      for (int t = 1; t <= kEdgeTypeCount; ++t)
        if (i != j && rng.uniform01() < density / kEdgeTypeCount)
          edges.push_back({nodes[i], nodes[j], t, 0.05 + 0.95 * rng.uniform01()});
  return HeteroGraph::from_edges(nodes, edges);
}

EudVector random_eud(Rng& rng) {
  EudVector e;
  for (auto& v : e.values) v = rng.uniform01();
  return e;
}

Outcome pagerank_oracle() {
  Rng rng(2024);
  double worst = 0, worst_mass = 0;
  for (int g = 0; g < 20; ++g) {
    const std::size_t n = 1 + rng.below(6);
    const std::size_t papers = 1 + rng.below(n);
    const HeteroGraph graph = random_graph(rng, papers, n - papers, 0.5);
    const EudVector eud = random_eud(rng);
    std::vector<double> prior(n);
    for (auto& x : prior) x = rng.uniform01() + 0.01;
    const double z = std::accumulate(prior.begin(), prior.end(), 0.0);
    for (auto& x : prior) x /= z;
    const auto got = pagerank_with_priors(graph, eud, prior);
    const auto want = oracle::pagerank(graph, eud, prior, 0.85);
    double l1 = 0;
    for (std::size_t i = 0; i < n; ++i) l1 += std::abs(got.values[i] - want[i]);
    worst = std::max(worst, l1);
    worst_mass = std::max(worst_mass, std::abs(std::accumulate(got.values.begin(), got.values.end(), 0.0) - 1.0));
  }
  return {worst <= kPageRankL1 && worst_mass <= kMassTol,
          fmt("max L1 %.3g, max |sum-1| %.3g", worst, worst_mass)};
}

Outcome eud_scaling() {
  Rng rng(37);
  std::size_t rankings = 0;
  for (int g = 0; g < 10; ++g) {
    const HeteroGraph graph = random_graph(rng, 12, 4, 0.4);
    const EudVector eud = random_eud(rng);
    EudVector scaled = eud;
    for (auto& v : scaled.values) v *= 3.7;
    for (std::size_t i : graph.paper_indices()) {
      const auto a = recommend_top_n(graph, eud, graph.node(i), 5);
      const auto b = recommend_top_n(graph, scaled, graph.node(i), 5);
      if (a.papers != b.papers) return {false, "ranking differs for " + graph.node(i).label()};
      ++rankings;
    }
  }
  return {true, std::to_string(rankings) + " rankings identical"};
}

// ---- 4 ----

Outcome de_recovery() {
  const auto inst = planted_eud_instance();
  EvolutionConfig cfg;
  cfg.seed = 0;
  cfg.population_size = 24;
  cfg.generations = 100;
  const auto r = evolve(inst.targets, cfg);
  const double uniform = fitness(EudVector::uniform(), inst.targets);
  bool monotone = true;
  for (std::size_t i = 1; i < r.best_fitness_trace.size(); ++i)
    monotone &= r.best_fitness_trace[i] >= r.best_fitness_trace[i - 1];
  return {*r.best.fitness >= uniform && monotone,
          fmt("best %.6g vs uniform %.6g", *r.best.fitness, uniform) + (monotone ? ", trace monotone" : ", trace decreases")};
}

// ---- 5 ----

Outcome gradient_check() {
  Rng rng(5);
  std::vector<std::string> vocab = {std::string(kUnknownToken)};
  for (int i = 1; i < 12; ++i) vocab.push_back("w" + std::to_string(i));
  SummarizerModel model = SummarizerModel::initialize(8, {2, 3}, vocab, rng);
  for (auto& t : model.tensors())
    for (Eigen::Index k = 0; k < t.value->size(); ++k) t.value->data()[k] = rng.uniform(-0.6, 0.6);
  auto sentence = [&](std::size_t len) {
    std::vector<int> ids;
    for (std::size_t i = 0; i < len; ++i) ids.push_back(static_cast<int>(rng.below(12)));
    return ids;
  };
  auto random_vec = [&] {
    Eigen::VectorXd v(8);
    for (int i = 0; i < 8; ++i) v(i) = rng.uniform(-1, 1);
    return v;
  };
  SummarizerInput input;
  input.references = {{"r1", {sentence(5), sentence(7), sentence(6)}}, {"r2", {sentence(4), sentence(8)}}};
  input.target = {"t", {sentence(6), sentence(5)}};
  input.target_node = random_vec();
  input.reference_nodes = {random_vec(), random_vec()};
  const std::vector<int> labels = {1, 0, 0, 1, 0};
  const AttentionConfig cfg = AttentionConfig::all();

  SummarizerModel grads = model.zeros_like();
  loss_and_gradients(model, cfg, input, labels, grads);
  auto values = model.tensors();
  const auto analytic = std::as_const(grads).tensors();
  double worst = 0;
  std::string worst_name;
  const double h = 1e-5;
  for (std::size_t t = 0; t < values.size(); ++t) {
    Eigen::MatrixXd& v = *values[t].value;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      const double saved = v.data()[k];
      v.data()[k] = saved + h;
      const double up = forward_loss(model, cfg, input, labels);
      v.data()[k] = saved - h;
      const double down = forward_loss(model, cfg, input, labels);
      v.data()[k] = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[t].value->data()[k];
      const double scale = std::max(std::abs(a), std::abs(numeric));
      const double err = scale > 1e-6 ? std::abs(a - numeric) / scale : std::abs(a - numeric);
      if (err > worst) {
        worst = err;
        worst_name = values[t].name;
      }
    }
  }
  return {worst < kGradRelErr,
          std::to_string(values.size()) + " tensors" + fmt(", max rel err %.3g in ", worst) + worst_name};
}

// ---- 6 ----

Outcome cnn_shape_law() {
  Rng rng(6);
  const SummarizerModel m = SummarizerModel::initialize(4, {3, 4, 5}, {std::string(kUnknownToken), "x"}, rng);
  for (std::size_t p : {7u, 20u, 80u}) {
    const CnnTrace t = cnn_forward(m, std::vector<int>(p, 1));
    for (std::size_t w = 0; w < 3; ++w)
      if (static_cast<std::size_t>(t.feature_maps[w].cols()) != p - m.widths[w] + 1)
        return {false, "p=" + std::to_string(p) + " q=" + std::to_string(m.widths[w])};
  }
  return {true, "9 (p, q) pairs give p-q+1 maps"};
}

// ---- 7 ----

Outcome clique_embedding() {
  std::vector<NodeId> nodes;
  std::vector<TypedEdge> edges;
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 4; ++i) nodes.push_back(NodeId::paper("c" + std::to_string(c) + "_" + std::to_string(i)));
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) edges.push_back({nodes[c * 4 + i], nodes[c * 4 + j], edge_type::cites, 1});
  const HeteroGraph g = HeteroGraph::with_uniform_weights(nodes, edges);
  NodeEmbeddingOptions o;
  o.seed = 0;
  const EmbeddingTable t = embed_nodes(g, EudVector::uniform(), o);
  auto cosine = [](std::span<const double> a, std::span<const double> b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ab += a[i] * b[i];
      aa += a[i] * a[i];
      bb += b[i] * b[i];
    }
    return ab / std::sqrt(aa * bb);
  };
  double intra = 0, inter = 0;
  int ni = 0, nx = 0;
  for (std::size_t a = 0; a < 8; ++a)
    for (std::size_t b = a + 1; b < 8; ++b) {
      const double c = cosine(t.at(g.node(a).label()), t.at(g.node(b).label()));
      ((a < 4) == (b < 4) ? intra : inter) += c;
      ++((a < 4) == (b < 4) ? ni : nx);
    }
  intra /= ni;
  inter /= nx;
  return {intra > inter, fmt("intra %.4f, inter %.4f", intra, inter)};
}

// ---- 8, 10 ----

PipelineConfig desk_config(const fs::path& workdir) {
  PipelineConfig c = profile_defaults("desk");
  c.paths.corpus = std::string(RELSUM_SOURCE_DIR) + "/data/synthetic_corpus.jsonl";
  c.paths.workdir = workdir.string();
  return c;
}

const fs::path kRunA = fs::temp_directory_path() / "relsum_acceptance_a";
const fs::path kRunB = fs::temp_directory_path() / "relsum_acceptance_b";
double run_a_seconds = 0;

double mean_recall(const std::vector<ReportRow>& rows, const std::string& method) {
  for (const auto& r : rows)
    if (r.method == method && r.target == "mean") return r.rouge1.recall;
  throw std::runtime_error("no mean row for " + method);
}

Outcome desk_experiment() {
  fs::remove_all(kRunA);
  const auto start = std::chrono::steady_clock::now();
  run_pipeline(desk_config(kRunA));
  run_a_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto rows = load_report(kRunA / "report.tsv");
  const double full = mean_recall(rows, "S+N+Rteg+EUD");
  const double random = mean_recall(rows, "random");
  const double plain = mean_recall(rows, "void");
  return {full > random && full > plain,
          fmt("full %.4f vs random %.4f", full, random) + fmt(", void %.4f", plain)};
}

Outcome reproducibility() {
  if (!fs::exists(kRunA / "report.tsv")) return {false, "first run missing"};
  fs::remove_all(kRunB);
  run_pipeline(desk_config(kRunB));
  std::vector<fs::path> files = {"eud.txt", "report.tsv"};
  for (const auto& e : fs::directory_iterator(kRunA / "models"))
    if (e.path().extension() == ".ckpt") files.push_back(fs::path("models") / e.path().filename());
  for (const auto& f : files)
    if (!fs::exists(kRunB / f) || read_file(kRunA / f) != read_file(kRunB / f)) return {false, f.string() + " differs"};
  return {true, std::to_string(files.size()) + " files identical" + fmt(", first run %.1fs", run_a_seconds)};
}

// ---- 9 ----

double subset_rouge2(const std::vector<Tokens>& sentences, const std::vector<std::size_t>& chosen, const Tokens& gold) {
  std::map<std::pair<std::string, std::string>, int> want, have;
  for (std::size_t i = 0; i + 1 < gold.size(); ++i) ++want[{gold[i], gold[i + 1]}];
  for (std::size_t c : chosen)
    for (std::size_t i = 0; i + 1 < sentences[c].size(); ++i) ++have[{sentences[c][i], sentences[c][i + 1]}];
  int total = 0, hit = 0;
  for (const auto& [bg, n] : want) {
    total += n;
    if (auto it = have.find(bg); it != have.end()) hit += std::min(n, it->second);
  }
  return static_cast<double>(hit) / total;
}

Outcome oracle_bound() {
  Rng rng(9);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f", "g", "h"};
  double worst = 1e9;
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t m = 2 + rng.below(11);
    const std::size_t budget = 1 + rng.below(3);
    std::vector<Tokens> sentences(m);
    LabeledSequence seq;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0, len = 7 + rng.below(5); k < len; ++k) sentences[i].push_back(vocab[rng.below(vocab.size())]);
      seq.sentences.push_back({sentences[i], "r", i});
    }
    seq.boundaries.push_back({"r", 0, m});
    Tokens gold;
    for (std::size_t k = 0, len = 15 + rng.below(15); k < len; ++k) gold.push_back(vocab[rng.below(vocab.size())]);

    const OracleOutcome o = label_oracle(seq, gold, budget);
    std::vector<std::size_t> greedy;
    for (std::size_t i = 0; i < m; ++i)
      if (o.sequence.labels[i]) greedy.push_back(i);
    const double got = subset_rouge2(sentences, greedy, gold);

    double best = 0;
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) > budget) continue;
      std::vector<std::size_t> set;
      for (std::size_t i = 0; i < m; ++i)
        if (mask & (1u << i)) set.push_back(i);
      best = std::max(best, subset_rouge2(sentences, set, gold));
    }
    if (best > 0) worst = std::min(worst, got / best);
  }
  return {worst >= kOracleRatio, fmt("worst greedy/optimum ratio %.4f", worst)};
}

}  // namespace

int main() {
  report(1, "rouge_fixtures", kLimit1, rouge_fixtures);
  report(2, "pagerank_oracle", kLimit2, pagerank_oracle);
  report(3, "eud_scaling_invariance", kLimit3, eud_scaling);
  report(4, "differential_evolution_recovery", kLimit4, de_recovery);
  report(5, "gradient_check", kLimit5, gradient_check);
  report(6, "cnn_shape_law", kLimit6, cnn_shape_law);
  report(7, "clique_embedding_structure", kLimit7, clique_embedding);
  report(8, "desk_experiment_direction", kLimit8, desk_experiment);
  report(9, "label_oracle_bound", kLimit9, oracle_bound);
  // The budget of criterion 10 covers both pipeline runs; the first one was timed under 8.
  report(10, "pipeline_reproducibility", kLimit10 - run_a_seconds, reproducibility);
  fs::remove_all(kRunA);
  fs::remove_all(kRunB);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

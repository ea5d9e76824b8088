#include "relsum/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "relsum/baselines.hpp"
#include "relsum/checkpoint.hpp"
#include "relsum/checksum.hpp"
#include "relsum/error.hpp"
#include "relsum/hetero_graph.hpp"
#include "relsum/text.hpp"
#include "relsum/trainer.hpp"

namespace relsum {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// ---- variants ----

ModelVariant parse_variant(std::string_view name) {
  ModelVariant v;
  v.name = std::string(name);
  v.attention = AttentionConfig::none();
  if (name == "void") return v;
  std::set<std::string> seen;
  std::size_t start = 0;
  while (start <= name.size()) {
    const std::size_t plus = std::min(name.find('+', start), name.size());
    const std::string part(name.substr(start, plus - start));
    if (!seen.insert(part).second) throw Error(ErrorCategory::config, "repeated term in variant " + v.name);
    if (part == "S") v.attention.saliency = true;
    else if (part == "N") v.attention.novelty = true;
    else if (part == "Rt") v.attention.text_relevance = true;
    else if (part == "Rtog" || part == "Rteg") {
      v.attention.text_relevance = true;
      v.attention.graph_relevance = true;
      v.nodes = part == "Rtog" ? NodeSource::citation : NodeSource::uniform;
    } else if (part == "EUD") {
      if (v.nodes != NodeSource::uniform)
        throw Error(ErrorCategory::config, "EUD requires Rteg in variant " + v.name);
      v.nodes = NodeSource::eud;
    } else {
      throw Error(ErrorCategory::config, "unknown attention term '" + part + "' in variant " + v.name);
    }
    start = plus + 1;
  }
  return v;
}

std::vector<std::string> default_variants() {
  return {"void", "S", "S+N", "S+N+Rt", "S+N+Rtog", "S+N+Rteg", "S+N+Rteg+EUD"};
}

// ---- config ----

namespace {

json to_json(const PipelineConfig& c) {
  json j;
  j["paths"] = {{"corpus", c.paths.corpus}, {"workdir", c.paths.workdir}};
  j["eligibility"] = {{"min_resolved_references", c.eligibility.min_resolved_references},
                      {"min_gold_words", c.eligibility.min_gold_words}};
  j["split"] = {{"folds", c.split.folds}, {"fold_index", c.split.fold_index}, {"seed", c.split.seed}};
  j["graph"] = {{"damping", c.graph.pagerank.damping},
                {"tolerance", c.graph.pagerank.tolerance},
                {"max_iterations", c.graph.pagerank.max_iterations}};
  j["evolution"] = {{"population_size", c.evolution.de.population_size},
                    {"generations", c.evolution.de.generations},
                    {"scale_factor", c.evolution.de.scale_factor},
                    {"crossover_rate", c.evolution.de.crossover_rate},
                    {"seed", c.evolution.de.seed},
                    {"penalty_multiplier", c.evolution.penalty_multiplier}};
  j["embedding"] = {{"dim", c.embedding.dim},
                    {"walks_per_node", c.embedding.walks.walks_per_node},
                    {"walk_length", c.embedding.walks.walk_length},
                    {"return_p", c.embedding.walks.return_p},
                    {"inout_q", c.embedding.walks.inout_q},
                    {"window", c.embedding.window},
                    {"negatives", c.embedding.negatives},
                    {"epochs", c.embedding.epochs},
                    {"learning_rate", c.embedding.learning_rate},
                    {"seed", c.embedding.seed}};
  j["model"] = {{"dim", c.model.dim},         {"widths", c.model.widths},
                {"epochs", c.model.epochs},   {"learning_rate", c.model.learning_rate},
                {"seed", c.model.seed},       {"variants", c.model.variants}};
  j["evaluation"] = {{"byte_limit", c.evaluation.byte_limit ? json(*c.evaluation.byte_limit) : json(nullptr)},
                     {"word_budget", c.evaluation.word_budget},
                     {"baselines", c.evaluation.baselines},
                     {"random_draws", c.evaluation.random_draws},
                     {"seed", c.evaluation.seed}};
  return j;
}

PipelineConfig from_json(const json& j) {
  PipelineConfig c;
  const auto& p = j.at("paths");
  p.at("corpus").get_to(c.paths.corpus);
  p.at("workdir").get_to(c.paths.workdir);
  const auto& e = j.at("eligibility");
  e.at("min_resolved_references").get_to(c.eligibility.min_resolved_references);
  e.at("min_gold_words").get_to(c.eligibility.min_gold_words);
  const auto& s = j.at("split");
  s.at("folds").get_to(c.split.folds);
  s.at("fold_index").get_to(c.split.fold_index);
  s.at("seed").get_to(c.split.seed);
  const auto& g = j.at("graph");
  g.at("damping").get_to(c.graph.pagerank.damping);
  g.at("tolerance").get_to(c.graph.pagerank.tolerance);
  g.at("max_iterations").get_to(c.graph.pagerank.max_iterations);
  const auto& ev = j.at("evolution");
  ev.at("population_size").get_to(c.evolution.de.population_size);
  ev.at("generations").get_to(c.evolution.de.generations);
  ev.at("scale_factor").get_to(c.evolution.de.scale_factor);
  ev.at("crossover_rate").get_to(c.evolution.de.crossover_rate);
  ev.at("seed").get_to(c.evolution.de.seed);
  ev.at("penalty_multiplier").get_to(c.evolution.penalty_multiplier);
  const auto& em = j.at("embedding");
  em.at("dim").get_to(c.embedding.dim);
  em.at("walks_per_node").get_to(c.embedding.walks.walks_per_node);
  em.at("walk_length").get_to(c.embedding.walks.walk_length);
  em.at("return_p").get_to(c.embedding.walks.return_p);
  em.at("inout_q").get_to(c.embedding.walks.inout_q);
  em.at("window").get_to(c.embedding.window);
  em.at("negatives").get_to(c.embedding.negatives);
  em.at("epochs").get_to(c.embedding.epochs);
  em.at("learning_rate").get_to(c.embedding.learning_rate);
  em.at("seed").get_to(c.embedding.seed);
  const auto& m = j.at("model");
  m.at("dim").get_to(c.model.dim);
  m.at("widths").get_to(c.model.widths);
  m.at("epochs").get_to(c.model.epochs);
  m.at("learning_rate").get_to(c.model.learning_rate);
  m.at("seed").get_to(c.model.seed);
  m.at("variants").get_to(c.model.variants);
  const auto& ea = j.at("evaluation");
  if (ea.at("byte_limit").is_null()) c.evaluation.byte_limit.reset();
  else c.evaluation.byte_limit = ea.at("byte_limit").get<std::size_t>();
  ea.at("word_budget").get_to(c.evaluation.word_budget);
  ea.at("baselines").get_to(c.evaluation.baselines);
  ea.at("random_draws").get_to(c.evaluation.random_draws);
  ea.at("seed").get_to(c.evaluation.seed);
  return c;
}

// Overlays `patch` onto `base`, rejecting keys the base does not have.
void overlay(json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) throw Error(ErrorCategory::config, where + " must be an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) throw Error(ErrorCategory::config, "unknown config key '" + path + "'");
    if (base[key].is_object()) overlay(base[key], value, path);
    else base[key] = value;
  }
}

}  // namespace

void PipelineConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCategory::config, msg); };
  if (embedding.dim != model.dim) fail("embedding.dim and model.dim must agree");
  if (model.dim == 0) fail("model.dim must be positive");
  if (split.folds < 2) fail("split.folds must be at least 2");
  if (split.fold_index >= split.folds) fail("split.fold_index must be below split.folds");
  if (model.widths.empty()) fail("model.widths must not be empty");
  for (std::size_t q : model.widths)
    if (q == 0 || q > kMinSentenceTokens) fail("model.widths entries must lie in [1, 7]");
  if (model.variants.empty()) fail("model.variants must not be empty");
  std::set<std::string> names;
  for (const auto& v : model.variants) {
    parse_variant(v);
    if (!names.insert(v).second) fail("variant " + v + " listed twice");
  }
  for (const auto& b : evaluation.baselines) {
    try {
      parse_baseline_kind(b);
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  if (evaluation.word_budget == 0) fail("evaluation.word_budget must be positive");
  if (evaluation.byte_limit && *evaluation.byte_limit == 0) fail("evaluation.byte_limit must be positive");
  if (!(graph.pagerank.damping >= 0.0 && graph.pagerank.damping < 1.0)) fail("graph.damping must lie in [0, 1)");
  if (embedding.window == 0 || embedding.walks.walk_length == 0) fail("embedding window and walk length must be positive");
  evolution.de.validate();
}

PipelineConfig parse_config(std::string_view json_text, const PipelineConfig& base) {
  json merged = to_json(base);
  try {
    const json patch = json::parse(json_text.begin(), json_text.end());
    if (!patch.is_null()) overlay(merged, patch, "");
    PipelineConfig out = from_json(merged);
    out.validate();
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::config, std::string("invalid config: ") + e.what());
  }
}

PipelineConfig load_config(const fs::path& path, const PipelineConfig& base) {
  return parse_config(read_file(path), base);
}

PipelineConfig profile_defaults(std::string_view profile) {
  PipelineConfig c;
  if (profile.empty() || profile == "full") return c;
  if (profile != "desk") throw Error(ErrorCategory::config, "unknown profile '" + std::string(profile) + "'");
  c.embedding.dim = 16;
  c.model.dim = 16;
  c.eligibility.min_resolved_references = 8;
  c.eligibility.min_gold_words = 100;
  c.split.folds = 4;
  c.evaluation.word_budget = 150;
  return c;
}

std::string config_to_json(const PipelineConfig& config) { return to_json(config).dump(2) + "\n"; }

// ---- folds ----

std::vector<std::size_t> split_folds(std::span<const std::string> targets, std::size_t folds,
                                     std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCategory::invalid_argument, "at least two folds required");
  if (targets.size() < folds)
    throw Error(ErrorCategory::invalid_argument,
                std::to_string(targets.size()) + " targets cannot fill " + std::to_string(folds) + " folds");
  std::vector<std::size_t> order(targets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> fold(targets.size());
  for (std::size_t k = 0; k < order.size(); ++k) fold[order[k]] = k % folds;
  return fold;
}

// ---- stages ----

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::ingest: return "ingest";
    case Stage::graph: return "graph";
    case Stage::eud: return "eud";
    case Stage::embed: return "embed";
    case Stage::label: return "label";
    case Stage::train: return "train";
    case Stage::summarize: return "summarize";
    case Stage::evaluate: return "evaluate";
  }
  return "unknown";
}

Stage parse_stage(std::string_view name) {
  for (Stage s : kAllStages)
    if (to_string(s) == name) return s;
  throw Error(ErrorCategory::invalid_argument, "unknown stage '" + std::string(name) + "'");
}

std::string_view artifact_name(Stage stage) noexcept {
  switch (stage) {
    case Stage::ingest: return "corpus";
    case Stage::graph: return "graph";
    case Stage::eud: return "eud";
    case Stage::embed: return "embeddings";
    case Stage::label: return "labels";
    case Stage::train: return "model";
    case Stage::summarize: return "summaries";
    case Stage::evaluate: return "report";
  }
  return "unknown";
}

namespace {

std::vector<Stage> dependencies(Stage stage) {
  switch (stage) {
    case Stage::ingest: return {};
    case Stage::graph: return {Stage::ingest};
    case Stage::eud: return {Stage::graph, Stage::ingest};
    case Stage::embed: return {Stage::eud, Stage::graph, Stage::ingest};
    case Stage::label: return {Stage::ingest};
    case Stage::train: return {Stage::embed, Stage::label, Stage::ingest};
    case Stage::summarize: return {Stage::train, Stage::embed, Stage::label, Stage::ingest};
    case Stage::evaluate: return {Stage::summarize, Stage::label, Stage::ingest};
  }
  return {};
}

json config_section(const PipelineConfig& c, Stage stage) {
  const json full = to_json(c);
  switch (stage) {
    case Stage::ingest:
      return {{"corpus", full["paths"]["corpus"]}, {"eligibility", full["eligibility"]}, {"split", full["split"]}};
    case Stage::graph: return {{"cutoff", "target_year"}};
    case Stage::eud: return {{"evolution", full["evolution"]}, {"graph", full["graph"]}};
    case Stage::embed: return {{"embedding", full["embedding"]}};
    case Stage::label: return json::object();
    case Stage::train: return {{"model", full["model"]}};
    case Stage::summarize:
      return {{"variants", full["model"]["variants"]},
              {"word_budget", full["evaluation"]["word_budget"]},
              {"baselines", full["evaluation"]["baselines"]},
              {"random_draws", full["evaluation"]["random_draws"]},
              {"seed", full["evaluation"]["seed"]}};
    case Stage::evaluate: return {{"byte_limit", full["evaluation"]["byte_limit"]}};
  }
  return json::object();
}

std::string config_hash(const PipelineConfig& c, Stage stage) {
  return to_hex(fnv1a64(config_section(c, stage).dump()));
}

fs::path manifest_path(const fs::path& workdir, Stage stage) {
  return workdir / "manifests" / (std::string(to_string(stage)) + ".json");
}

std::optional<json> read_manifest(const fs::path& workdir, Stage stage) {
  const fs::path path = manifest_path(workdir, stage);
  if (!fs::exists(path)) return std::nullopt;
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::parse, "corrupt manifest " + path.string() + ": " + e.what());
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Everything a stage body needs, plus what it reports back for the manifest.
struct StageContext {
  const PipelineConfig& config;
  fs::path workdir;
  const StageOptions& options;
  std::vector<std::string> outputs;  // paths relative to workdir
  json extra = json::object();

  void progress(const std::string& line) const {
    if (options.progress) options.progress(line);
  }
  fs::path path(const std::string& rel) const { return workdir / rel; }
  void write(const std::string& rel, std::string_view contents) {
    write_file_atomic(path(rel), contents);
    outputs.push_back(rel);
  }
  void record(const std::string& rel) { outputs.push_back(rel); }
};

// ---- shared artifact readers ----

struct TargetSplit {
  std::vector<std::string> eligible;
  std::vector<std::string> train;
  std::vector<std::string> test;
};

TargetSplit read_targets(const fs::path& workdir) {
  const json j = json::parse(read_file(workdir / "targets.json"));
  TargetSplit s;
  j.at("eligible").get_to(s.eligible);
  j.at("train").get_to(s.train);
  j.at("test").get_to(s.test);
  return s;
}

Corpus read_corpus(const fs::path& workdir) {
  IngestResult r = ingest_corpus(workdir / "corpus.jsonl");
  if (!r.issues.empty())
    throw Error(ErrorCategory::parse, "workdir corpus has malformed line " + std::to_string(r.issues.front().line));
  return std::move(r.corpus);
}

std::string graph_stem(std::optional<int> year) {
  return year ? "graph/year_" + std::to_string(*year) : std::string("graph/full");
}

HeteroGraph read_graph(const fs::path& workdir, std::optional<int> year) {
  const std::string stem = graph_stem(year);
  return load_graph(workdir / (stem + ".nodes.tsv"), workdir / (stem + ".edges.tsv"));
}

std::string join_tokens(const Tokens& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

Tokens split_tokens(std::string_view text) {
  Tokens out;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = std::min(text.find(' ', start), text.size());
    if (end > start) out.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

struct StoredSequence {
  std::string target;
  bool train = false;
  LabeledSequence seq;
};

json sequence_to_json(const StoredSequence& s, double rouge2, bool no_overlap) {
  json j;
  j["target"] = s.target;
  j["split"] = s.train ? "train" : "test";
  j["labels"] = s.seq.labels;
  j["oracle_rouge2_recall"] = fmt17(rouge2);
  j["no_overlap"] = no_overlap;
  json bounds = json::array();
  for (const auto& b : s.seq.boundaries) bounds.push_back({b.paper_id, b.begin, b.end});
  j["boundaries"] = bounds;
  json sents = json::array();
  for (const auto& sen : s.seq.sentences) sents.push_back({sen.source_doc, sen.position, join_tokens(sen.tokens)});
  j["sentences"] = sents;
  return j;
}

std::vector<StoredSequence> read_sequences(const fs::path& workdir) {
  std::vector<StoredSequence> out;
  std::istringstream in(read_file(workdir / "sequences.jsonl"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    StoredSequence s;
    s.target = j.at("target").get<std::string>();
    s.train = j.at("split").get<std::string>() == "train";
    j.at("labels").get_to(s.seq.labels);
    for (const auto& b : j.at("boundaries"))
      s.seq.boundaries.push_back({b.at(0).get<std::string>(), b.at(1).get<std::size_t>(), b.at(2).get<std::size_t>()});
    for (const auto& sen : j.at("sentences"))
      s.seq.sentences.push_back({split_tokens(sen.at(2).get<std::string>()), sen.at(0).get<std::string>(),
                                 sen.at(1).get<std::size_t>()});
    out.push_back(std::move(s));
  }
  return out;
}

EudVector citation_eud() {
  EudVector e{};
  e[edge_type::cites] = 1.0;
  e[edge_type::cited_by] = 1.0;
  return e;
}

std::string node_file(NodeSource source) {
  switch (source) {
    case NodeSource::citation: return "node_embeddings_citation.txt";
    case NodeSource::uniform: return "node_embeddings_uniform.txt";
    case NodeSource::eud: return "node_embeddings_eud.txt";
    case NodeSource::none: break;
  }
  return {};
}

std::string checkpoint_file(const std::string& variant) { return "models/" + variant + ".ckpt"; }

// ---- stage bodies ----

void stage_ingest(StageContext& ctx) {
  const auto& cfg = ctx.config;
  IngestResult result = ingest_corpus(fs::path(cfg.paths.corpus));
  std::string issues;
  for (const auto& issue : result.issues) {
    issues += std::to_string(issue.line) + '\t' + issue.message + '\n';
    ctx.progress("ingest: skipped line " + std::to_string(issue.line) + ": " + issue.message);
  }
  std::string corpus_text;
  std::vector<std::string> eligible;
  for (const auto& [id, rec] : result.corpus) {
    corpus_text += serialize_record(rec);
    corpus_text.push_back('\n');
    if (cfg.eligibility(rec)) eligible.push_back(id);
  }
  const std::vector<std::size_t> folds = split_folds(eligible, cfg.split.folds, cfg.split.seed);
  json targets;
  targets["eligible"] = eligible;
  targets["folds"] = json::object();
  std::vector<std::string> train, test;
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    targets["folds"][eligible[i]] = folds[i];
    (folds[i] == cfg.split.fold_index ? test : train).push_back(eligible[i]);
  }
  targets["fold_index"] = cfg.split.fold_index;
  targets["train"] = train;
  targets["test"] = test;
  ctx.write("corpus.jsonl", corpus_text);
  ctx.write("ingest_issues.tsv", issues);
  ctx.write("targets.json", targets.dump(2) + "\n");
  ctx.progress("ingest: " + std::to_string(result.corpus.size()) + " papers, " + std::to_string(eligible.size()) +
               " eligible targets, " + std::to_string(test.size()) + " in the test fold");
}

std::set<int> target_years(const Corpus& corpus, const std::vector<std::string>& ids) {
  std::set<int> years;
  for (const auto& id : ids) years.insert(corpus.at(id).year);
  return years;
}

void stage_graph(StageContext& ctx) {
  const Corpus corpus = read_corpus(ctx.workdir);
  const TargetSplit split = read_targets(ctx.workdir);
  fs::create_directories(ctx.path("graph"));
  auto emit = [&](const HeteroGraph& g, std::optional<int> year) {
    const std::string stem = graph_stem(year);
    ctx.write(stem + ".nodes.tsv", format_nodes(g));
    ctx.write(stem + ".edges.tsv", format_edges(g));
    ctx.progress("graph: " + stem + " with " + std::to_string(g.node_count()) + " nodes and " +
                 std::to_string(g.edge_count()) + " edges");
  };
  int latest = 0;
  for (const auto& [id, rec] : corpus) latest = std::max(latest, rec.year);
  emit(build_graph(corpus, latest), std::nullopt);
  for (int year : target_years(corpus, split.eligible)) emit(build_graph(corpus, year), year);
}

void stage_eud(StageContext& ctx) {
  const Corpus corpus = read_corpus(ctx.workdir);
  const TargetSplit split = read_targets(ctx.workdir);
  std::map<int, HeteroGraph> graphs;
  for (int year : target_years(corpus, split.train)) graphs.emplace(year, read_graph(ctx.workdir, year));
  std::vector<FitnessTarget> targets;
  for (const auto& id : split.train) {
    const CorpusRecord& rec = corpus.at(id);
    FitnessTarget ft;
    ft.target = NodeId::paper(id);
    for (const auto& r : order_references(rec)) ft.references.push_back(NodeId::paper(r));
    ft.graph = &graphs.at(rec.year);
    targets.push_back(std::move(ft));
  }
  if (targets.empty()) throw Error(ErrorCategory::invalid_argument, "no training targets for EUD optimisation");
  FitnessOptions fo;
  fo.penalty_multiplier = ctx.config.evolution.penalty_multiplier;
  fo.pagerank = ctx.config.graph.pagerank;
  const double uniform = fitness(EudVector::uniform(), targets, fo);
  const EvolutionResult result = evolve(targets, ctx.config.evolution.de, fo, [&](std::size_t gen, double best) {
    if (gen % 10 == 0) ctx.progress("eud: generation " + std::to_string(gen) + " best fitness " + fmt17(best));
  });
  std::string trace = "generation\tbest_fitness\n";
  for (std::size_t g = 0; g < result.best_fitness_trace.size(); ++g)
    trace += std::to_string(g) + '\t' + fmt17(result.best_fitness_trace[g]) + '\n';
  ctx.write("eud.txt", format_eud(result.best.genome));
  ctx.write("eud_trace.tsv", trace);
  ctx.extra["uniform_fitness"] = fmt17(uniform);
  ctx.extra["best_fitness"] = fmt17(*result.best.fitness);
  ctx.extra["used_targets"] = split.train;
  ctx.progress("eud: best fitness " + fmt17(*result.best.fitness) + ", uniform " + fmt17(uniform));
}

void stage_embed(StageContext& ctx) {
  const auto& cfg = ctx.config.embedding;
  const Corpus corpus = read_corpus(ctx.workdir);
  const TargetSplit split = read_targets(ctx.workdir);
  const std::set<std::string> test(split.test.begin(), split.test.end());
  std::vector<std::vector<std::string>> sentences;
  for (const auto& [id, rec] : corpus) {
    if (test.count(id)) continue;
    for (auto& s : document_sentences(rec)) sentences.push_back(std::move(s.tokens));
  }
  SkipGramOptions sg;
  sg.dim = cfg.dim;
  sg.window = cfg.window;
  sg.negatives = cfg.negatives;
  sg.epochs = cfg.epochs;
  sg.learning_rate = cfg.learning_rate;
  Rng rng(cfg.seed);
  const EmbeddingTable words = train_skipgram(sentences, sg, rng);
  ctx.write("word_embeddings.txt", format_embeddings(words));
  ctx.progress("embed: " + std::to_string(words.size()) + " word vectors from " + std::to_string(sentences.size()) +
               " sentences");

  const HeteroGraph graph = read_graph(ctx.workdir, std::nullopt);
  const EudVector learned = parse_eud(read_file(ctx.path("eud.txt")));
  NodeEmbeddingOptions no;
  no.walks = cfg.walks;
  no.skipgram = sg;
  no.seed = cfg.seed;
  const std::pair<NodeSource, EudVector> sources[] = {
      {NodeSource::citation, citation_eud()}, {NodeSource::uniform, EudVector::uniform()}, {NodeSource::eud, learned}};
  for (const auto& [source, eud] : sources) {
    const EmbeddingTable nodes = embed_nodes(graph, eud, no);
    ctx.write(node_file(source), format_embeddings(nodes));
    ctx.progress("embed: " + node_file(source) + " with " + std::to_string(nodes.size()) + " vectors");
  }
  std::vector<std::string> used;
  for (const auto& id : split.eligible)
    if (!test.count(id)) used.push_back(id);
  ctx.extra["used_targets"] = used;
}

void stage_label(StageContext& ctx) {
  const Corpus corpus = read_corpus(ctx.workdir);
  const TargetSplit split = read_targets(ctx.workdir);
  const std::set<std::string> train(split.train.begin(), split.train.end());
  std::string out;
  std::size_t no_overlap = 0;
  for (const auto& id : split.eligible) {
    const CorpusRecord& rec = corpus.at(id);
    StoredSequence s{id, train.count(id) > 0, build_candidate_sequence(rec, corpus)};
    double rouge2 = 0.0;
    bool empty = false;
    if (s.train) {
      const Tokens gold = normalize(rec.related_work_text);
      const std::size_t max_positives = default_max_positives(s.seq, gold.size());
      OracleOutcome o = label_oracle(std::move(s.seq), gold, max_positives);
      s.seq = std::move(o.sequence);
      rouge2 = o.rouge2_recall;
      empty = o.no_overlap;
      if (empty) ++no_overlap;
    }
    out += sequence_to_json(s, rouge2, empty).dump() + "\n";
  }
  ctx.write("sequences.jsonl", out);
  ctx.progress("label: " + std::to_string(split.eligible.size()) + " candidate sequences, " +
               std::to_string(no_overlap) + " training targets without gold overlap");
}

std::vector<std::string> vocabulary_of(const EmbeddingTable& words) {
  std::vector<std::string> vocab{std::string(kUnknownToken)};
  for (const auto& [w, v] : words) vocab.push_back(w);
  return vocab;
}

const EmbeddingTable* node_table(std::map<NodeSource, EmbeddingTable>& cache, const fs::path& workdir,
                                 NodeSource source) {
  if (source == NodeSource::none) return nullptr;
  auto it = cache.find(source);
  if (it == cache.end()) it = cache.emplace(source, load_embeddings(workdir / node_file(source))).first;
  return &it->second;
}

void stage_train(StageContext& ctx) {
  const auto& mc = ctx.config.model;
  const Corpus corpus = read_corpus(ctx.workdir);
  const EmbeddingTable words = load_embeddings(ctx.path("word_embeddings.txt"));
  if (words.dim() != mc.dim) throw Error(ErrorCategory::config_mismatch, "word embeddings have a different dimension");
  std::map<NodeSource, EmbeddingTable> node_cache;
  std::vector<StoredSequence> sequences = read_sequences(ctx.workdir);
  std::vector<std::string> used;
  for (const auto& s : sequences)
    if (s.train) used.push_back(s.target);
  fs::create_directories(ctx.path("models"));
  for (const std::string& name : mc.variants) {
    const ModelVariant variant = parse_variant(name);
    Rng rng(mc.seed);
    SummarizerModel model = SummarizerModel::initialize(mc.dim, mc.widths, vocabulary_of(words), rng, &words);
    const EmbeddingTable* nodes = node_table(node_cache, ctx.workdir, variant.nodes);
    std::vector<TrainingExample> data;
    for (const auto& s : sequences) {
      if (!s.train) continue;
      const auto target_sentences = document_sentences(corpus.at(s.target));
      data.push_back({s.target, make_input(model, s.seq, target_sentences, s.target, nodes), s.seq.labels});
    }
    TrainOptions to;
    to.epochs = mc.epochs;
    to.adam.learning_rate = mc.learning_rate;
    to.seed = mc.seed;
    const TrainResult result = train(std::move(model), variant.attention, data, to, [&](std::size_t epoch, double loss) {
      ctx.progress("train: " + name + " epoch " + std::to_string(epoch + 1) + " mean loss " + fmt17(loss));
    });
    std::string trace = "epoch\tmean_loss\n";
    for (std::size_t e = 0; e < result.epoch_mean_loss.size(); ++e)
      trace += std::to_string(e + 1) + '\t' + fmt17(result.epoch_mean_loss[e]) + '\n';
    save_checkpoint(result.model, ctx.path(checkpoint_file(name)));
    ctx.record(checkpoint_file(name));
    ctx.record(checkpoint_file(name) + ".manifest");
    ctx.write("models/" + name + ".loss.tsv", trace);
  }
  ctx.extra["used_targets"] = used;
}

void stage_summarize(StageContext& ctx) {
  const auto& cfg = ctx.config;
  const Corpus corpus = read_corpus(ctx.workdir);
  std::map<NodeSource, EmbeddingTable> node_cache;
  std::vector<StoredSequence> tests;
  for (auto& s : read_sequences(ctx.workdir))
    if (!s.train) tests.push_back(std::move(s));
  const std::size_t budget = cfg.evaluation.word_budget;
  std::string out;
  auto emit = [&](const std::string& method, const std::string& target, std::optional<std::size_t> draw,
                  const std::vector<std::size_t>& indices) {
    json j;
    j["method"] = method;
    j["target"] = target;
    if (draw) j["draw"] = *draw;
    j["indices"] = indices;
    out += j.dump() + "\n";
  };
  for (const std::string& name : cfg.model.variants) {
    const ModelVariant variant = parse_variant(name);
    const SummarizerModel model = load_checkpoint(ctx.path(checkpoint_file(name)));
    const EmbeddingTable* nodes = node_table(node_cache, ctx.workdir, variant.nodes);
    for (const auto& s : tests) {
      const auto target_sentences = document_sentences(corpus.at(s.target));
      const EncodedTarget enc = encode_target(model, make_input(model, s.seq, target_sentences, s.target, nodes));
      emit(name, s.target, std::nullopt, extract_summary(model, variant.attention, enc, budget));
    }
  }
  for (const std::string& b : cfg.evaluation.baselines) {
    const BaselineKind kind = parse_baseline_kind(b);
    for (const auto& s : tests) emit(b, s.target, std::nullopt, baseline_summarize(kind, s.seq, budget));
  }
  Rng rng(cfg.evaluation.seed);
  for (const auto& s : tests)
    for (std::size_t d = 0; d < cfg.evaluation.random_draws; ++d) emit("random", s.target, d, random_summarize(s.seq, budget, rng));
  ctx.write("summaries.jsonl", out);
  ctx.progress("summarize: " + std::to_string(tests.size()) + " test targets");
}

std::size_t median_gold_bytes(const Corpus& corpus, const std::vector<std::string>& ids) {
  std::vector<std::size_t> bytes;
  for (const auto& id : ids) bytes.push_back(join_tokens(normalize(corpus.at(id).related_work_text)).size());
  if (bytes.empty()) throw Error(ErrorCategory::invalid_argument, "no eligible targets for the byte limit");
  std::sort(bytes.begin(), bytes.end());
  return bytes[(bytes.size() - 1) / 2];
}

std::string report_line(const ReportRow& r) {
  std::string line = r.method + '\t' + r.target;
  for (const RougeScore* s : {&r.rouge1, &r.rouge2, &r.rougeL})
    line += '\t' + fmt(s->recall) + '\t' + fmt(s->precision) + '\t' + fmt(s->f1);
  return line + '\n';
}

RougeScore mean_of(const std::vector<RougeScore>& scores) {
  RougeScore m;
  for (const auto& s : scores) {
    m.recall += s.recall;
    m.precision += s.precision;
    m.f1 += s.f1;
  }
  const double n = static_cast<double>(scores.size());
  m.recall /= n;
  m.precision /= n;
  m.f1 /= n;
  return m;
}

void stage_evaluate(StageContext& ctx) {
  const Corpus corpus = read_corpus(ctx.workdir);
  const TargetSplit split = read_targets(ctx.workdir);
  std::map<std::string, LabeledSequence> sequences;
  for (auto& s : read_sequences(ctx.workdir))
    if (!s.train) sequences.emplace(s.target, std::move(s.seq));
  const std::size_t limit = ctx.config.evaluation.byte_limit.value_or(median_gold_bytes(corpus, split.eligible));

  // method -> target -> scores of every draw
  std::vector<std::string> methods;
  std::map<std::string, std::map<std::string, std::vector<std::array<RougeScore, 3>>>> scores;
  std::istringstream in(read_file(ctx.path("summaries.jsonl")));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const std::string method = j.at("method").get<std::string>();
    const std::string target = j.at("target").get<std::string>();
    const LabeledSequence& seq = sequences.at(target);
    Tokens candidate;
    for (std::size_t idx : j.at("indices").get<std::vector<std::size_t>>()) {
      const Tokens& t = seq.sentences.at(idx).tokens;
      candidate.insert(candidate.end(), t.begin(), t.end());
    }
    const Tokens gold = normalize(corpus.at(target).related_work_text);
    if (!scores.count(method)) methods.push_back(method);
    scores[method][target].push_back(
        {rouge_n(candidate, gold, 1, limit), rouge_n(candidate, gold, 2, limit), rouge_l(candidate, gold, limit)});
  }
  std::string report = "method\ttarget";
  for (const char* m : {"rouge1", "rouge2", "rougeL"})
    for (const char* f : {"recall", "precision", "f1"}) report += std::string("\t") + m + "_" + f;
  report += '\n';
  for (const auto& method : methods) {
    std::array<std::vector<RougeScore>, 3> per_metric;
    for (const auto& [target, draws] : scores[method]) {
      ReportRow row{method, target, {}, {}, {}};
      std::array<std::vector<RougeScore>, 3> by_metric;
      for (const auto& d : draws)
        for (int k = 0; k < 3; ++k) by_metric[k].push_back(d[k]);
      row.rouge1 = mean_of(by_metric[0]);
      row.rouge2 = mean_of(by_metric[1]);
      row.rougeL = mean_of(by_metric[2]);
      per_metric[0].push_back(row.rouge1);
      per_metric[1].push_back(row.rouge2);
      per_metric[2].push_back(row.rougeL);
      report += report_line(row);
    }
    report += report_line({method, "mean", mean_of(per_metric[0]), mean_of(per_metric[1]), mean_of(per_metric[2])});
  }
  ctx.write("report.tsv", report);
  ctx.extra["byte_limit"] = limit;
  check_leakage(ctx.workdir);
  ctx.progress("evaluate: report.tsv with " + std::to_string(methods.size()) + " methods, byte limit " +
               std::to_string(limit));
}

void run_body(Stage stage, StageContext& ctx) {
  switch (stage) {
    case Stage::ingest: return stage_ingest(ctx);
    case Stage::graph: return stage_graph(ctx);
    case Stage::eud: return stage_eud(ctx);
    case Stage::embed: return stage_embed(ctx);
    case Stage::label: return stage_label(ctx);
    case Stage::train: return stage_train(ctx);
    case Stage::summarize: return stage_summarize(ctx);
    case Stage::evaluate: return stage_evaluate(ctx);
  }
}

std::string checksum_of(const fs::path& path) { return to_hex(file_checksum(path)); }

}  // namespace

StageOutcome run_stage(Stage stage, const PipelineConfig& config, const StageOptions& options) {
  config.validate();
  const fs::path workdir(config.paths.workdir);

  // Inputs: the configured corpus for ingest, upstream outputs otherwise.
  json inputs = json::object();
  if (stage == Stage::ingest) {
    if (!fs::exists(config.paths.corpus))
      throw Error(ErrorCategory::io, "corpus file " + config.paths.corpus + " does not exist");
    inputs["corpus:" + config.paths.corpus] = checksum_of(config.paths.corpus);
  }
  for (Stage dep : dependencies(stage)) {
    const auto manifest = read_manifest(workdir, dep);
    if (!manifest) throw Error(ErrorCategory::missing_artifact, "missing artifact: " + std::string(artifact_name(dep)));
    for (const auto& [rel, sum] : manifest->at("outputs").items()) {
      if (!fs::exists(workdir / rel))
        throw Error(ErrorCategory::missing_artifact, "missing artifact: " + std::string(artifact_name(dep)) + " (" + rel + ")");
      inputs[rel] = checksum_of(workdir / rel);
    }
  }

  const std::string hash = config_hash(config, stage);
  if (const auto previous = read_manifest(workdir, stage); previous && !options.force) {
    if (previous->at("config_hash").get<std::string>() != hash)
      throw Error(ErrorCategory::config_mismatch,
                  "stage " + std::string(to_string(stage)) +
                      " was built with a different configuration; rerun with --force to replace it");
    bool current = previous->at("inputs") == inputs;
    for (const auto& [rel, sum] : previous->at("outputs").items()) {
      if (!current) break;
      current = fs::exists(workdir / rel) && checksum_of(workdir / rel) == sum.get<std::string>();
    }
    if (current) {
      if (options.progress) options.progress(std::string(to_string(stage)) + ": up to date");
      return StageOutcome::up_to_date;
    }
  }

  fs::create_directories(workdir / "manifests");
  StageContext ctx{config, workdir, options, {}, json::object()};
  const auto start = std::chrono::steady_clock::now();
  run_body(stage, ctx);
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);

  json manifest;
  manifest["stage"] = to_string(stage);
  manifest["config_hash"] = hash;
  manifest["inputs"] = inputs;
  json outputs = json::object();
  for (const auto& rel : ctx.outputs) outputs[rel] = checksum_of(workdir / rel);
  manifest["outputs"] = outputs;
  manifest["duration_ms"] = elapsed.count();
  for (const auto& [k, v] : ctx.extra.items()) manifest[k] = v;
  write_file_atomic(manifest_path(workdir, stage), manifest.dump(2) + "\n");
  return StageOutcome::ran;
}

void run_pipeline(const PipelineConfig& config, const StageOptions& options) {
  for (Stage s : kAllStages) run_stage(s, config, options);
}

void check_leakage(const fs::path& workdir) {
  const TargetSplit split = read_targets(workdir);
  const std::set<std::string> test(split.test.begin(), split.test.end());
  for (Stage s : {Stage::eud, Stage::embed, Stage::train}) {
    const auto manifest = read_manifest(workdir, s);
    if (!manifest || !manifest->contains("used_targets")) continue;
    for (const auto& id : manifest->at("used_targets"))
      if (test.count(id.get<std::string>()))
        throw Error(ErrorCategory::leakage,
                    "test target " + id.get<std::string>() + " was used by stage " + std::string(to_string(s)));
  }
}

std::vector<ReportRow> parse_report(std::string_view tsv) {
  std::vector<ReportRow> rows;
  std::istringstream in{std::string(tsv)};
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      f.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (f.size() != 11) throw Error(ErrorCategory::parse, "report row has " + std::to_string(f.size()) + " fields");
    ReportRow r{f[0], f[1], {}, {}, {}};
    RougeScore* s[] = {&r.rouge1, &r.rouge2, &r.rougeL};
    for (int k = 0; k < 3; ++k) {
      s[k]->recall = std::stod(f[2 + 3 * k]);
      s[k]->precision = std::stod(f[3 + 3 * k]);
      s[k]->f1 = std::stod(f[4 + 3 * k]);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ReportRow> load_report(const fs::path& path) { return parse_report(read_file(path)); }

}  // namespace relsum

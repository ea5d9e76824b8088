#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relsum/corpus.hpp"
#include "relsum/embedding.hpp"
#include "relsum/evolution.hpp"
#include "relsum/pagerank.hpp"
#include "relsum/summarizer.hpp"

namespace relsum {

enum class NodeSource { none, citation, uniform, eud };

/// One rung of the attention ablation ladder, e.g. "S+N+Rteg+EUD".
/// S saliency, N novelty, Rt text relevance, Rtog graph relevance over the
/// citation graph, Rteg over the heterogeneous graph, +EUD with learned
/// edge-type weights. "void" disables every term.
struct ModelVariant {
  std::string name;
  AttentionConfig attention;
  NodeSource nodes = NodeSource::none;
};

/// Throws Error(config) for names outside the ladder.
ModelVariant parse_variant(std::string_view name);
std::vector<std::string> default_variants();

struct PipelineConfig {
  struct Paths {
    std::string corpus = "data/synthetic_corpus.jsonl";
    std::string workdir = "work";
  } paths;
  EligibilityCriteria eligibility;
  struct Split {
    std::size_t folds = 10;
    std::size_t fold_index = 0;
    std::uint64_t seed = 0;
  } split;
  struct Graph {
    PageRankOptions pagerank;
  } graph;
  struct Evolution {
    EvolutionConfig de;
    double penalty_multiplier = 10.0;
  } evolution;
  struct Embedding {
    std::size_t dim = 128;
    WalkOptions walks;
    std::size_t window = 5;
    std::size_t negatives = 5;
    std::size_t epochs = 5;
    double learning_rate = 0.025;
    std::uint64_t seed = 0;
  } embedding;
  struct Model {
    std::size_t dim = 128;
    std::vector<std::size_t> widths{3, 4, 5};
    std::size_t epochs = 20;
    double learning_rate = 0.001;
    std::uint64_t seed = 0;
    std::vector<std::string> variants = default_variants();
  } model;
  struct Evaluation {
    std::optional<std::size_t> byte_limit;  // unset: median gold length in bytes
    std::size_t word_budget = 500;
    std::vector<std::string> baselines{"luhn", "mmr", "lexrank", "sumbasic"};
    std::size_t random_draws = 20;
    std::uint64_t seed = 0;
  } evaluation;

  /// Throws Error(config) when the sections disagree or a value is out of range.
  void validate() const;
};

/// JSON document with optional sections paths, eligibility, split, graph,
/// evolution, embedding, model and evaluation. Missing keys keep their
/// defaults; unknown keys are rejected.
PipelineConfig parse_config(std::string_view json_text, const PipelineConfig& base = {});
PipelineConfig load_config(const std::filesystem::path& path, const PipelineConfig& base = {});
/// "desk" applies the small-scale overrides; "" or "full" leaves the defaults.
PipelineConfig profile_defaults(std::string_view profile);
std::string config_to_json(const PipelineConfig& config);

/// Fold of every target, parallel to the input: seeded shuffle, then
/// round-robin. Throws Error(invalid_argument) for folds < 2 or fewer targets
/// than folds.
std::vector<std::size_t> split_folds(std::span<const std::string> targets, std::size_t folds,
                                     std::uint64_t seed);

enum class Stage { ingest, graph, eud, embed, label, train, summarize, evaluate };

inline constexpr std::array<Stage, 8> kAllStages = {Stage::ingest, Stage::graph, Stage::eud,
                                                    Stage::embed,  Stage::label, Stage::train,
                                                    Stage::summarize, Stage::evaluate};

std::string_view to_string(Stage stage) noexcept;
Stage parse_stage(std::string_view name);
/// Name used in "missing artifact" errors, e.g. "embeddings" for embed.
std::string_view artifact_name(Stage stage) noexcept;

struct StageOptions {
  bool force = false;
  std::function<void(std::string_view)> progress;  // one line per call
};

enum class StageOutcome { ran, up_to_date };

/// Runs one stage inside config.paths.workdir. Outputs are written
/// atomically and described by manifests/<stage>.json.
StageOutcome run_stage(Stage stage, const PipelineConfig& config, const StageOptions& options = {});
/// All stages in order.
void run_pipeline(const PipelineConfig& config, const StageOptions& options = {});

/// Throws Error(leakage) if any test target id appears in the target sets
/// recorded by the eud, embed or train manifests.
void check_leakage(const std::filesystem::path& workdir);

struct ReportRow {
  std::string method;
  std::string target;  // "mean" for the aggregate row
  RougeScore rouge1, rouge2, rougeL;
};

std::vector<ReportRow> parse_report(std::string_view tsv);
std::vector<ReportRow> load_report(const std::filesystem::path& path);

}  // namespace relsum

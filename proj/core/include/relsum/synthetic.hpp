#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "relsum/corpus.hpp"
#include "relsum/evolution.hpp"
#include "relsum/hetero_graph.hpp"

namespace relsum {

/// Clustered toy corpus. Every cluster has its own topic vocabulary; source
/// papers mix on-topic sentences with generic filler. Targets cite
/// `own_references` papers of their cluster in the related-work section and
/// `foreign_references` papers of other clusters in the body only, and
/// their gold section paraphrases on-topic sentences of the former.
struct SyntheticCorpusOptions {
  std::size_t clusters = 4;
  std::size_t sources_per_cluster = 10;
  std::size_t targets_per_cluster = 5;
  std::size_t own_references = 6;
  std::size_t foreign_references = 3;
  std::size_t topic_sentences = 5;   // per source paper
  std::size_t filler_sentences = 7;  // per source paper
  std::size_t gold_sentences_per_reference = 2;
  double paraphrase_rate = 0.15;  // share of gold tokens replaced
  std::uint64_t seed = 0;
};

std::vector<CorpusRecord> generate_synthetic_corpus(const SyntheticCorpusOptions& options = {});
/// One serialize_record line per paper, newline terminated.
std::string synthetic_corpus_jsonl(const SyntheticCorpusOptions& options = {});

/// Thirty papers: three targets, four references each, and fifteen decoys
/// that share authors, keywords and the venue with the targets. References
/// carry no metadata, so the only route from a target to its references is
/// the citation edge.
struct PlantedEudInstance {
  std::shared_ptr<const HeteroGraph> graph;
  std::vector<FitnessTarget> targets;
};

PlantedEudInstance planted_eud_instance();

}  // namespace relsum

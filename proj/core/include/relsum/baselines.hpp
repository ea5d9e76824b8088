#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "relsum/corpus.hpp"
#include "relsum/rng.hpp"

namespace relsum {

enum class BaselineKind { luhn, mmr, lexrank, sumbasic };

std::string_view to_string(BaselineKind kind) noexcept;
/// Throws Error(invalid_argument) for anything outside the four names.
BaselineKind parse_baseline_kind(std::string_view name);

struct BaselineParams {
  double lexrank_threshold = 0.1;
  double lexrank_damping = 0.85;
  double mmr_lambda = 0.7;
  std::size_t luhn_max_gap = 4;  // insignificant words allowed inside a cluster
};

/// Sentence indices in preference order (best first).
std::vector<std::size_t> baseline_ranking(BaselineKind kind, const LabeledSequence& seq,
                                          const BaselineParams& params = {});

/// Ranking followed by the same budget fill the extractor uses.
std::vector<std::size_t> baseline_summarize(BaselineKind kind, const LabeledSequence& seq,
                                            std::size_t word_budget,
                                            const BaselineParams& params = {});

/// Uniformly random ranking, then the budget fill.
std::vector<std::size_t> random_summarize(const LabeledSequence& seq, std::size_t word_budget, Rng& rng);

/// Budget fill of an arbitrary ranking.
std::vector<std::size_t> fill_budget(const LabeledSequence& seq, std::span<const std::size_t> ranking,
                                     std::size_t word_budget);

// Exposed for tests.
std::vector<std::vector<double>> tfidf_cosine_matrix(const LabeledSequence& seq);
std::vector<double> lexrank_scores(const LabeledSequence& seq, const BaselineParams& params = {});

}  // namespace relsum

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "relsum/hetero_graph.hpp"
#include "relsum/pagerank.hpp"
#include "relsum/rng.hpp"

namespace relsum {

struct Individual {
  EudVector genome;
  std::optional<double> fitness;
};

struct EvolutionConfig {
  std::size_t population_size = 24;
  std::size_t generations = 100;
  double scale_factor = 0.5;
  double crossover_rate = 0.9;
  std::uint64_t seed = 0;

  /// Throws Error(config) unless population_size >= 4, generations >= 1 and
  /// crossover_rate lies in [0,1].
  void validate() const;
};

/// A target document and its true reference collection in significance
/// order, evaluated against the graph snapshot it belongs to.
struct FitnessTarget {
  NodeId target;
  std::vector<NodeId> references;
  const HeteroGraph* graph = nullptr;
};

struct FitnessOptions {
  /// Penalty per missing reference is `penalty_multiplier * n` unless a
  /// fixed `penalty` is given.
  double penalty_multiplier = 10.0;
  std::optional<double> penalty;
  PageRankOptions pagerank;
};

/// Displacement cost summed over all targets: |j - rank(r_j)| for each
/// recommended reference, the penalty for each missing one.
double ranking_cost(const EudVector& eud, std::span<const FitnessTarget> targets,
                    const FitnessOptions& options = {});

/// 1 / (1 + ranking_cost). Throws Error(unknown_node) if a target is absent
/// from its graph.
double fitness(const EudVector& eud, std::span<const FitnessTarget> targets,
               const FitnessOptions& options = {});

/// x_r1 + f * (x_r2 - x_r3), clamped to [0,1]. The three parents must be
/// distinct population members (checked by identity).
EudVector de_mutate(const Individual& r1, const Individual& r2, const Individual& r3, double f);

/// Per component: the variant's value when u <= c, else the trial's.
EudVector de_crossover(const EudVector& variant, const EudVector& trial, double c, Rng& rng);

struct EvolutionResult {
  Individual best;
  /// Best-so-far fitness: index 0 is the initial population, then one entry
  /// per generation.
  std::vector<double> best_fitness_trace;
  std::vector<Individual> final_population;
};

using GenerationCallback = std::function<void(std::size_t generation, double best_fitness)>;

EvolutionResult evolve(std::span<const FitnessTarget> targets, const EvolutionConfig& config,
                       const FitnessOptions& options = {}, const GenerationCallback& on_generation = {});

/// Ten lines, one decimal per line, 12 significant digits.
std::string format_eud(const EudVector& eud);
EudVector parse_eud(std::string_view text);
void save_eud(const EudVector& eud, const std::filesystem::path& path);
EudVector load_eud(const std::filesystem::path& path);

}  // namespace relsum

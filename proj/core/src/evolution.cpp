#include "relsum/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "relsum/checksum.hpp"
#include "relsum/error.hpp"

namespace relsum {

void EvolutionConfig::validate() const {
  if (population_size < 4) {
    throw Error(ErrorCategory::config, "population_size must be at least 4");
  }
  if (generations < 1) throw Error(ErrorCategory::config, "generations must be at least 1");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
    throw Error(ErrorCategory::config, "crossover_rate must lie in [0,1]");
  }
  if (!std::isfinite(scale_factor)) throw Error(ErrorCategory::config, "scale_factor must be finite");
}

double ranking_cost(const EudVector& eud, std::span<const FitnessTarget> targets,
                    const FitnessOptions& options) {
  double cost = 0.0;
  std::map<const HeteroGraph*, TransitionTable> tables;
  for (const auto& t : targets) {
    if (t.graph == nullptr) throw Error(ErrorCategory::invalid_argument, "fitness target without graph");
    if (!t.graph->find(t.target)) {
      throw Error(ErrorCategory::unknown_node, "target absent from graph: " + t.target.label());
    }
    const std::size_t n = t.references.size();
    if (n == 0) continue;
    const double penalty =
        options.penalty ? *options.penalty : options.penalty_multiplier * static_cast<double>(n);
    auto it_table = tables.find(t.graph);
    if (it_table == tables.end()) it_table = tables.emplace(t.graph, TransitionTable(*t.graph, eud)).first;
    const auto rec = recommend_top_n(*t.graph, it_table->second, t.target, n, options.pagerank);
    for (std::size_t j = 0; j < n; ++j) {
      const auto it = std::find(rec.papers.begin(), rec.papers.end(), t.references[j]);
      if (it == rec.papers.end()) {
        cost += penalty;
      } else {
        const auto rank = static_cast<double>(it - rec.papers.begin());
        cost += std::abs(static_cast<double>(j) - rank);
      }
    }
  }
  return cost;
}

double fitness(const EudVector& eud, std::span<const FitnessTarget> targets,
               const FitnessOptions& options) {
  return 1.0 / (1.0 + ranking_cost(eud, targets, options));
}

EudVector de_mutate(const Individual& r1, const Individual& r2, const Individual& r3, double f) {
  if (&r1 == &r2 || &r1 == &r3 || &r2 == &r3) {
    throw Error(ErrorCategory::invalid_argument, "differential mutation needs three distinct parents");
  }
  EudVector out;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    const double v = r1.genome.values[k] + f * (r2.genome.values[k] - r3.genome.values[k]);
    out.values[k] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

EudVector de_crossover(const EudVector& variant, const EudVector& trial, double c, Rng& rng) {
  EudVector out;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    const double u = rng.uniform01();
    out.values[k] = u <= c ? variant.values[k] : trial.values[k];
  }
  return out;
}

EvolutionResult evolve(std::span<const FitnessTarget> targets, const EvolutionConfig& config,
                       const FitnessOptions& options, const GenerationCallback& on_generation) {
  config.validate();
  Rng rng(config.seed);

  std::vector<Individual> population(config.population_size);
  for (auto& ind : population) {
    for (auto& v : ind.genome.values) v = rng.uniform01();
    ind.fitness = fitness(ind.genome, targets, options);
  }

  auto best_of = [](const std::vector<Individual>& pop) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i) {
      if (*pop[i].fitness > *pop[best].fitness) best = i;
    }
    return pop[best];
  };

  EvolutionResult result;
  result.best = best_of(population);
  result.best_fitness_trace.push_back(*result.best.fitness);

  const std::size_t n = population.size();
  for (std::size_t gen = 1; gen <= config.generations; ++gen) {
    std::vector<Individual> next = population;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t a, b, c;
      do { a = rng.below(n); } while (a == i);
      do { b = rng.below(n); } while (b == i || b == a);
      do { c = rng.below(n); } while (c == i || c == a || c == b);
      const auto variant = de_mutate(population[a], population[b], population[c], config.scale_factor);
      Individual hybrid{de_crossover(variant, population[i].genome, config.crossover_rate, rng), {}};
      hybrid.fitness = fitness(hybrid.genome, targets, options);
      if (*hybrid.fitness >= *population[i].fitness) next[i] = std::move(hybrid);
    }
    population = std::move(next);
    const auto gen_best = best_of(population);
    if (*gen_best.fitness > *result.best.fitness) result.best = gen_best;
    result.best_fitness_trace.push_back(*result.best.fitness);
    if (on_generation) on_generation(gen, *result.best.fitness);
  }
  result.final_population = std::move(population);
  return result;
}

std::string format_eud(const EudVector& eud) {
  std::string out;
  char buf[32];
  for (double v : eud.values) {
    std::snprintf(buf, sizeof buf, "%.12g\n", v);
    out += buf;
  }
  return out;
}

EudVector parse_eud(std::string_view text) {
  std::istringstream in{std::string(text)};
  EudVector eud;
  std::string line;
  std::size_t k = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (k >= eud.values.size()) throw Error(ErrorCategory::parse, "EUD file has more than 10 values");
    try {
      eud.values[k++] = std::stod(line);
    } catch (const std::logic_error&) {
      throw Error(ErrorCategory::parse, "bad EUD value: " + line);
    }
  }
  if (k != eud.values.size()) throw Error(ErrorCategory::parse, "EUD file needs exactly 10 values");
  return eud;
}

void save_eud(const EudVector& eud, const std::filesystem::path& path) {
  write_file_atomic(path, format_eud(eud));
}

EudVector load_eud(const std::filesystem::path& path) { return parse_eud(read_file(path)); }

}  // namespace relsum

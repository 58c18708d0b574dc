#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swarmlink/ant.hpp"
#include "swarmlink/harness.hpp"

namespace swarmlink::evo {

struct EvoConfig {
  int population_size = 50;
  int generations = 100;
  int tournament_size = 3;
  double crossover_prob = 0.5;
  ant::MutationParams mutation;
  int elite_count = 2;
  int episodes_per_eval = 3;
  std::uint64_t master_seed = 1;
  ant::GenomeShape shape;
  int checkpoint_every = 10;  ///< 0 disables checkpoints

  void validate() const;
};

struct Individual {
  ant::Genome genome;
  std::optional<double> fitness;
  bool crashed = false;
  std::uint64_t id = 0;  ///< unique within a run, assigned in creation order
};

struct GenerationStats {
  int generation = 0;
  double best = 0.0;
  double mean = 0.0;
  double std = 0.0;
  std::uint64_t best_id = 0;
  std::size_t evaluations = 0;  ///< episodes run this generation
  std::size_t crashed = 0;
  double seconds = 0.0;
};

struct EvalResult {
  double fitness = 0.0;
  bool crashed = false;
  std::string diagnostic;
};

/// Scores one genome on a list of episode seeds.
using Evaluator = std::function<EvalResult(const ant::Genome&, std::span<const std::uint64_t> seeds)>;

/// Mean run_episode fitness over `seeds`, genome copied to every robot. A
/// diverged or throwing episode scores 0 and sets `crashed`.
EvalResult evaluate(const ant::Genome& genome, const harness::Scenario& scenario, std::span<const std::uint64_t> seeds);
Evaluator scenario_evaluator(const harness::Scenario& scenario);

/// Episode seeds for one evaluation.
std::vector<std::uint64_t> evaluation_seeds(std::uint64_t master, int generation, int individual, int episodes);

/// Single-point crossover applied independently to the motor and decision
/// gene lists (cut by list index). Header fields come from `a`.
ant::Genome crossover(const ant::Genome& a, const ant::Genome& b, ant::Rng& rng);

struct EvolveOptions {
  int jobs = 1;
  std::function<void(const GenerationStats&, const Individual& best)> on_generation;
  /// Seed population; random genomes from config.shape when empty.
  std::vector<ant::Genome> initial;
};

struct EvolveResult {
  Individual best;
  std::vector<GenerationStats> stats;
  std::vector<Individual> population;
};

EvolveResult evolve(const EvoConfig& config, const Evaluator& evaluator, const EvolveOptions& options = {});
EvolveResult evolve(const EvoConfig& config, const harness::Scenario& scenario, const EvolveOptions& options = {});

/// One JSON object: gen, best, mean, std, evals, and seconds unless `with_time` is false.
std::string stats_json(const GenerationStats& s, bool with_time = true);

}  // namespace swarmlink::evo

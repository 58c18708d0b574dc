#include "swarmlink/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <thread>

namespace swarmlink::evo {

namespace {
constexpr std::uint64_t kInitStream = 3;
constexpr std::uint64_t kBreedStream = 4;
constexpr std::uint64_t kEvalStream = 5;
}  // namespace

void EvoConfig::validate() const {
  if (population_size < 2) throw InvalidArgument("population_size must be >= 2");
  if (generations < 1) throw InvalidArgument("generations must be >= 1");
  if (tournament_size < 2 || tournament_size > population_size) {
    throw InvalidArgument("tournament_size must be in [2, population_size]");
  }
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) throw InvalidArgument("crossover_prob must be in [0, 1]");
  if (elite_count < 1 || elite_count > population_size) {
    throw InvalidArgument("elite_count must be in [1, population_size]");
  }
  if (episodes_per_eval < 1) throw InvalidArgument("episodes_per_eval must be >= 1");
  if (checkpoint_every < 0) throw InvalidArgument("checkpoint_every must be >= 0");
  if (shape.min_motor < 1 || shape.max_motor < shape.min_motor) throw InvalidArgument("bad motor gene count range");
  if (shape.min_decision < 0 || shape.max_decision < shape.min_decision) {
    throw InvalidArgument("bad decision gene count range");
  }
  if (mutation.max_extent < 0) throw InvalidArgument("max_extent must be >= 0");
  if (!(shape.two_threshold_fraction >= 0.0 && shape.two_threshold_fraction <= 1.0)) {
    throw InvalidArgument("two_threshold_fraction must be in [0, 1]");
  }
}

EvalResult evaluate(const ant::Genome& genome, const harness::Scenario& scenario,
                    std::span<const std::uint64_t> seeds) {
  EvalResult out;
  if (seeds.empty()) return out;
  double sum = 0.0;
  harness::EpisodeOptions opts;
  opts.level = harness::RecordLevel::series;
  for (auto seed : seeds) {
    try {
      const auto run = harness::run_episode(scenario, genome, seed, opts);
      if (run.summary.divergence || !std::isfinite(run.summary.fitness)) {
        out.crashed = true;
        if (out.diagnostic.empty()) out.diagnostic = "episode diverged (seed " + std::to_string(seed) + ")";
        continue;
      }
      sum += run.summary.fitness;
    } catch (const std::exception& e) {
      out.crashed = true;
      if (out.diagnostic.empty()) out.diagnostic = e.what();
    }
  }
  out.fitness = sum / static_cast<double>(seeds.size());
  return out;
}

Evaluator scenario_evaluator(const harness::Scenario& scenario) {
  return [scenario](const ant::Genome& g, std::span<const std::uint64_t> seeds) {
    return evaluate(g, scenario, seeds);
  };
}

std::vector<std::uint64_t> evaluation_seeds(std::uint64_t master, int generation, int individual, int episodes) {
  std::vector<std::uint64_t> out;
  out.reserve(static_cast<std::size_t>(std::max(episodes, 0)));
  for (int e = 0; e < episodes; ++e) {
    out.push_back(derive_seed(master, kEvalStream, static_cast<std::uint64_t>(generation),
                              static_cast<std::uint64_t>(individual), static_cast<std::uint64_t>(e)));
  }
  return out;
}

ant::Genome crossover(const ant::Genome& a, const ant::Genome& b, ant::Rng& rng) {
  auto splice = [&rng](const auto& x, const auto& y) {
    std::uniform_int_distribution<std::size_t> cut_x(0, x.size());
    std::uniform_int_distribution<std::size_t> cut_y(0, y.size());
    const std::size_t i = cut_x(rng);
    const std::size_t j = cut_y(rng);
    std::decay_t<decltype(x)> out(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(i));
    out.insert(out.end(), y.begin() + static_cast<std::ptrdiff_t>(j), y.end());
    return out;
  };
  ant::Genome child = a;
  child.motor_genes = splice(a.motor_genes, b.motor_genes);
  child.decision_genes = splice(a.decision_genes, b.decision_genes);
  // Genes taken from b must fit a's lattice.
  std::erase_if(child.motor_genes, [&child](const auto& g) { return !child.in_bounds(g.coord); });
  std::erase_if(child.decision_genes, [&child](const auto& g) { return !child.in_bounds(g.coord); });
  if (child.motor_genes.empty()) child.motor_genes.push_back(a.motor_genes.front());
  return child;
}

namespace {

void evaluate_batch(std::vector<Individual>& pop, const std::vector<std::size_t>& todo, const EvoConfig& cfg,
                    int generation, const Evaluator& evaluator, int jobs, std::size_t& crashed) {
  std::vector<EvalResult> results(todo.size());
  auto work = [&](std::size_t k) {
    const auto seeds = evaluation_seeds(cfg.master_seed, generation, static_cast<int>(todo[k]), cfg.episodes_per_eval);
    try {
      results[k] = evaluator(pop[todo[k]].genome, seeds);
    } catch (const std::exception& e) {
      results[k] = {0.0, true, e.what()};
    }
  };
  const auto n_threads = static_cast<std::size_t>(std::clamp<int>(jobs, 1, static_cast<int>(std::max<std::size_t>(todo.size(), 1))));
  if (n_threads <= 1) {
    for (std::size_t k = 0; k < todo.size(); ++k) work(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < todo.size(); k = next++) work(k);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (std::size_t k = 0; k < todo.size(); ++k) {
    auto& ind = pop[todo[k]];
    ind.crashed = results[k].crashed;
    ind.fitness = std::isfinite(results[k].fitness) ? results[k].fitness : 0.0;
    if (ind.crashed) ++crashed;
  }
}

bool better(const Individual& a, const Individual& b) {
  const double fa = a.fitness.value_or(-INFINITY);
  const double fb = b.fitness.value_or(-INFINITY);
  if (fa != fb) return fa > fb;
  return a.id < b.id;
}

const Individual& tournament(const std::vector<Individual>& pop, int size, ant::Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
  const Individual* best = &pop[pick(rng)];
  for (int i = 1; i < size; ++i) {
    const Individual& c = pop[pick(rng)];
    if (better(c, *best)) best = &c;
  }
  return *best;
}

}  // namespace

EvolveResult evolve(const EvoConfig& config, const Evaluator& evaluator, const EvolveOptions& options) {
  config.validate();
  const auto pop_size = static_cast<std::size_t>(config.population_size);
  std::uint64_t next_id = 0;

  std::vector<Individual> pop;
  pop.reserve(pop_size);
  for (std::size_t i = 0; i < pop_size; ++i) {
    Individual ind;
    if (i < options.initial.size()) {
      ind.genome = options.initial[i];
    } else {
      ant::Rng rng(derive_seed(config.master_seed, kInitStream, i));
      ind.genome = ant::random_genome(config.shape, rng);
    }
    ind.genome.validate();
    ind.id = next_id++;
    pop.push_back(std::move(ind));
  }

  EvolveResult result;
  bool have_best = false;
  for (int gen = 0; gen < config.generations; ++gen) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (!pop[i].fitness) todo.push_back(i);
    }
    GenerationStats st;
    st.generation = gen;
    evaluate_batch(pop, todo, config, gen, evaluator, options.jobs, st.crashed);
    st.evaluations = todo.size() * static_cast<std::size_t>(config.episodes_per_eval);

    double sum = 0.0;
    for (const auto& ind : pop) sum += *ind.fitness;
    st.mean = sum / static_cast<double>(pop.size());
    double var = 0.0;
    for (const auto& ind : pop) var += (*ind.fitness - st.mean) * (*ind.fitness - st.mean);
    st.std = std::sqrt(var / static_cast<double>(pop.size()));
    const auto champion = std::min_element(pop.begin(), pop.end(), better);
    st.best = *champion->fitness;
    st.best_id = champion->id;
    if (!have_best || better(*champion, result.best)) {
      result.best = *champion;
      have_best = true;
    }
    st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.stats.push_back(st);
    if (options.on_generation) options.on_generation(st, result.best);

    if (gen + 1 == config.generations) break;

    // Breed the next generation.
    ant::Rng rng(derive_seed(config.master_seed, kBreedStream, static_cast<std::uint64_t>(gen)));
    std::vector<Individual> ranked = pop;
    std::stable_sort(ranked.begin(), ranked.end(), better);
    std::vector<Individual> next;
    next.reserve(pop_size);
    for (int e = 0; e < config.elite_count; ++e) next.push_back(ranked[static_cast<std::size_t>(e)]);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    while (next.size() < pop_size) {
      const Individual& a = tournament(pop, config.tournament_size, rng);
      ant::Genome child;
      if (coin(rng) < config.crossover_prob) {
        const Individual& b = tournament(pop, config.tournament_size, rng);
        child = crossover(a.genome, b.genome, rng);
      } else {
        child = a.genome;
      }
      Individual ind;
      ind.genome = ant::perturb(child, config.mutation, rng);
      ind.id = next_id++;
      next.push_back(std::move(ind));
    }
    pop = std::move(next);
  }
  result.population = std::move(pop);
  return result;
}

EvolveResult evolve(const EvoConfig& config, const harness::Scenario& scenario, const EvolveOptions& options) {
  EvoConfig cfg = config;
  cfg.shape.actuator_count = static_cast<int>(scenario.body.thrusters.size());
  return evolve(cfg, scenario_evaluator(scenario), options);
}

std::string stats_json(const GenerationStats& s, bool with_time) {
  nlohmann::ordered_json j;
  j["gen"] = s.generation;
  j["best"] = s.best;
  j["mean"] = s.mean;
  j["std"] = s.std;
  j["best_id"] = s.best_id;
  j["evals"] = s.evaluations;
  j["crashed"] = s.crashed;
  if (with_time) j["seconds"] = s.seconds;
  return j.dump();
}

}  // namespace swarmlink::evo

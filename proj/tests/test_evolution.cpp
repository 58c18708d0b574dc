#include <gtest/gtest.h>

#include <cmath>

#include "swarmlink/evolution.hpp"

using namespace swarmlink;
using namespace swarmlink::evo;

namespace {

// Convex toy on a fixed-topology genome: one layer-0 motor gene reading a
// two-channel sensor map, so the free parameters are two weights and a bias.
double toy_loss(const ant::Genome& g) {
  double loss = 0.0;
  for (const auto& m : g.motor_genes) {
    for (double w : m.input_weights) loss += (w - 0.5) * (w - 0.5);
    loss += (m.bias - 0.5) * (m.bias - 0.5);
  }
  return loss;
}

EvalResult toy(const ant::Genome& g, std::span<const std::uint64_t>) { return {-toy_loss(g), false, {}}; }

EvoConfig small_config() {
  EvoConfig c;
  c.population_size = 30;
  c.generations = 50;
  c.episodes_per_eval = 1;
  c.shape.lattice_bounds = {1, 1, 1};
  c.shape.sensor_map = {{"a", 0}, {"b", 1}};
  c.shape.min_motor = c.shape.max_motor = 1;
  c.shape.min_decision = c.shape.max_decision = 0;
  c.mutation.motor_insert_prob = c.mutation.motor_delete_prob = 0.0;
  c.mutation.decision_insert_prob = c.mutation.decision_delete_prob = 0.0;
  return c;
}

}  // namespace

TEST(Evolution, ConvexToyConvergesAndBeatsRandomSearch) {
  const auto cfg = small_config();
  const auto res = evolve(cfg, toy);
  EXPECT_GE(*res.best.fitness, -0.05);
  EXPECT_EQ(res.best.genome.motor_genes.size(), 1u);

  ant::Rng rng(derive_seed(cfg.master_seed, 99));
  double random_best = -INFINITY;
  for (int i = 0; i < cfg.population_size * cfg.generations; ++i) {
    random_best = std::max(random_best, toy(ant::random_genome(cfg.shape, rng), {}).fitness);
  }
  EXPECT_GT(*res.best.fitness, random_best);
}

TEST(Evolution, ReproducibleStats) {
  auto cfg = small_config();
  cfg.generations = 10;
  const auto a = evolve(cfg, toy);
  const auto b = evolve(cfg, toy);
  ASSERT_EQ(a.stats.size(), b.stats.size());
  for (std::size_t i = 0; i < a.stats.size(); ++i) EXPECT_EQ(stats_json(a.stats[i], false), stats_json(b.stats[i], false));
  EXPECT_EQ(a.best.genome, b.best.genome);
  cfg.master_seed = 2;
  const auto c = evolve(cfg, toy);
  EXPECT_NE(stats_json(a.stats.back(), false), stats_json(c.stats.back(), false));
}

TEST(Evolution, ParallelMatchesSequential) {
  auto cfg = small_config();
  cfg.generations = 8;
  EvolveOptions seq, par;
  par.jobs = 4;
  const auto a = evolve(cfg, toy, seq);
  const auto b = evolve(cfg, toy, par);
  for (std::size_t i = 0; i < a.stats.size(); ++i) EXPECT_EQ(stats_json(a.stats[i], false), stats_json(b.stats[i], false));
  EXPECT_EQ(a.best.genome, b.best.genome);
}

TEST(Evolution, ElitismNeverLosesBest) {
  auto cfg = small_config();
  cfg.elite_count = 1;
  // Noisy evaluator: elites keep their recorded fitness, so the best is monotone.
  Evaluator noisy = [](const ant::Genome& g, std::span<const std::uint64_t> seeds) {
    std::mt19937_64 rng(seeds.front());
    return EvalResult{-toy_loss(g) + std::normal_distribution<double>(0, 0.2)(rng), false, {}};
  };
  const auto res = evolve(cfg, noisy);
  for (std::size_t i = 1; i < res.stats.size(); ++i) EXPECT_GE(res.stats[i].best, res.stats[i - 1].best);
}

TEST(Evolution, FrozenPopulationIsConstant) {
  auto cfg = small_config();
  cfg.generations = 5;
  cfg.elite_count = cfg.population_size;
  cfg.mutation = ant::MutationParams::none();
  const auto res = evolve(cfg, toy);
  for (const auto& s : res.stats) {
    EXPECT_EQ(s.best, res.stats.front().best);
    EXPECT_EQ(s.mean, res.stats.front().mean);
  }
  EXPECT_EQ(res.stats[1].evaluations, 0u);
}

TEST(Evolution, EvaluatorExceptionCountsAsCrash) {
  auto cfg = small_config();
  cfg.generations = 2;
  Evaluator bad = [](const ant::Genome& g, std::span<const std::uint64_t>) -> EvalResult {
    if (g.motor_genes.front().bias > 0.5) throw std::runtime_error("boom");
    return {1.0, false, {}};
  };
  EvolveOptions opt;
  opt.initial.resize(static_cast<std::size_t>(cfg.population_size));
  ant::Rng rng(1);
  std::size_t expected = 0;
  for (auto& g : opt.initial) {
    g = ant::random_genome(cfg.shape, rng);
    expected += g.motor_genes.front().bias > 0.5;
  }
  ASSERT_GT(expected, 0u);
  const auto res = evolve(cfg, bad, opt);
  EXPECT_EQ(res.stats.front().crashed, expected);
  EXPECT_EQ(*res.best.fitness, 1.0);
  EXPECT_FALSE(res.best.crashed);
}

TEST(Evolution, CrossoverClosure) {
  ant::Rng rng(5);
  ant::GenomeShape shape;
  for (int i = 0; i < 200; ++i) {
    const auto a = ant::random_genome(shape, rng);
    const auto b = ant::random_genome(shape, rng);
    const auto c = crossover(a, b, rng);
    EXPECT_NO_THROW(c.validate());
    for (const auto& g : c.motor_genes) {
      const bool from_a = std::find(a.motor_genes.begin(), a.motor_genes.end(), g) != a.motor_genes.end();
      const bool from_b = std::find(b.motor_genes.begin(), b.motor_genes.end(), g) != b.motor_genes.end();
      EXPECT_TRUE(from_a || from_b);
    }
  }
}

TEST(Evolution, CrossoverWithSelfIsSubsetOfSelf) {
  ant::Rng rng(8);
  const auto a = ant::random_genome({}, rng);
  const auto c = crossover(a, a, rng);
  EXPECT_EQ(c.lattice_bounds, a.lattice_bounds);
  EXPECT_EQ(c.sensor_map, a.sensor_map);
}

TEST(Evolution, EvaluationSeedsDistinct) {
  const auto a = evaluation_seeds(1, 0, 0, 3);
  const auto b = evaluation_seeds(1, 0, 1, 3);
  const auto c = evaluation_seeds(1, 1, 0, 3);
  EXPECT_EQ(a.size(), 3u);
  EXPECT_NE(a, b);
  EXPECT_NE(a, c);
  EXPECT_NE(a[0], a[1]);
  EXPECT_EQ(a, evaluation_seeds(1, 0, 0, 3));
}

TEST(Evolution, ConfigValidation) {
  EvoConfig c;
  EXPECT_NO_THROW(c.validate());
  c.elite_count = 51;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.elite_count = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.tournament_size = 1;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.crossover_prob = 1.5;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.population_size = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Evolution, StatsJson) {
  GenerationStats s;
  s.generation = 3;
  s.best = 0.5;
  s.seconds = 1.25;
  const auto with = stats_json(s);
  const auto without = stats_json(s, false);
  EXPECT_NE(with.find("\"seconds\""), std::string::npos);
  EXPECT_EQ(without.find("\"seconds\""), std::string::npos);
  EXPECT_EQ(without.rfind("{\"gen\":3,\"best\":0.5", 0), 0u);
}

TEST(Evolution, RealTaskSmokeRun) {
  auto scenario = harness::default_scenario();
  scenario.episode_length = 1.0;
  EvoConfig cfg;
  cfg.population_size = 6;
  cfg.generations = 3;
  cfg.episodes_per_eval = 1;
  cfg.elite_count = 1;
  const auto res = evolve(cfg, scenario);
  ASSERT_EQ(res.stats.size(), 3u);
  for (std::size_t i = 1; i < res.stats.size(); ++i) EXPECT_GE(res.stats[i].best, res.stats[i - 1].best);
  EXPECT_GE(*res.best.fitness, 0.0);
  EXPECT_LE(*res.best.fitness, 1.0);
}

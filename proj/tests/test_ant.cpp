#include <gtest/gtest.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <set>

#include "swarmlink/ant.hpp"

using namespace swarmlink;
using namespace swarmlink::ant;

namespace {

// Small hand-built genomes over a 5-channel sensor vector.
std::vector<SensorChannel> five_sensors() {
  return {{"s0", 0}, {"s1", 1}, {"s2", 2}, {"s3", 3}, {"s4", 4}};
}

Genome blank(Coord bounds = {4, 4, 3}, int actuators = 2) {
  Genome g;
  g.lattice_bounds = bounds;
  g.sensor_map = five_sensors();
  g.actuator_count = actuators;
  g.regulation_threshold = 1.0;
  return g;
}

MotorNeuronGene motor(Coord c, double bias, std::optional<int> tap = std::nullopt, double w = 0.0) {
  MotorNeuronGene m;
  m.coord = c;
  m.input_weights.assign(c.n == 0 ? 5 : kNeighborhood, w);
  m.bias = bias;
  m.actuator_tap = tap;
  return m;
}

DecisionNeuronGene decision(Coord c, Coord extent, double conc, std::vector<double> w, double threshold) {
  return {c, std::move(w), threshold, extent, conc};
}

// Always-firing decision neuron: zero weights, threshold 0 (0 >= 0).
DecisionNeuronGene always(Coord c, Coord extent, double conc) {
  return decision(c, extent, conc, std::vector<double>(5, 0.0), 0.0);
}

std::vector<double> sensor_pattern(unsigned bits) {
  std::vector<double> s(5);
  for (int i = 0; i < 5; ++i) s[static_cast<std::size_t>(i)] = (bits >> i) & 1u ? 1.0 : 0.0;
  return s;
}

}  // namespace

TEST(Develop, SingleGeneTissue) {
  auto g = blank();
  g.motor_genes.push_back(motor({0, 0, 0}, 0.0, 0));
  auto t = Tissue::develop(g);
  ASSERT_EQ(t.motor().size(), 1u);
  EXPECT_EQ(t.output_layer(), 0);
  EXPECT_EQ(t.motor()[0].weights.size(), 5u);
}

TEST(Develop, LastGeneWinsOnCollision) {
  auto g = blank();
  g.motor_genes.push_back(motor({1, 1, 0}, 0.1, 0));
  g.motor_genes.push_back(motor({1, 1, 0}, 0.9, 1));
  auto t = Tissue::develop(g);
  ASSERT_EQ(t.motor().size(), 1u);
  EXPECT_EQ(t.motor()[0].bias, 0.9);
  EXPECT_EQ(t.motor()[0].actuator_tap, 1);
}

TEST(Develop, ZeroMotorGenesIsAnError) {
  auto g = blank();
  EXPECT_THROW(Tissue::develop(g), InvalidArgument);
}

TEST(Develop, ThreeLayerWiringMatchesHandAdjacency) {
  // Layer 0: (0,0) (1,0) (3,3); layer 1: (0,1) (2,2); layer 2: (1,1).
  auto g = blank();
  for (Coord c : {Coord{0, 0, 0}, Coord{1, 0, 0}, Coord{3, 3, 0}, Coord{0, 1, 1}, Coord{2, 2, 1}, Coord{1, 1, 2}}) {
    g.motor_genes.push_back(motor(c, 0.0, 0));
  }
  auto t = Tissue::develop(g);
  EXPECT_EQ(t.output_layer(), 2);

  // Hand-drawn adjacency: neighbor slot k = (dl + 1) * 3 + (dm + 1).
  //  (0,1,1) sees below: (0,0,0) at dl=0,dm=-1 -> k=3 ; (1,0,0) at dl=+1,dm=-1 -> k=6.
  //  (2,2,1) sees below: (3,3,0) at dl=+1,dm=+1 -> k=8.
  //  (1,1,2) sees below: (0,1,1) at dl=-1,dm=0 -> k=1 ; (2,2,1) at dl=+1,dm=+1 -> k=8.
  std::map<Coord, std::map<int, Coord>> expected{
      {{0, 1, 1}, {{3, {0, 0, 0}}, {6, {1, 0, 0}}}},
      {{2, 2, 1}, {{8, {3, 3, 0}}}},
      {{1, 1, 2}, {{1, {0, 1, 1}}, {8, {2, 2, 1}}}},
  };
  for (const auto& m : t.motor()) {
    if (m.coord.n == 0) continue;
    std::map<int, Coord> got;
    for (int k = 0; k < 9; ++k) {
      if (m.afferents[static_cast<std::size_t>(k)] >= 0) {
        got[k] = t.motor()[static_cast<std::size_t>(m.afferents[static_cast<std::size_t>(k)])].coord;
      }
    }
    EXPECT_EQ(got, expected.at(m.coord));
  }
}

TEST(Develop, RejectsWrongWeightCounts) {
  auto g = blank();
  auto m = motor({0, 0, 1}, 0.0, 0);
  m.input_weights.resize(5);
  g.motor_genes.push_back(m);
  EXPECT_THROW(Tissue::develop(g), InvalidArgument);
}

TEST(Regulate, NoFiringMeansNoActiveNeurons) {
  auto g = blank();
  g.motor_genes.push_back(motor({0, 0, 0}, 0.0, 0));
  g.decision_genes.push_back(decision({0, 0, 0}, {3, 3, 2}, 5.0, {1, 0, 0, 0, 0}, 0.5));
  auto t = Tissue::develop(g);
  EXPECT_TRUE(t.regulate(std::vector<double>(5, 0.0)).empty());
  EXPECT_EQ(t.regulate(std::vector<double>{1, 0, 0, 0, 0}).size(), 1u);
}

TEST(Regulate, NeuronOutsideEveryFieldIsNeverActive) {
  auto g = blank();
  g.motor_genes.push_back(motor({3, 3, 2}, 0.0, 0));
  g.motor_genes.push_back(motor({0, 0, 0}, 0.0, 0));
  g.decision_genes.push_back(decision({0, 0, 0}, {1, 1, 1}, 2.0, {1, -1, 0.5, 0, 0}, -10.0));
  auto t = Tissue::develop(g);
  const int far = t.neuron_at({3, 3, 2});
  for (unsigned bits = 0; bits < 32; ++bits) {
    auto act = t.regulate(sensor_pattern(bits));
    EXPECT_EQ(std::count(act.begin(), act.end(), far), 0);
  }
}

TEST(Regulate, CoarseCodedOverlapSelectsIntersection) {
  auto g = blank({6, 6, 2});
  for (int n = 0; n < 2; ++n)
    for (int m = 0; m < 6; ++m)
      for (int l = 0; l < 6; ++l) g.motor_genes.push_back(motor({l, m, n}, 0.0, 0));
  g.decision_genes.push_back(always({1, 1, 0}, {2, 2, 1}, 0.6));
  g.decision_genes.push_back(always({4, 3, 1}, {1, 2, 0}, 0.6));
  auto t = Tissue::develop(g);

  // Brute-force enumeration of both boxes and their intersection.
  auto in_box = [](Coord c, Coord centre, Coord ext) {
    return std::abs(c.l - centre.l) <= ext.l && std::abs(c.m - centre.m) <= ext.m && std::abs(c.n - centre.n) <= ext.n;
  };
  std::set<Coord> expected;
  for (const auto& m : t.motor()) {
    if (in_box(m.coord, {1, 1, 0}, {2, 2, 1}) && in_box(m.coord, {4, 3, 1}, {1, 2, 0})) expected.insert(m.coord);
  }
  ASSERT_FALSE(expected.empty());
  std::set<Coord> got;
  for (int i : t.regulate(std::vector<double>(5, 0.0))) got.insert(t.motor()[static_cast<std::size_t>(i)].coord);
  EXPECT_EQ(got, expected);
}

TEST(Regulate, SensorLengthMismatchIsAnError) {
  auto g = blank();
  g.motor_genes.push_back(motor({0, 0, 0}, 0.0, 0));
  auto t = Tissue::develop(g);
  EXPECT_THROW(t.regulate(std::vector<double>(4, 0.0)), InvalidArgument);
  EXPECT_THROW(t.activate(std::vector<double>(6, 0.0)), InvalidArgument);
}

TEST(Activate, SilentDecisionNeuronsGiveNullActuation) {
  auto g = blank();
  g.motor_genes.push_back(motor({0, 0, 0}, 3.0, 0));
  g.motor_genes.push_back(motor({1, 0, 0}, 3.0, 1));
  g.decision_genes.push_back(decision({0, 0, 0}, {3, 3, 2}, 5.0, std::vector<double>(5, 0.0), 1.0));
  auto t = Tissue::develop(g);
  for (unsigned bits = 0; bits < 32; ++bits) {
    EXPECT_EQ(t.activate(sensor_pattern(bits)), (std::vector<double>{0.0, 0.0}));
  }
}

TEST(Activate, TwoNeuronHandEvaluation) {
  auto g = blank({1, 1, 1}, 1);
  g.motor_genes.push_back(motor({0, 0, 0}, 0.7, 0));
  g.decision_genes.push_back(always({0, 0, 0}, {0, 0, 0}, 1.0));
  auto t = Tissue::develop(g);
  const auto out = t.activate(std::vector<double>{0.3, -1, 2, 0, 5});
  EXPECT_DOUBLE_EQ(out[0], 1.0 / (1.0 + std::exp(-0.7)));
}

TEST(Activate, TwoThresholdUnitIsBandPass) {
  auto g = blank({1, 1, 1}, 1);
  auto m = motor({0, 0, 0}, 0.0, 0, 0.0);
  m.input_weights[0] = 1.0;
  m.activation = Activation::two_threshold;
  m.low_threshold = 0.5;
  m.high_threshold = 1.5;
  g.motor_genes.push_back(m);
  g.decision_genes.push_back(always({0, 0, 0}, {0, 0, 0}, 1.0));
  auto t = Tissue::develop(g);
  EXPECT_EQ(t.activate(std::vector<double>{0.2, 0, 0, 0, 0})[0], 0.0);
  EXPECT_EQ(t.activate(std::vector<double>{1.0, 0, 0, 0, 0})[0], 1.0);
  EXPECT_EQ(t.activate(std::vector<double>{2.0, 0, 0, 0, 0})[0], 0.0);
}

TEST(Activate, HiddenLayerFeedsOutput) {
  // Layer-0 neuron with weight 2 on s0, output neuron above it with weight 3 at slot k=4 (dl=0, dm=0).
  auto g = blank({1, 1, 2}, 1);
  auto h = motor({0, 0, 0}, 0.0, std::nullopt);
  h.input_weights[0] = 2.0;
  auto o = motor({0, 0, 1}, -1.0, 0);
  o.input_weights[4] = 3.0;
  g.motor_genes = {h, o};
  g.decision_genes.push_back(always({0, 0, 0}, {0, 0, 1}, 1.0));
  auto t = Tissue::develop(g);
  const double s0 = 0.4;
  const double expected = sigmoid(-1.0 + 3.0 * sigmoid(2.0 * s0));
  EXPECT_DOUBLE_EQ(t.activate(std::vector<double>{s0, 0, 0, 0, 0})[0], expected);
}

namespace {

// One "desired" output neuron inside a field, one "noisy" neuron on the same
// actuator outside every field, plus a second field covering the desired cell.
Genome crosstalk_tissue() {
  auto g = blank({6, 6, 1}, 1);
  auto desired = motor({1, 1, 0}, 0.2, 0);
  desired.input_weights = {0.5, -0.3, 0.8, 0.1, -0.6};
  auto noisy = motor({5, 5, 0}, 4.0, 0);
  noisy.input_weights = {3, 3, -2, 1, 7};
  g.motor_genes = {desired, noisy};
  g.decision_genes.push_back(decision({0, 0, 0}, {2, 2, 0}, 1.0, {1, 1, 0, 0, 0}, 0.0));
  g.decision_genes.push_back(decision({2, 2, 0}, {1, 1, 0}, 1.0, {0, 0, 1, 1, 1}, 0.0));
  return g;
}

}  // namespace

TEST(Activate, CrosstalkEliminatedForAllSensorPatterns) {
  const auto g = crosstalk_tissue();
  const auto t = Tissue::develop(g);
  const auto& d = g.motor_genes[0];
  for (unsigned bits = 0; bits < 32; ++bits) {
    const auto s = sensor_pattern(bits);
    double x = d.bias;
    for (int i = 0; i < 5; ++i) x += d.input_weights[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(i)];
    EXPECT_DOUBLE_EQ(t.activate(s)[0], sigmoid(x)) << "pattern " << bits;
  }
}

TEST(Regulate, RedundantFieldsSurviveDecisionNeuronLoss) {
  auto g = blank({6, 6, 1}, 1);
  g.regulation_threshold = 1.0;
  g.motor_genes = {motor({2, 2, 0}, 0.0, 0), motor({5, 0, 0}, 0.0, 0)};
  // Each field alone already raises cell (2,2) to the threshold.
  g.decision_genes.push_back(decision({1, 1, 0}, {1, 1, 0}, 1.0, {1, 0, 0, 0, 0}, -0.5));
  g.decision_genes.push_back(decision({3, 3, 0}, {1, 1, 0}, 1.0, {0, 1, 0, 0, 0}, -0.5));
  const auto full = Tissue::develop(g);
  for (std::size_t drop = 0; drop < 2; ++drop) {
    auto damaged = g;
    damaged.decision_genes.erase(damaged.decision_genes.begin() + static_cast<std::ptrdiff_t>(drop));
    const auto t = Tissue::develop(damaged);
    for (unsigned bits = 0; bits < 32; ++bits) {
      EXPECT_EQ(t.regulate(sensor_pattern(bits)), full.regulate(sensor_pattern(bits)));
    }
  }
}

TEST(Regulate, AddingAFiringFieldNeverShrinksActiveSet) {
  Rng rng(8);
  GenomeShape shape;
  shape.sensor_map = five_sensors();
  shape.lattice_bounds = {5, 5, 3};
  shape.actuator_count = 2;
  for (int trial = 0; trial < 200; ++trial) {
    auto g = random_genome(shape, rng);
    // Pick an unoccupied cell so the new gene adds a neuron instead of replacing one.
    Coord spot{0, 0, 0};
    for (int l = 0; l < 5; ++l) {
      Coord c{l, 4 - l, l % 3};
      if (std::none_of(g.decision_genes.begin(), g.decision_genes.end(), [&](auto& d) { return d.coord == c; })) spot = c;
    }
    auto more = g;
    more.decision_genes.push_back(always(spot, {1, 1, 1}, 0.7));
    const auto a = Tissue::develop(g), b = Tissue::develop(more);
    for (unsigned bits = 0; bits < 32; bits += 5) {
      auto small = a.regulate(sensor_pattern(bits));
      auto big = b.regulate(sensor_pattern(bits));
      EXPECT_TRUE(std::includes(big.begin(), big.end(), small.begin(), small.end()));
    }
  }
}

TEST(Activate, DevelopAndActivateAreDeterministic) {
  Rng rng(10);
  const auto g = random_genome(GenomeShape{}, rng);
  std::vector<double> sensors(g.sensor_count());
  for (std::size_t i = 0; i < sensors.size(); ++i) sensors[i] = std::sin(1.0 + i);
  const auto ref = Tissue::develop(g).activate(sensors);
  for (int i = 0; i < 100; ++i) {
    const auto out = Tissue::develop(g).activate(sensors);
    ASSERT_EQ(std::memcmp(out.data(), ref.data(), ref.size() * sizeof(double)), 0);
  }
  for (double x : ref) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
  }
}

TEST(Perturb, ZeroRatesLeaveGenomeUnchanged) {
  Rng rng(11);
  const auto g = random_genome(GenomeShape{}, rng);
  EXPECT_EQ(perturb(g, MutationParams::none(), rng), g);
}

TEST(Perturb, DeletionNeverRemovesLastMotorGene) {
  auto g = blank();
  g.motor_genes.push_back(motor({0, 0, 0}, 0.0, 0));
  auto p = MutationParams::none();
  p.motor_delete_prob = 1.0;
  Rng rng(12);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(perturb(g, p, rng).motor_genes.size(), 1u);
}

TEST(Perturb, WeightNoiseHasRequestedSigma) {
  auto g = blank();
  g.motor_genes.push_back(motor({0, 0, 0}, 0.0, 0));
  auto p = MutationParams::none();
  p.weight_rate = 1.0;
  p.weight_sigma = 0.1;
  Rng rng(13);
  const int n = 10'000;
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double d = perturb(g, p, rng).motor_genes[0].input_weights[2];
    s += d;
    ss += d * d;
  }
  const double mean = s / n;
  EXPECT_NEAR(std::sqrt(ss / n - mean * mean), 0.1, 0.003);
}

TEST(Perturb, OffspringSatisfyGenomeInvariants) {
  Rng rng(14);
  MutationParams p;
  p.motor_insert_prob = p.motor_delete_prob = 0.5;
  p.decision_insert_prob = p.decision_delete_prob = 0.5;
  p.extent_prob = 0.5;
  p.activation_flip_prob = p.tap_prob = 0.2;
  auto g = random_genome(GenomeShape{}, rng);
  for (int i = 0; i < 500; ++i) {
    g = perturb(g, p, rng);
    ASSERT_NO_THROW(g.validate());
    for (const auto& d : g.decision_genes) {
      EXPECT_GE(d.extent.l, 0);
      EXPECT_LE(d.extent.l, p.max_extent);
    }
  }
}

TEST(RandomGenome, BackgroundFieldActivatesEveryMotorNeuron) {
  Rng rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Coord bounds : {Coord{8, 8, 1}, Coord{7, 5, 3}, Coord{1, 1, 1}, Coord{4, 9, 2}}) {
    GenomeShape shape;
    shape.lattice_bounds = bounds;
    shape.min_decision = shape.max_decision = 0;
    shape.background_field = true;
    shape.regulation_threshold = 1.7;
    const auto g = random_genome(shape, rng);
    ASSERT_EQ(g.decision_genes.size(), 1u);
    const auto t = Tissue::develop(g);
    std::vector<double> sensors(g.sensor_count());
    for (int trial = 0; trial < 20; ++trial) {
      for (auto& x : sensors) x = u(rng);
      EXPECT_EQ(t.regulate(sensors).size(), t.motor().size());
    }
  }
}

TEST(RandomGenome, TwoThresholdFractionControlsActivations) {
  Rng rng(22);
  GenomeShape shape;
  shape.min_motor = shape.max_motor = 200;
  shape.lattice_bounds = {20, 20, 1};
  shape.two_threshold_fraction = 0.0;
  for (const auto& m : random_genome(shape, rng).motor_genes) EXPECT_EQ(m.activation, Activation::sigmoid);
  shape.two_threshold_fraction = 1.0;
  for (const auto& m : random_genome(shape, rng).motor_genes) EXPECT_EQ(m.activation, Activation::two_threshold);
}

TEST(GenomeText, RoundTripIsValueExact) {
  Rng rng(15);
  MutationParams p;
  p.activation_flip_prob = 0.3;
  for (int i = 0; i < 50; ++i) {
    auto g = random_genome(GenomeShape{}, rng);
    g = perturb(g, p, rng);
    g.motor_genes[0].actuator_tap.reset();
    g.regulation_threshold = 1.0 / 3.0;
    EXPECT_EQ(genome_from_text(genome_to_text(g)), g);
  }
}

TEST(GenomeText, MalformedInputReportsOffset) {
  Rng rng(16);
  const auto text = genome_to_text(random_genome(GenomeShape{}, rng));
  auto broken = text;
  const auto pos = broken.find("bias=");
  broken.replace(pos, 5, "bais=");
  try {
    genome_from_text(broken);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_LE(e.byte_offset(), pos);
    EXPECT_GT(e.byte_offset(), 0u);
  }
  EXPECT_THROW(genome_from_text("format_version = 2\n"), ParseError);
  EXPECT_THROW(genome_from_text(text.substr(0, 40)), ParseError);
}

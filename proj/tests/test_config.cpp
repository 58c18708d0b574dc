#include <gtest/gtest.h>

#include "swarmlink/config.hpp"

using namespace swarmlink;
using namespace swarmlink::harness;

namespace {

std::uint64_t offset_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.byte_offset();
  }
  ADD_FAILURE() << "no ParseError";
  return 0;
}

}  // namespace

TEST(Config, EmptyTextGivesDefaults) {
  const auto cfg = parse_config("");
  EXPECT_EQ(scenario_to_text(cfg.scenario), scenario_to_text(default_scenario()));
  EXPECT_EQ(cfg.evolution.population_size, 50);
  EXPECT_EQ(cfg.evolution.generations, 100);
}

TEST(Config, CanonicalTextRoundTrips) {
  Scenario s = default_scenario();
  s.n_robots = 4;
  s.formation = square_formation(4, 0.5, 0.02);
  s.loss = comms::LossModel::gilbert_elliott(0.01, 0.3, 0.05, 0.9, 0.02);
  s.encrypt = true;
  s.cipher_seed = 77;
  s.target_azimuth = 0.1234567890123;
  s.fitness_kind = FitnessKind::data_rate;
  s.noise.camera_sigma = 1.0 / 3.0;
  s.failure_schedule = {FailureEvent::kill(1.5, 2), FailureEvent::outage(2.0, 5.0, {0, 3}),
                        FailureEvent::add(3.0, {{0.5, 0.6}, {0.01, -0.02}, 0.3, 0.04}),
                        FailureEvent::retarget_to(4.0, 1.0, 0.5), FailureEvent::outage(5.0, 1.0)};
  s.initial_states = {{{1, 1}, {}, 0.1, 0}, {{1.5, 1}, {}, 0, 0}, {{1, 1.5}, {}, 0, 0}, {{1.5, 1.5}, {}, 0, 0.01}};
  const std::string text = scenario_to_text(s);
  const auto back = parse_config(text);
  EXPECT_EQ(scenario_to_text(back.scenario), text);
  EXPECT_EQ(back.scenario.failure_schedule.size(), 5u);
  EXPECT_EQ(back.scenario.failure_schedule[1].scope, (std::vector<int>{0, 3}));
  EXPECT_EQ(back.scenario.initial_states, s.initial_states);
  EXPECT_EQ(back.scenario.noise.camera_sigma, 1.0 / 3.0);
}

TEST(Config, EvolutionRoundTrips) {
  evo::EvoConfig e;
  e.population_size = 30;
  e.mutation.weight_sigma = 0.123;
  e.master_seed = 123456789012345ull;
  e.shape.two_threshold_fraction = 0.25;
  e.shape.background_field = true;
  const auto back = parse_config(evolution_to_text(e));
  EXPECT_EQ(evolution_to_text(back.evolution), evolution_to_text(e));
  EXPECT_TRUE(back.evolution.shape.background_field);
  EXPECT_EQ(back.evolution.shape.two_threshold_fraction, 0.25);
}

TEST(Config, ShippedStationKeepingConfigLoads) {
  const auto cfg = load_config(std::string(SWARMLINK_CONFIG_DIR) + "/station_keeping.ini");
  EXPECT_EQ(cfg.scenario.fitness_kind, harness::FitnessKind::formation_error);
  EXPECT_TRUE(cfg.evolution.shape.background_field);
  EXPECT_EQ(cfg.evolution.shape.lattice_bounds, (ant::Coord{8, 8, 1}));
  for (const char* name : {"reconfigure.ini", "beam_square.ini"}) {
    EXPECT_NO_THROW(load_config(std::string(SWARMLINK_CONFIG_DIR) + "/" + name)) << name;
  }
}

TEST(Config, HandWrittenFile) {
  const std::string text =
      "[meta]\nformat_version = 1\n"
      "[scenario]\nn_robots = 5\nepisode_length = 20\ntarget_azimuth_deg = 45\n"
      "[formation]\nkind = square\nspacing = 0.5\n"
      "[comms]\nloss = intermittent\n"
      "[failures]\nevent0 = kill_robot 10 3\nevent1 = comm_outage 12 5 all\n"
      "[evolution]\npopulation_size = 20\n";
  const auto cfg = parse_config(text);
  EXPECT_EQ(cfg.scenario.n_robots, 5);
  ASSERT_TRUE(cfg.scenario.formation);
  EXPECT_EQ(cfg.scenario.formation->slots.size(), 5u);
  EXPECT_NEAR(cfg.scenario.target_azimuth, 0.7853981633974483, 1e-15);
  EXPECT_EQ(cfg.scenario.loss.mode, comms::LossModel::Mode::gilbert_elliott);
  EXPECT_EQ(cfg.scenario.failure_schedule[0].kind, FailureEvent::Kind::kill_robot);
  EXPECT_EQ(cfg.scenario.failure_schedule[0].robot, 3);
  EXPECT_EQ(cfg.evolution.population_size, 20);
}

TEST(Config, UnknownKeyReportsItsLine) {
  const std::string text = "[scenario]\nn_robots = 3\nbogus = 1\n";
  EXPECT_EQ(offset_of([&] { parse_config(text); }), text.find("bogus"));
}

TEST(Config, UnknownSectionReportsItsLine) {
  const std::string text = "[scenario]\nn_robots = 3\n[nope]\nx = 1\n";
  EXPECT_EQ(offset_of([&] { parse_config(text); }), text.find("[nope]"));
}

TEST(Config, BadNumberReportsItsLine) {
  const std::string text = "[noise]\ncamera_sigma = 0.005\ngyro_sigma = 1e-3x\n";
  EXPECT_EQ(offset_of([&] { parse_config(text); }), text.find("gyro_sigma"));
}

TEST(Config, BadEventKind) {
  const std::string text = "[failures]\nevent0 = explode 1\n";
  EXPECT_EQ(offset_of([&] { parse_config(text); }), text.find("event0"));
}

TEST(Config, WrongVersion) {
  EXPECT_THROW(parse_config("[meta]\nformat_version = 2\n"), ParseError);
}

TEST(Config, SemanticErrorsAreParseErrors) {
  EXPECT_THROW(parse_config("[scenario]\ndt = 0\n"), ParseError);
  EXPECT_THROW(parse_config("[scenario]\nn_robots = 4\n[formation]\nkind = custom\nslot0 = 0 0\n"), ParseError);
  EXPECT_THROW(parse_config("[evolution]\nelite_count = 100\npopulation_size = 10\n"), ParseError);
}

TEST(Config, LoadMissingFile) { EXPECT_THROW(load_config("/nonexistent/cfg.ini"), ParseError); }

TEST(Config, Sha256KnownAnswers) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

#pragma once

#include <string>

#include "swarmlink/evolution.hpp"
#include "swarmlink/scenario.hpp"

namespace swarmlink {

inline constexpr int kConfigFormatVersion = 1;

struct ExperimentConfig {
  harness::Scenario scenario = harness::default_scenario();
  evo::EvoConfig evolution;
};

/// INI-style config: [meta] [scenario] [body] [noise] [filter] [comms] [link]
/// [formation] [initial] [failures] [evolution]. Unknown sections or keys throw
/// ParseError carrying the byte offset of the offending line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text of a scenario (every field, fixed order, exact numbers).
/// parse_config(scenario_to_text(s)).scenario reproduces s.
std::string scenario_to_text(const harness::Scenario& s);
std::string evolution_to_text(const evo::EvoConfig& e);

std::string sha256_hex(const std::string& data);

}  // namespace swarmlink

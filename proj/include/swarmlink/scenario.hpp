#pragma once

#include <optional>
#include <string>
#include <vector>

#include "swarmlink/array_physics.hpp"
#include "swarmlink/comms.hpp"
#include "swarmlink/common.hpp"
#include "swarmlink/dynamics.hpp"
#include "swarmlink/navigation.hpp"

namespace swarmlink::harness {

enum class FitnessKind { signal_strength, data_rate, formation_error };

std::string to_string(FitnessKind k);
FitnessKind fitness_kind_from_string(const std::string& s);

/// Smallest centre-to-centre distance two 0.3 m square bodies can have at any headings.
inline constexpr double kDefaultMinSeparation = 0.42426406871192851;  // 0.3 * sqrt(2)

struct FormationSpec {
  std::vector<Vec2> slots;  ///< formation frame, relative to the anchor
  double tolerance = 0.01;  ///< m

  void validate(std::size_t n_robots) const;
};

/// Smallest multiple of wavelength/2 that keeps bodies apart.
double default_formation_spacing(double wavelength, double min_separation = kDefaultMinSeparation);
/// Evenly spaced along x, centred on the origin.
FormationSpec line_formation(std::size_t n, double spacing, double tolerance = 0.01);
/// Row-major square grid of ceil(sqrt(n)) columns, centred on the origin.
FormationSpec square_formation(std::size_t n, double spacing, double tolerance = 0.01);

struct FailureEvent {
  enum class Kind { kill_robot, comm_outage, add_robot, retarget };
  Kind kind = Kind::kill_robot;
  double time = 0.0;
  int robot = -1;                   ///< kill_robot
  double duration = 0.0;            ///< comm_outage
  std::vector<int> scope;           ///< comm_outage; empty = every robot
  dynamics::RobotState initial;     ///< add_robot
  double azimuth = 0.0;             ///< retarget, rad
  double elevation = 0.0;           ///< retarget, rad

  static FailureEvent kill(double t, int robot);
  static FailureEvent outage(double start, double duration, std::vector<int> scope = {});
  static FailureEvent add(double t, const dynamics::RobotState& initial);
  static FailureEvent retarget_to(double t, double azimuth, double elevation);
};

/// Random initial conditions drawn around the formation slots (or around the anchor without a formation).
struct InitialJitter {
  double position = 0.05;         ///< m, uniform half-width per axis
  double velocity = 0.02;         ///< m/s, uniform half-width per axis
  double heading = 0.1;           ///< rad, uniform half-width
  double angular_velocity = 0.0;  ///< rad/s, uniform half-width
};

struct Scenario {
  int n_robots = 3;
  dynamics::BodyParams body = dynamics::default_body();
  nav::NoiseModel noise;
  nav::FilterGains filter;
  comms::LossModel loss = comms::LossModel::bernoulli(0.0);
  int num_channels = 8;
  bool encrypt = false;
  std::uint64_t cipher_seed = 1;
  double wavelength = array::kDefaultWavelength;
  double target_azimuth = 0.5235987755982988;  ///< rad (30 deg)
  double target_elevation = 0.3490658503988659;  ///< rad (20 deg)
  std::optional<FormationSpec> formation;
  Vec2 anchor{1.5, 1.5};    ///< formation origin on the table, m
  Vec2 table_size{3.0, 3.0};
  double min_separation = kDefaultMinSeparation;
  FitnessKind fitness_kind = FitnessKind::signal_strength;
  array::LinkBudget link;
  double episode_length = 60.0;
  double dt = 0.01;
  std::vector<dynamics::RobotState> initial_states;  ///< empty = seeded jitter
  InitialJitter jitter;
  std::vector<FailureEvent> failure_schedule;
  bool steer_from_truth = false;
  /// Control steps between a robot's failure and its removal from the steering set.
  int segregation_delay_steps = 1;
  /// Neighbour reports older than this are treated as missing, s.
  double neighbor_timeout = 0.5;

  void validate() const;
  std::size_t step_count() const;
  array::Direction target() const { return array::Direction::from_az_el(target_azimuth, target_elevation); }
};

/// Default 3-robot line scenario used by the CLI and training.
Scenario default_scenario();

}  // namespace swarmlink::harness

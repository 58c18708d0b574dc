#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swarmlink/ant.hpp"
#include "swarmlink/scenario.hpp"

namespace swarmlink::harness {

// ---------------------------------------------------------------------------
// Formation error

struct FormationResidual {
  double rms = 0.0;
  std::vector<double> per_robot;  ///< distance from each position to its aligned slot
  double rotation = 0.0;          ///< applied to the slots, rad
  Vec2 translation;
};

/// RMS residual after the best rigid (rotation + translation) alignment of
/// `slots` onto `positions`.
FormationResidual formation_error(std::span<const Vec2> positions, std::span<const Vec2> slots);
double formation_error(std::span<const dynamics::RobotState> states, const FormationSpec& spec);

// ---------------------------------------------------------------------------
// Sensor vector layout (matches ant::default_sensor_map)

namespace sensor {
inline constexpr std::size_t slot_error_x = 0, slot_error_y = 1, velocity_x = 2, velocity_y = 3, heading_sin = 4,
                             heading_cos = 5, angular_velocity = 6, target_body_x = 7, target_body_y = 8,
                             neighbor_dx = 9, neighbor_dy = 10, neighbor_dvx = 11, neighbor_dvy = 12,
                             contribution = 13, array_gain = 14, comm_health = 15, count = 16;
/// Full-scale values; each channel is value / scale clipped to [-1, 1].
inline constexpr double kSlotScale = 0.1;
inline constexpr double kVelocityScale = 0.05;
inline constexpr double kAngularScale = 0.5;
inline constexpr double kNeighborScale = 1.0;
}  // namespace sensor

// ---------------------------------------------------------------------------
// World

struct NeighborReport {
  Vec2 position;
  Vec2 velocity;
  double time = 0.0;
};

struct Robot {
  int id = 0;
  dynamics::RobotState truth;
  nav::NavEstimate estimate;
  nav::NoiseModel noise;  ///< per-robot copy carrying this robot's drawn gyro bias
  std::mt19937_64 rng;
  bool alive = true;
  bool steered = true;  ///< member of the steering set
  bool mute = false;    ///< alive but without a channel
  int segregate_in = -1;  ///< steps until removal from the steering set; -1 = not pending
  std::optional<std::size_t> slot;
  std::vector<double> duties;
  Vec2 last_accel_body;
  double last_gyro = 0.0;
  std::map<int, NeighborReport> neighbors;
  int delivered_this_step = 0;
  double next_fix_time = 0.0;
};

struct Outage {
  double start = 0.0;
  double end = 0.0;
  std::vector<int> scope;  ///< empty = everyone

  bool covers(double t) const { return t >= start && t < end; }
  bool affects(int robot) const;
};

struct World {
  std::vector<Robot> robots;
  comms::ChannelPlan plan;
  comms::LinkTable links;
  std::mt19937_64 comm_rng;
  std::vector<Outage> outages;
  std::deque<comms::Delivery> in_flight;
  std::optional<comms::SecureLink> cipher;
  array::Direction target = array::Direction({0.0, 0.0, 1.0});
  double t = 0.0;
  std::size_t next_event = 0;
  double last_gain = 0.0;
  bool mute_flag = false;
  std::uint64_t seed = 0;
  int segregation_delay_steps = 1;

  Robot* find(int id);
  bool outage_between(int a, int b, double t) const;
};

/// Builds the initial world: states, estimates, per-robot RNG streams, channel plan.
World make_world(const Scenario& scenario, std::uint64_t seed);

/// Applies every not-yet-applied event with time <= t, in schedule order.
void inject_failures(World& world, std::span<const FailureEvent> schedule, double t);

// ---------------------------------------------------------------------------
// Records

enum class RecordLevel { full, series };

struct RobotStep {
  int id = 0;
  dynamics::RobotState truth;
  Vec2 est_position;
  Vec2 est_velocity;
  double est_heading = 0.0;
  std::vector<double> duties;
  int delivered = 0;
  bool alive = true;
  bool steered = true;
};

struct StepRecord {
  double t = 0.0;
  double gain = 0.0;
  double formation_error = 0.0;
  int steered = 0;
  int delivered = 0;
  double min_distance = -1.0;  ///< closest pair of alive robots; -1 with fewer than two
  std::vector<RobotStep> robots;  ///< empty at RecordLevel::series
};

struct RunSummary {
  double fitness = 0.0;
  double mean_gain = 0.0;
  double mean_formation_error = 0.0;
  double min_separation = 0.0;
  std::size_t steps = 0;
  bool collision = false;
  bool divergence = false;
  bool mute_robot = false;

  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

struct RunRecord {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string scenario_text;
  std::vector<StepRecord> steps;
  RunSummary summary;
};

/// Recomputes the summary purely from the step series and the scenario.
/// `divergence` and `mute_robot` are carried over since they are episode events.
RunSummary summarize(const Scenario& scenario, std::span<const StepRecord> steps, bool divergence, bool mute_robot);

/// Normalized gain of the steering set: phases from estimates (or truth when the
/// scenario says so), evaluated on true positions. Robots in the set that no
/// longer transmit contribute zero amplitude while still counting in the normalization.
double steering_gain(const World& world, bool steer_from_truth, double wavelength);

struct EpisodeOptions {
  RecordLevel level = RecordLevel::full;
  std::vector<comms::TraceEvent>* trace = nullptr;
  /// Replaces the ANT controller for every alive robot when set.
  std::function<void(const Robot&, std::span<const double> sensors, std::span<double> duties)> controller;
};

/// sense -> broadcast -> control -> physics -> steering/gain -> failures, once per dt.
RunRecord run_episode(const Scenario& scenario, const ant::Genome& genome, std::uint64_t seed,
                      const EpisodeOptions& options = {});

/// Builds the sensor vector for one robot from its own estimate and message store.
void build_sensors(const World& world, const Robot& robot, const Scenario& scenario, std::span<double> out);

/// A single-motor-gene genome with no decision neurons: always null thrust.
ant::Genome null_thrust_genome();

}  // namespace swarmlink::harness

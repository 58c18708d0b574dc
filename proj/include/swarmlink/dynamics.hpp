#pragma once

#include <span>
#include <vector>

#include "swarmlink/common.hpp"

namespace swarmlink::dynamics {

struct Thruster {
  Vec2 mount_point;  ///< body frame, meters
  Vec2 direction;    ///< unit force direction, body frame
  double max_thrust = 0.2;
};

struct BodyParams {
  double mass = 10.0;
  double inertia = 0.15;
  /// Linear damping coefficients for imperfect air bearings; 0 is frictionless.
  double linear_damping = 0.0;
  double angular_damping = 0.0;
  std::vector<Thruster> thrusters;

  void validate() const;
};

/// 0.3 m square robot, 10 kg, 8 fans in corner pairs at (+-0.15, +-0.15).
///
///   idx  mount           direction  torque sign
///    0   (+a, +a)        (-1,  0)   +
///    1   (+a, +a)        ( 0, +1)   +
///    2   (-a, +a)        ( 0, +1)   -
///    3   (-a, +a)        (+1,  0)   -
///    4   (-a, -a)        (+1,  0)   +
///    5   (-a, -a)        ( 0, -1)   +
///    6   (+a, -a)        ( 0, -1)   -
///    7   (+a, -a)        (-1,  0)   -
///
/// Fans {3,4} give pure +x, {0,7} pure -x, {1,2} pure +y, {5,6} pure -y,
/// {0,1,4,5} pure counter-clockwise torque and {2,3,6,7} pure clockwise torque.
BodyParams default_body();

struct RobotState {
  Vec2 position;
  Vec2 velocity;
  double heading = 0.0;
  double angular_velocity = 0.0;

  bool finite() const;
  friend bool operator==(const RobotState&, const RobotState&) = default;
};

struct ThrusterCommand {
  std::vector<double> duties;
};

struct Wrench {
  Vec2 force;  ///< body frame, N
  double torque = 0.0;
};

/// Duties are clamped to [0, 1] before use.
Wrench thruster_wrench(const BodyParams& params, std::span<const double> duties);
inline Wrench thruster_wrench(const BodyParams& params, const ThrusterCommand& cmd) {
  return thruster_wrench(params, cmd.duties);
}

/// World-frame linear acceleration and angular acceleration produced by a
/// wrench at a given state (includes damping).
struct Acceleration {
  Vec2 linear;
  double angular = 0.0;
};
Acceleration acceleration(const RobotState& state, const BodyParams& params, const Wrench& wrench);

/// Semi-implicit Euler on the frictionless plane.
RobotState step(const RobotState& state, const BodyParams& params, std::span<const double> duties, double dt);
inline RobotState step(const RobotState& state, const BodyParams& params, const ThrusterCommand& cmd, double dt) {
  return step(state, params, std::span<const double>(cmd.duties), dt);
}

}  // namespace swarmlink::dynamics

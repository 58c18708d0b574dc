#include "swarmlink/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace swarmlink::dynamics {

void BodyParams::validate() const {
  if (!(mass > 0.0) || !(inertia > 0.0)) throw InvalidArgument("mass and inertia must be > 0");
  if (!(linear_damping >= 0.0) || !(angular_damping >= 0.0)) throw InvalidArgument("damping must be >= 0");
  if (thrusters.empty()) throw InvalidArgument("body needs at least one thruster");
  for (const auto& t : thrusters) {
    if (std::abs(norm(t.direction) - 1.0) > 1e-12) throw InvalidArgument("thruster direction must be unit-norm");
    if (!(t.max_thrust > 0.0)) throw InvalidArgument("thruster max_thrust must be > 0");
  }
}

BodyParams default_body() {
  constexpr double a = 0.15;
  constexpr double f = 0.2;
  BodyParams p;
  p.thrusters = {
      {{+a, +a}, {-1, 0}, f}, {{+a, +a}, {0, +1}, f}, {{-a, +a}, {0, +1}, f}, {{-a, +a}, {+1, 0}, f},
      {{-a, -a}, {+1, 0}, f}, {{-a, -a}, {0, -1}, f}, {{+a, -a}, {0, -1}, f}, {{+a, -a}, {-1, 0}, f},
  };
  return p;
}

bool RobotState::finite() const {
  return is_finite(position) && is_finite(velocity) && std::isfinite(heading) && std::isfinite(angular_velocity);
}

Wrench thruster_wrench(const BodyParams& params, std::span<const double> duties) {
  if (duties.size() != params.thrusters.size()) {
    throw InvalidArgument("duty count " + std::to_string(duties.size()) + " does not match thruster count " +
                          std::to_string(params.thrusters.size()));
  }
  Wrench w;
  for (std::size_t i = 0; i < duties.size(); ++i) {
    const auto& t = params.thrusters[i];
    // NaN duties count as off.
    const double d = std::isnan(duties[i]) ? 0.0 : std::clamp(duties[i], 0.0, 1.0);
    const Vec2 f = (d * t.max_thrust) * t.direction;
    w.force += f;
    w.torque += cross(t.mount_point, f);
  }
  return w;
}

Acceleration acceleration(const RobotState& s, const BodyParams& p, const Wrench& w) {
  const Vec2 force_world = rotate(w.force, s.heading) - p.linear_damping * s.velocity;
  const double torque = w.torque - p.angular_damping * s.angular_velocity;
  return {force_world / p.mass, torque / p.inertia};
}

RobotState step(const RobotState& s, const BodyParams& p, std::span<const double> duties, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be > 0");
  if (!s.finite()) throw InvalidArgument("robot state is not finite");
  const auto acc = acceleration(s, p, thruster_wrench(p, duties));
  RobotState n;
  n.velocity = s.velocity + acc.linear * dt;
  n.position = s.position + n.velocity * dt;
  n.angular_velocity = s.angular_velocity + acc.angular * dt;
  n.heading = wrap_angle(s.heading + n.angular_velocity * dt);
  return n;
}

}  // namespace swarmlink::dynamics

#include "swarmlink/navigation.hpp"

namespace swarmlink::nav {

void NoiseModel::validate() const {
  if (!(camera_sigma >= 0.0) || !(gyro_sigma >= 0.0) || !(accel_sigma >= 0.0)) {
    throw InvalidArgument("noise sigmas must be >= 0");
  }
  if (!(camera_rate > 0.0)) throw InvalidArgument("camera_rate must be > 0");
  if (!(camera_dropout_prob >= 0.0 && camera_dropout_prob <= 1.0)) {
    throw InvalidArgument("camera_dropout_prob must be in [0, 1]");
  }
  if (!std::isfinite(gyro_bias)) throw InvalidArgument("gyro_bias must be finite");
}

bool NavEstimate::finite() const {
  return is_finite(position) && is_finite(velocity) && std::isfinite(heading) && std::isfinite(timestamp);
}

std::optional<Vec2> camera_fix(Vec2 true_position, const NoiseModel& model, Rng& rng) {
  if (model.camera_dropout_prob > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < model.camera_dropout_prob) return std::nullopt;
  }
  if (model.camera_sigma == 0.0) return true_position;
  std::normal_distribution<double> n(0.0, model.camera_sigma);
  const double dx = n(rng);
  const double dy = n(rng);
  return true_position + Vec2{dx, dy};
}

ImuSample imu_sample(double omega, Vec2 accel, const NoiseModel& model, Rng& rng) {
  ImuSample s{omega + model.gyro_bias, accel};
  if (model.gyro_sigma > 0.0) {
    std::normal_distribution<double> n(0.0, model.gyro_sigma);
    s.gyro += n(rng);
  }
  if (model.accel_sigma > 0.0) {
    std::normal_distribution<double> n(0.0, model.accel_sigma);
    const double ax = n(rng);
    const double ay = n(rng);
    s.accel += Vec2{ax, ay};
  }
  return s;
}

NavEstimate fuse(const NavEstimate& prev, const ImuSample& imu, const std::optional<Vec2>& fix, double dt,
                 const FilterGains& gains) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be > 0");
  if (!prev.finite() || !std::isfinite(imu.gyro) || !is_finite(imu.accel) || (fix && !is_finite(*fix))) {
    throw InvalidArgument("non-finite navigation input");
  }
  NavEstimate e;
  e.timestamp = prev.timestamp + dt;
  // Same update order as the plant integrator: accelerate with the previous
  // heading, then advance position with the new velocity.
  e.velocity = prev.velocity + rotate(imu.accel, prev.heading) * dt;
  e.position = prev.position + e.velocity * dt;
  e.heading = wrap_angle(prev.heading + imu.gyro * dt);
  e.last_fix_time = prev.last_fix_time;

  if (fix) {
    const Vec2 innovation = *fix - e.position;
    e.position += gains.position_alpha * innovation;
    if (e.last_fix_time) {
      const double since = e.timestamp - *e.last_fix_time;
      if (since > 0.0) e.velocity += (gains.velocity_beta / since) * innovation;
    }
    e.last_fix_time = e.timestamp;
  }
  return e;
}

}  // namespace swarmlink::nav

#pragma once

#include <optional>
#include <random>

#include "swarmlink/common.hpp"

namespace swarmlink::nav {

using Rng = std::mt19937_64;

struct NoiseModel {
  double camera_sigma = 0.005;        ///< m, isotropic per axis
  double camera_rate = 10.0;          ///< Hz
  double camera_dropout_prob = 0.0;
  double gyro_sigma = 0.001;          ///< rad/s white noise
  double gyro_bias = 0.0;             ///< rad/s, constant offset added to every gyro sample
  double accel_sigma = 0.002;         ///< m/s^2 white noise

  void validate() const;
};

/// Complementary-filter gains.
struct FilterGains {
  double position_alpha = 0.3;   ///< blend toward a camera fix
  double velocity_beta = 0.05;   ///< velocity correction from the fix innovation rate
};

struct NavEstimate {
  Vec2 position;
  Vec2 velocity;
  double heading = 0.0;
  double timestamp = 0.0;
  /// Time of the last accepted camera fix; empty before the first one.
  std::optional<double> last_fix_time;

  bool finite() const;
};

struct ImuSample {
  double gyro = 0.0;  ///< rad/s
  Vec2 accel;         ///< body frame, m/s^2
};

std::optional<Vec2> camera_fix(Vec2 true_position, const NoiseModel& model, Rng& rng);

ImuSample imu_sample(double angular_velocity_true, Vec2 accel_true_body, const NoiseModel& model, Rng& rng);

/// Dead-reckons through one IMU sample over `dt`, then blends in an optional fix.
NavEstimate fuse(const NavEstimate& prev, const ImuSample& imu, const std::optional<Vec2>& fix, double dt,
                 const FilterGains& gains = {});

}  // namespace swarmlink::nav

#include <gtest/gtest.h>

#include <cmath>

#include "swarmlink/dynamics.hpp"
#include "swarmlink/navigation.hpp"

using namespace swarmlink;
using namespace swarmlink::nav;

namespace {

NoiseModel noiseless() {
  NoiseModel m;
  m.camera_sigma = 0.0;
  m.camera_dropout_prob = 0.0;
  m.gyro_sigma = 0.0;
  m.gyro_bias = 0.0;
  m.accel_sigma = 0.0;
  return m;
}

}  // namespace

TEST(CameraFix, NoiselessReturnsTruth) {
  Rng rng(1);
  auto fix = camera_fix({1.25, -0.5}, noiseless(), rng);
  ASSERT_TRUE(fix.has_value());
  EXPECT_EQ(*fix, (Vec2{1.25, -0.5}));
}

TEST(CameraFix, FullDropoutIsAlwaysAbsent) {
  auto m = noiseless();
  m.camera_dropout_prob = 1.0;
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) EXPECT_FALSE(camera_fix({0, 0}, m, rng).has_value());
}

TEST(CameraFix, EmpiricalStdMatchesSigma) {
  auto m = noiseless();
  m.camera_sigma = 0.005;
  Rng rng(3);
  const int n = 100'000;
  double sx = 0, sxx = 0;
  for (int i = 0; i < n; ++i) {
    const double x = camera_fix({0.0, 0.0}, m, rng)->x;
    sx += x;
    sxx += x * x;
  }
  const double mean = sx / n;
  const double sd = std::sqrt(sxx / n - mean * mean);
  EXPECT_NEAR(sd, 0.005, 0.02 * 0.005);
}

TEST(ImuSample, NoiselessAndBias) {
  Rng rng(4);
  auto s = imu_sample(0.3, {0.1, -0.2}, noiseless(), rng);
  EXPECT_EQ(s.gyro, 0.3);
  EXPECT_EQ(s.accel, (Vec2{0.1, -0.2}));
  auto m = noiseless();
  m.gyro_bias = 0.01;
  EXPECT_EQ(imu_sample(0.3, {}, m, rng).gyro, 0.3 + 0.01);
}

TEST(ImuSample, WhiteNoiseMeanWithinThreeSigma) {
  auto m = noiseless();
  m.gyro_sigma = 0.02;
  m.accel_sigma = 0.05;
  Rng rng(5);
  const int n = 100'000;
  double g = 0, ax = 0;
  for (int i = 0; i < n; ++i) {
    auto s = imu_sample(0.5, {1.0, 0.0}, m, rng);
    g += s.gyro;
    ax += s.accel.x;
  }
  EXPECT_NEAR(g / n, 0.5, 3 * 0.02 / std::sqrt(n));
  EXPECT_NEAR(ax / n, 1.0, 3 * 0.05 / std::sqrt(n));
}

TEST(NoiseModel, Validation) {
  NoiseModel m;
  m.camera_dropout_prob = 1.5;
  EXPECT_THROW(m.validate(), InvalidArgument);
  m = NoiseModel{};
  m.camera_rate = 0.0;
  EXPECT_THROW(m.validate(), InvalidArgument);
  m = NoiseModel{};
  m.camera_sigma = -1;
  EXPECT_THROW(m.validate(), InvalidArgument);
}

TEST(Fuse, NoiselessTracksTruth) {
  const auto body = dynamics::default_body();
  dynamics::RobotState truth{{0.5, 0.5}, {0.01, 0.0}, 0.3, 0.0};
  NavEstimate est{truth.position, truth.velocity, truth.heading, 0.0, {}};
  Rng rng(6);
  const auto model = noiseless();
  const double dt = 0.01;
  for (int i = 0; i < 3000; ++i) {
    std::vector<double> d(8);
    for (std::size_t f = 0; f < 8; ++f) d[f] = 0.5 + 0.5 * std::sin(0.01 * i * (f + 1));
    const auto acc = dynamics::acceleration(truth, body, dynamics::thruster_wrench(body, d));
    const double heading_before = truth.heading;
    truth = dynamics::step(truth, body, d, dt);
    const auto imu = imu_sample(truth.angular_velocity, rotate(acc.linear, -heading_before), model, rng);
    std::optional<Vec2> fix;
    if (i % 10 == 0) fix = camera_fix(truth.position, model, rng);
    est = fuse(est, imu, fix, dt);
    ASSERT_NEAR(est.position.x, truth.position.x, 1e-9);
    ASSERT_NEAR(est.position.y, truth.position.y, 1e-9);
    ASSERT_NEAR(est.velocity.x, truth.velocity.x, 1e-9);
    ASSERT_NEAR(std::remainder(est.heading - truth.heading, 2 * std::numbers::pi), 0.0, 1e-9);
  }
}

TEST(Fuse, GyroBiasDriftIsLinear) {
  auto model = noiseless();
  model.gyro_bias = 0.002;
  Rng rng(7);
  NavEstimate est;
  const double dt = 0.01;
  std::vector<double> errs;
  for (int i = 1; i <= 6000; ++i) {
    est = fuse(est, imu_sample(0.0, {}, model, rng), std::nullopt, dt);
    if (i % 1000 == 0) errs.push_back(est.heading);
  }
  for (std::size_t k = 0; k < errs.size(); ++k) {
    const double t = 10.0 * (k + 1);
    EXPECT_NEAR(errs[k], model.gyro_bias * t, 0.01 * model.gyro_bias * t);
  }
}

TEST(Fuse, CameraAveragingBeatsRawFixNoise) {
  // 60 s hover: truth at rest, 10 Hz camera with 5 mm noise.
  NoiseModel model;
  model.camera_sigma = 0.005;
  model.camera_rate = 10.0;
  model.gyro_sigma = 0.001;
  model.accel_sigma = 0.002;
  const double dt = 0.01;
  double total_sq = 0.0;
  int samples = 0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    const Vec2 truth{1.0, 2.0};
    NavEstimate est{truth, {}, 0.0, 0.0, {}};
    for (int i = 0; i < 6000; ++i) {
      std::optional<Vec2> fix;
      if (i % 10 == 0) fix = camera_fix(truth, model, rng);
      est = fuse(est, imu_sample(0.0, {}, model, rng), fix, dt);
      if (i >= 1000) {
        const Vec2 e = est.position - truth;
        total_sq += dot(e, e) / 2.0;  // per-axis
        ++samples;
      }
    }
  }
  const double rms = std::sqrt(total_sq / samples);
  EXPECT_LT(rms, 0.005);
}

TEST(Fuse, RejectsNonFiniteInput) {
  NavEstimate est;
  ImuSample imu;
  imu.gyro = std::numeric_limits<double>::infinity();
  EXPECT_THROW(fuse(est, imu, std::nullopt, 0.01), InvalidArgument);
  EXPECT_THROW(fuse(est, ImuSample{}, std::nullopt, 0.0), InvalidArgument);
}

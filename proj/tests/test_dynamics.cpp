#include <gtest/gtest.h>

#include <random>

#include "swarmlink/dynamics.hpp"

using namespace swarmlink;
using namespace swarmlink::dynamics;

namespace {

std::vector<double> duties_on(std::initializer_list<int> fans, double duty = 1.0) {
  std::vector<double> d(8, 0.0);
  for (int f : fans) d[static_cast<std::size_t>(f)] = duty;
  return d;
}

}  // namespace

TEST(ThrusterWrench, ZeroDutiesGiveZeroWrench) {
  const auto w = thruster_wrench(default_body(), std::vector<double>(8, 0.0));
  EXPECT_EQ(w.force, (Vec2{0, 0}));
  EXPECT_EQ(w.torque, 0.0);
}

TEST(ThrusterWrench, OpposingCollinearFansThroughCenterCancel) {
  BodyParams p;
  p.thrusters = {{{0.15, 0.0}, {-1, 0}, 0.2}, {{-0.15, 0.0}, {1, 0}, 0.2}};
  const auto w = thruster_wrench(p, std::vector<double>{1.0, 1.0});
  EXPECT_EQ(w.force, (Vec2{0, 0}));
  EXPECT_EQ(w.torque, 0.0);
}

TEST(ThrusterWrench, SingleCornerFanMatchesLayoutTable) {
  // Fan 0 sits at (+0.15, +0.15) and pushes along -x: F = (-0.2, 0),
  // torque = r x F = 0.15 * 0 - 0.15 * (-0.2) = +0.03 N m.
  const auto w0 = thruster_wrench(default_body(), duties_on({0}));
  EXPECT_DOUBLE_EQ(w0.force.x, -0.2);
  EXPECT_DOUBLE_EQ(w0.force.y, 0.0);
  EXPECT_DOUBLE_EQ(w0.torque, 0.03);
  // Fan 6 at (+0.15, -0.15) along -y: F = (0, -0.2), torque = 0.15 * -0.2 = -0.03.
  const auto w6 = thruster_wrench(default_body(), duties_on({6}));
  EXPECT_DOUBLE_EQ(w6.force.y, -0.2);
  EXPECT_DOUBLE_EQ(w6.torque, -0.03);
}

TEST(ThrusterWrench, LayoutProvidesPureTranslationAndPureTorque) {
  const auto body = default_body();
  const auto px = thruster_wrench(body, duties_on({3, 4}));
  EXPECT_DOUBLE_EQ(px.force.x, 0.4);
  EXPECT_DOUBLE_EQ(px.force.y, 0.0);
  EXPECT_DOUBLE_EQ(px.torque, 0.0);
  const auto my = thruster_wrench(body, duties_on({5, 6}));
  EXPECT_DOUBLE_EQ(my.force.y, -0.4);
  EXPECT_DOUBLE_EQ(my.torque, 0.0);
  const auto ccw = thruster_wrench(body, duties_on({0, 1, 4, 5}));
  EXPECT_EQ(ccw.force, (Vec2{0, 0}));
  EXPECT_NEAR(ccw.torque, 0.12, 1e-15);
  const auto half = thruster_wrench(body, std::vector<double>(8, 0.5));
  EXPECT_NEAR(norm(half.force), 0.0, 1e-15);
  EXPECT_NEAR(half.torque, 0.0, 1e-15);
}

TEST(ThrusterWrench, CountMismatchIsAnError) {
  EXPECT_THROW(thruster_wrench(default_body(), std::vector<double>(7, 0.0)), InvalidArgument);
}

TEST(ThrusterWrench, DutiesAreClamped) {
  const auto body = default_body();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    for (std::size_t f = 0; f < 8; ++f) {
      std::vector<double> d(8, 0.0);
      d[f] = u(rng);
      const auto w = thruster_wrench(body, d);
      EXPECT_LE(norm(w.force), body.thrusters[f].max_thrust + 1e-15);
      EXPECT_GE(dot(w.force, body.thrusters[f].direction), -1e-15);
    }
  }
}

TEST(Step, CoastingOnFrictionlessTable) {
  const auto body = default_body();
  RobotState s;
  s.velocity = {0.1, 0.0};
  const std::vector<double> off(8, 0.0);
  for (int i = 0; i < 100; ++i) s = step(s, body, off, 0.01);
  EXPECT_NEAR(s.position.x, 0.1, 1e-12);
  EXPECT_EQ(s.position.y, 0.0);
  EXPECT_EQ(s.velocity, (Vec2{0.1, 0.0}));
}

TEST(Step, NullThrustConservesMomentumExactly) {
  const auto body = default_body();
  RobotState s{{1.0, -2.0}, {0.013, -0.021}, 0.4, 0.07};
  const std::vector<double> off(8, 0.0);
  for (int i = 0; i < 5000; ++i) {
    s = step(s, body, off, 0.01);
    ASSERT_EQ(s.velocity, (Vec2{0.013, -0.021}));
    ASSERT_EQ(s.angular_velocity, 0.07);
  }
}

TEST(Step, ConstantForceGivesExactDeltaV) {
  const auto body = default_body();
  RobotState s;
  const auto d = duties_on({3, 4});  // 0.4 N along body +x, heading stays 0
  const double dt = 0.01;
  const int n = 500;
  for (int i = 0; i < n; ++i) s = step(s, body, d, dt);
  EXPECT_NEAR(s.velocity.x, 0.4 * n * dt / body.mass, 1e-14);
  EXPECT_EQ(s.heading, 0.0);
}

TEST(Step, PureTorqueMatchesAnalyticAndFineStepOracle) {
  const auto body = default_body();
  const auto d = duties_on({0, 1, 4, 5});  // 0.12 N m
  const double tau = 0.12;
  const double t_end = 2.0;
  auto run = [&](double dt) {
    RobotState s;
    const int n = static_cast<int>(std::lround(t_end / dt));
    double unwrapped = 0.0;
    for (int i = 0; i < n; ++i) {
      s = step(s, body, d, dt);
      unwrapped += s.angular_velocity * dt;
    }
    return std::pair{s, unwrapped};
  };
  const double dt = 0.01;
  auto [coarse, theta] = run(dt);
  auto [fine, theta_fine] = run(dt / 10);
  const double analytic = tau * t_end * t_end / (2 * body.inertia);
  EXPECT_NEAR(theta, analytic, dt * coarse.angular_velocity);
  EXPECT_NEAR(theta_fine, analytic, dt / 10 * fine.angular_velocity);
  EXPECT_LT(std::abs(theta_fine - analytic), std::abs(theta - analytic));
  EXPECT_NEAR(coarse.heading, wrap_angle(analytic), dt * coarse.angular_velocity);
  EXPECT_TRUE(std::abs(coarse.position.x) < 1e-15 && std::abs(coarse.position.y) < 1e-15);
}

TEST(Step, HeadingIsWrapped) {
  const auto body = default_body();
  RobotState s;
  s.heading = 3.1;
  s.angular_velocity = 1.0;
  s = step(s, body, std::vector<double>(8, 0.0), 0.1);
  EXPECT_GT(s.heading, -std::numbers::pi);
  EXPECT_LE(s.heading, std::numbers::pi);
  EXPECT_NEAR(s.heading, 3.2 - 2 * std::numbers::pi, 1e-12);
}

TEST(Step, RejectsBadInput) {
  const auto body = default_body();
  RobotState s;
  EXPECT_THROW(step(s, body, std::vector<double>(8, 0.0), 0.0), InvalidArgument);
  s.velocity.x = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(step(s, body, std::vector<double>(8, 0.0), 0.01), InvalidArgument);
}

TEST(Step, DeterministicTrajectories) {
  const auto body = default_body();
  auto run = [&] {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0, 1);
    RobotState s;
    std::vector<double> d(8);
    for (int i = 0; i < 2000; ++i) {
      for (auto& x : d) x = u(rng);
      s = step(s, body, d, 0.01);
    }
    return s;
  };
  EXPECT_EQ(run(), run());
}

TEST(Step, FirstOrderConvergence) {
  // Maneuver with a time-varying body-frame command (turn while thrusting).
  const auto body = default_body();
  auto endpoint = [&](double dt) {
    RobotState s;
    const int n = static_cast<int>(std::lround(10.0 / dt));
    for (int i = 0; i < n; ++i) {
      const double t = i * dt;
      std::vector<double> d(8, 0.0);
      d[3] = d[4] = 0.8;
      d[1] = d[2] = 0.5 + 0.5 * std::sin(0.7 * t);
      d[0] = 0.3;
      s = step(s, body, d, dt);
    }
    return s.position;
  };
  const double dt = 0.02;
  const Vec2 a = endpoint(dt), b = endpoint(dt / 2), c = endpoint(dt / 4);
  const double ratio = norm(a - b) / norm(b - c);
  EXPECT_NEAR(ratio, 2.0, 0.4);
}

TEST(Step, LinearDampingSlowsDrift) {
  auto body = default_body();
  body.linear_damping = 1.0;
  RobotState s;
  s.velocity = {0.1, 0.0};
  for (int i = 0; i < 100; ++i) s = step(s, body, std::vector<double>(8, 0.0), 0.01);
  EXPECT_LT(s.velocity.x, 0.1);
  EXPECT_GT(s.velocity.x, 0.0);
}

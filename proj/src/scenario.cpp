#include "swarmlink/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace swarmlink::harness {

std::string to_string(FitnessKind k) {
  switch (k) {
    case FitnessKind::signal_strength: return "signal_strength";
    case FitnessKind::data_rate: return "data_rate";
    case FitnessKind::formation_error: return "formation_error";
  }
  return "?";
}

FitnessKind fitness_kind_from_string(const std::string& s) {
  if (s == "signal_strength") return FitnessKind::signal_strength;
  if (s == "data_rate") return FitnessKind::data_rate;
  if (s == "formation_error") return FitnessKind::formation_error;
  throw InvalidArgument("unknown fitness kind '" + s + "'");
}

void FormationSpec::validate(std::size_t n_robots) const {
  if (slots.size() != n_robots) {
    throw InvalidArgument("formation has " + std::to_string(slots.size()) + " slots for " +
                          std::to_string(n_robots) + " robots");
  }
  if (!(tolerance > 0.0)) throw InvalidArgument("formation tolerance must be > 0");
  for (const auto& s : slots)
    if (!is_finite(s)) throw InvalidArgument("non-finite formation slot");
}

double default_formation_spacing(double wavelength, double min_separation) {
  if (!(wavelength > 0.0)) throw InvalidArgument("wavelength must be > 0");
  const double half = wavelength / 2.0;
  return std::max(1.0, std::ceil(min_separation / half - 1e-12)) * half;
}

FormationSpec line_formation(std::size_t n, double spacing, double tolerance) {
  FormationSpec f;
  f.tolerance = tolerance;
  const double mid = (static_cast<double>(n) - 1.0) / 2.0;
  for (std::size_t i = 0; i < n; ++i) f.slots.push_back({(static_cast<double>(i) - mid) * spacing, 0.0});
  return f;
}

FormationSpec square_formation(std::size_t n, double spacing, double tolerance) {
  FormationSpec f;
  f.tolerance = tolerance;
  if (n == 0) return f;
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  const std::size_t rows = (n + cols - 1) / cols;
  const double cx = (static_cast<double>(cols) - 1.0) / 2.0;
  const double cy = (static_cast<double>(rows) - 1.0) / 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    f.slots.push_back({(static_cast<double>(i % cols) - cx) * spacing, (static_cast<double>(i / cols) - cy) * spacing});
  }
  return f;
}

FailureEvent FailureEvent::kill(double t, int robot) {
  FailureEvent e;
  e.kind = Kind::kill_robot;
  e.time = t;
  e.robot = robot;
  return e;
}

FailureEvent FailureEvent::outage(double start, double duration, std::vector<int> scope) {
  FailureEvent e;
  e.kind = Kind::comm_outage;
  e.time = start;
  e.duration = duration;
  e.scope = std::move(scope);
  return e;
}

FailureEvent FailureEvent::add(double t, const dynamics::RobotState& initial) {
  FailureEvent e;
  e.kind = Kind::add_robot;
  e.time = t;
  e.initial = initial;
  return e;
}

FailureEvent FailureEvent::retarget_to(double t, double azimuth, double elevation) {
  FailureEvent e;
  e.kind = Kind::retarget;
  e.time = t;
  e.azimuth = azimuth;
  e.elevation = elevation;
  return e;
}

void Scenario::validate() const {
  if (n_robots < 1) throw InvalidArgument("n_robots must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be > 0");
  if (!(episode_length >= dt) || !std::isfinite(episode_length)) throw InvalidArgument("episode_length must be >= dt");
  if (!(wavelength > 0.0)) throw InvalidArgument("wavelength must be > 0");
  if (num_channels < 1) throw InvalidArgument("num_channels must be >= 1");
  if (!(min_separation >= 0.0)) throw InvalidArgument("min_separation must be >= 0");
  if (segregation_delay_steps < 0) throw InvalidArgument("segregation_delay_steps must be >= 0");
  if (!(neighbor_timeout > 0.0)) throw InvalidArgument("neighbor_timeout must be > 0");
  if (!(link.reference_snr > 0.0) || !(link.bandwidth_hz > 0.0)) throw InvalidArgument("link budget must be positive");
  if (!(jitter.position >= 0.0 && jitter.velocity >= 0.0 && jitter.heading >= 0.0 && jitter.angular_velocity >= 0.0)) {
    throw InvalidArgument("initial jitter must be >= 0");
  }
  body.validate();
  noise.validate();
  loss.validate();
  (void)target();
  if (formation) formation->validate(static_cast<std::size_t>(n_robots));
  if (fitness_kind == FitnessKind::formation_error && !formation) {
    throw InvalidArgument("formation_error fitness needs a formation");
  }
  if (!initial_states.empty() && initial_states.size() != static_cast<std::size_t>(n_robots)) {
    throw InvalidArgument("initial_states must list every robot");
  }
  for (const auto& s : initial_states)
    if (!s.finite()) throw InvalidArgument("non-finite initial state");
  int population = n_robots;
  double prev = 0.0;
  for (const auto& e : failure_schedule) {
    if (!(e.time >= 0.0 && e.time <= episode_length)) throw InvalidArgument("failure event outside the episode");
    if (e.time < prev) throw InvalidArgument("failure schedule must be sorted by time");
    prev = e.time;
    switch (e.kind) {
      case FailureEvent::Kind::kill_robot:
        if (e.robot < 0 || e.robot >= population) throw InvalidArgument("kill_robot names an unknown robot");
        break;
      case FailureEvent::Kind::comm_outage:
        if (!(e.duration >= 0.0)) throw InvalidArgument("outage duration must be >= 0");
        break;
      case FailureEvent::Kind::add_robot:
        if (!e.initial.finite()) throw InvalidArgument("add_robot state must be finite");
        ++population;
        break;
      case FailureEvent::Kind::retarget:
        (void)array::Direction::from_az_el(e.azimuth, e.elevation);
        break;
    }
  }
}

std::size_t Scenario::step_count() const {
  return static_cast<std::size_t>(std::llround(episode_length / dt));
}

Scenario default_scenario() {
  Scenario s;
  s.n_robots = 3;
  s.formation = line_formation(3, default_formation_spacing(s.wavelength, s.min_separation));
  return s;
}

}  // namespace swarmlink::harness

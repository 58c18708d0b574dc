#include "swarmlink/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>

#include "swarmlink/config.hpp"

namespace swarmlink::harness {

namespace {

constexpr std::uint64_t kRobotStream = 1;
constexpr std::uint64_t kCommStream = 2;
constexpr double kTimeEps = 1e-9;

double clip(double v) { return std::clamp(v, -1.0, 1.0); }

comms::Bytes encode_report(const nav::NavEstimate& e) {
  const double v[4] = {e.position.x, e.position.y, e.velocity.x, e.velocity.y};
  comms::Bytes out(sizeof v);
  std::memcpy(out.data(), v, sizeof v);
  return out;
}

std::optional<NeighborReport> decode_report(const comms::Message& m) {
  double v[4];
  if (m.payload.size() != sizeof v) return std::nullopt;
  std::memcpy(v, m.payload.data(), sizeof v);
  NeighborReport r{{v[0], v[1]}, {v[2], v[3]}, m.send_time};
  if (!is_finite(r.position) || !is_finite(r.velocity)) return std::nullopt;
  return r;
}

Robot make_robot(int id, const dynamics::RobotState& state, const Scenario& sc, std::uint64_t seed) {
  Robot r;
  r.id = id;
  r.rng.seed(derive_seed(seed, kRobotStream, static_cast<std::uint64_t>(id), 1));
  r.truth = state;
  r.noise = sc.noise;
  // Constant per-robot gyro bias, uniform in [-gyro_bias, +gyro_bias].
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  r.noise.gyro_bias = sc.noise.gyro_bias * u(r.rng);
  r.estimate = {state.position, state.velocity, state.heading, 0.0, 0.0};
  r.duties.assign(sc.body.thrusters.size(), 0.0);
  r.next_fix_time = 1.0 / sc.noise.camera_rate;
  return r;
}

Vec2 slot_world(const Scenario& sc, std::size_t slot) { return sc.anchor + sc.formation->slots[slot]; }

}  // namespace

bool Outage::affects(int robot) const {
  return scope.empty() || std::find(scope.begin(), scope.end(), robot) != scope.end();
}

Robot* World::find(int id) {
  for (auto& r : robots)
    if (r.id == id) return &r;
  return nullptr;
}

bool World::outage_between(int a, int b, double when) const {
  for (const auto& o : outages)
    if (o.covers(when) && (o.affects(a) || o.affects(b))) return true;
  return false;
}

World make_world(const Scenario& sc, std::uint64_t seed) {
  sc.validate();
  World w;
  w.seed = seed;
  w.comm_rng.seed(derive_seed(seed, kCommStream));
  w.target = sc.target();
  w.segregation_delay_steps = sc.segregation_delay_steps;

  const double spacing = default_formation_spacing(sc.wavelength, sc.min_separation);
  const auto fallback = line_formation(static_cast<std::size_t>(sc.n_robots), spacing);
  for (int i = 0; i < sc.n_robots; ++i) {
    dynamics::RobotState s;
    std::mt19937_64 init_rng(derive_seed(seed, kRobotStream, static_cast<std::uint64_t>(i), 0));
    if (!sc.initial_states.empty()) {
      s = sc.initial_states[static_cast<std::size_t>(i)];
    } else {
      const Vec2 base = sc.anchor + (sc.formation ? sc.formation->slots : fallback.slots)[static_cast<std::size_t>(i)];
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      s.position = base + Vec2{sc.jitter.position * u(init_rng), sc.jitter.position * u(init_rng)};
      s.velocity = {sc.jitter.velocity * u(init_rng), sc.jitter.velocity * u(init_rng)};
      s.heading = wrap_angle(sc.jitter.heading * u(init_rng));
      s.angular_velocity = sc.jitter.angular_velocity * u(init_rng);
    }
    Robot r = make_robot(i, s, sc, seed);
    if (sc.formation) r.slot = static_cast<std::size_t>(i);
    w.robots.push_back(std::move(r));
  }

  std::vector<comms::RobotId> with_channel;
  for (int i = 0; i < std::min(sc.n_robots, sc.num_channels); ++i) with_channel.push_back(i);
  w.plan = comms::assign_channels(with_channel, sc.num_channels);
  for (auto& r : w.robots) {
    if (!w.plan.contains(r.id)) {
      r.mute = true;
      w.mute_flag = true;
    }
  }
  if (sc.encrypt) w.cipher.emplace(comms::CipherKey::from_seed(sc.cipher_seed));
  return w;
}

void inject_failures(World& w, std::span<const FailureEvent> schedule, double t) {
  while (w.next_event < schedule.size() && schedule[w.next_event].time <= t + kTimeEps) {
    const auto& e = schedule[w.next_event++];
    switch (e.kind) {
      case FailureEvent::Kind::kill_robot: {
        Robot* r = w.find(e.robot);
        if (!r) throw InvalidArgument("kill_robot: unknown robot " + std::to_string(e.robot));
        if (!r->alive) break;
        r->alive = false;
        std::fill(r->duties.begin(), r->duties.end(), 0.0);
        if (w.segregation_delay_steps == 0) {
          r->steered = false;
        } else {
          r->segregate_in = w.segregation_delay_steps;
        }
        break;
      }
      case FailureEvent::Kind::comm_outage:
        w.outages.push_back({e.time, e.time + e.duration, e.scope});
        break;
      case FailureEvent::Kind::add_robot: {
        int id = 0;
        for (const auto& r : w.robots) id = std::max(id, r.id + 1);
        Robot r;
        r.id = id;
        r.rng.seed(derive_seed(w.seed, kRobotStream, static_cast<std::uint64_t>(id), 1));
        r.truth = e.initial;
        r.estimate = {e.initial.position, e.initial.velocity, e.initial.heading, t, t};
        // Inherit the sensor model and actuator count of the first robot.
        if (!w.robots.empty()) {
          r.noise = w.robots.front().noise;
          r.duties.assign(w.robots.front().duties.size(), 0.0);
          std::uniform_real_distribution<double> u(-1.0, 1.0);
          const double magnitude = std::abs(r.noise.gyro_bias);
          r.noise.gyro_bias = magnitude * u(r.rng);
        }
        r.next_fix_time = t + 1.0 / r.noise.camera_rate;
        std::set<int> used;
        for (const auto& [rid, ch] : w.plan.assignments) used.insert(ch);
        int free_ch = -1;
        for (int c = 0; c < w.plan.num_channels; ++c) {
          if (!used.count(c)) {
            free_ch = c;
            break;
          }
        }
        if (free_ch >= 0) {
          w.plan.assignments[id] = free_ch;
        } else {
          r.mute = true;
          w.mute_flag = true;
        }
        w.robots.push_back(std::move(r));
        break;
      }
      case FailureEvent::Kind::retarget:
        w.target = array::Direction::from_az_el(e.azimuth, e.elevation);
        break;
    }
  }
}

double steering_gain(const World& w, bool steer_from_truth, double wavelength) {
  array::ArrayConfig cfg;
  cfg.wavelength = wavelength;
  std::vector<Vec3> steer_at;
  for (const auto& r : w.robots) {
    if (!r.steered) continue;
    const Vec2 p = steer_from_truth ? r.truth.position : r.estimate.position;
    steer_at.push_back({p.x, p.y, 0.0});
    cfg.elements.push_back({{r.truth.position.x, r.truth.position.y, 0.0}, 1.0, 0.0, r.alive});
  }
  const std::size_t n = cfg.elements.size();
  if (n == 0) return 0.0;
  const auto phases = array::steering_phases(steer_at, wavelength, w.target);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    cfg.elements[i].phase = phases[i];
    any = any || cfg.elements[i].active;
  }
  if (!any) return 0.0;
  const double g = std::norm(array::array_factor(cfg, w.target)) / static_cast<double>(n * n);
  return std::min(g, 1.0);
}

void build_sensors(const World& w, const Robot& r, const Scenario& sc, std::span<double> out) {
  namespace S = sensor;
  if (out.size() != S::count) throw InvalidArgument("sensor buffer must hold 16 channels");
  std::fill(out.begin(), out.end(), 0.0);
  const auto& e = r.estimate;
  if (sc.formation && r.slot && *r.slot < sc.formation->slots.size()) {
    const Vec2 err = slot_world(sc, *r.slot) - e.position;
    out[S::slot_error_x] = clip(err.x / S::kSlotScale);
    out[S::slot_error_y] = clip(err.y / S::kSlotScale);
  }
  out[S::velocity_x] = clip(e.velocity.x / S::kVelocityScale);
  out[S::velocity_y] = clip(e.velocity.y / S::kVelocityScale);
  out[S::heading_sin] = std::sin(e.heading);
  out[S::heading_cos] = std::cos(e.heading);
  out[S::angular_velocity] = clip(r.last_gyro / S::kAngularScale);
  const Vec3& u = w.target.vec();
  const Vec2 body = rotate({u.x, u.y}, -e.heading);
  out[S::target_body_x] = body.x;
  out[S::target_body_y] = body.y;

  const NeighborReport* nearest = nullptr;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [id, rep] : r.neighbors) {
    if (w.t - rep.time > sc.neighbor_timeout) continue;
    const double d = norm(rep.position - e.position);
    if (d < best) {
      best = d;
      nearest = &rep;
    }
  }
  if (nearest) {
    out[S::neighbor_dx] = clip((nearest->position.x - e.position.x) / S::kNeighborScale);
    out[S::neighbor_dy] = clip((nearest->position.y - e.position.y) / S::kNeighborScale);
    out[S::neighbor_dvx] = clip((nearest->velocity.x - e.velocity.x) / S::kVelocityScale);
    out[S::neighbor_dvy] = clip((nearest->velocity.y - e.velocity.y) / S::kVelocityScale);
  }
  out[S::contribution] = r.steered ? 1.0 : 0.0;
  const bool heard = r.delivered_this_step > 0;
  out[S::array_gain] = heard ? w.last_gain : 0.0;
  out[S::comm_health] = heard ? 1.0 : 0.0;
}

ant::Genome null_thrust_genome() {
  ant::Genome g;
  ant::MotorNeuronGene m;
  m.coord = {0, 0, 0};
  m.input_weights.assign(g.sensor_count(), 0.0);
  m.actuator_tap = 0;
  g.motor_genes.push_back(m);
  return g;
}

RunSummary summarize(const Scenario& sc, std::span<const StepRecord> steps, bool divergence, bool mute_robot) {
  RunSummary s;
  s.steps = steps.size();
  s.divergence = divergence;
  s.mute_robot = mute_robot;
  s.min_separation = -1.0;
  if (steps.empty()) return s;
  std::vector<double> gains;
  std::vector<std::size_t> active;
  gains.reserve(steps.size());
  active.reserve(steps.size());
  double err_sum = 0.0;
  double closeness = 0.0;
  for (const auto& st : steps) {
    gains.push_back(st.gain);
    active.push_back(static_cast<std::size_t>(st.steered));
    err_sum += st.formation_error;
    if (sc.formation) closeness += sc.formation->tolerance / (sc.formation->tolerance + st.formation_error);
    if (st.min_distance >= 0.0 && (s.min_separation < 0.0 || st.min_distance < s.min_separation)) {
      s.min_separation = st.min_distance;
    }
  }
  const double n = static_cast<double>(steps.size());
  s.mean_gain = array::fitness_signal_strength(gains);
  s.mean_formation_error = err_sum / n;
  s.collision = s.min_separation >= 0.0 && s.min_separation < sc.min_separation;
  if (divergence) {
    s.fitness = 0.0;
    return s;
  }
  switch (sc.fitness_kind) {
    case FitnessKind::signal_strength: s.fitness = s.mean_gain; break;
    case FitnessKind::data_rate: s.fitness = array::fitness_data_rate(gains, sc.link, active); break;
    case FitnessKind::formation_error: s.fitness = closeness / n; break;
  }
  return s;
}

RunRecord run_episode(const Scenario& sc, const ant::Genome& genome, std::uint64_t seed, const EpisodeOptions& opt) {
  World w = make_world(sc, seed);
  std::optional<ant::Tissue> tissue;
  if (!opt.controller) {
    tissue = ant::Tissue::develop(genome);
    if (tissue->sensor_count() != sensor::count) throw InvalidArgument("genome sensor map must have 16 channels");
    if (tissue->actuator_count() != static_cast<int>(sc.body.thrusters.size())) {
      throw InvalidArgument("genome actuator count does not match the thruster layout");
    }
  }
  ant::Scratch scratch;

  RunRecord rec;
  rec.seed = seed;
  rec.scenario_text = scenario_to_text(sc);
  rec.config_hash = sha256_hex(rec.scenario_text);
  const std::size_t steps = sc.step_count();
  rec.steps.reserve(steps);
  inject_failures(w, sc.failure_schedule, 0.0);

  std::array<double, sensor::count> sensors{};
  std::vector<comms::Message> outbox;
  std::vector<comms::TraceEvent> local_trace;
  bool diverged = false;

  for (std::size_t k = 0; k < steps && !diverged; ++k) {
    const double t = static_cast<double>(k) * sc.dt;
    const double t_next = static_cast<double>(k + 1) * sc.dt;
    w.t = t;

    // Broadcast and delivery.
    w.links.advance(w.plan, sc.loss, w.comm_rng);
    outbox.clear();
    for (auto& r : w.robots) {
      r.delivered_this_step = 0;
      if (!r.alive || r.mute) continue;
      outbox.push_back({r.id, encode_report(r.estimate), t});
    }
    local_trace.clear();
    auto deliveries = comms::deliver(outbox, w.plan, sc.loss, w.links, w.comm_rng, t, opt.trace ? &local_trace : nullptr);
    for (auto& d : deliveries) {
      if (w.outage_between(d.message.sender, d.receiver, t) ||
          w.outage_between(d.message.sender, d.receiver, d.deliver_time)) {
        if (opt.trace) {
          for (auto& ev : local_trace) {
            if (ev.kind == comms::TraceEvent::Kind::delivered && ev.sender == d.message.sender &&
                ev.receiver == d.receiver) {
              ev.kind = comms::TraceEvent::Kind::dropped;
              ev.t = t;
            }
          }
        }
        continue;
      }
      if (w.cipher) {
        // Frames go over the air encrypted; receivers hold the shared key.
        auto frame = w.cipher->seal(d.message);
        auto opened = w.cipher->open(frame, d.message.sender);
        if (!opened) continue;
        d.message = std::move(*opened);
      }
      w.in_flight.push_back(std::move(d));
    }
    if (opt.trace) opt.trace->insert(opt.trace->end(), local_trace.begin(), local_trace.end());
    while (!w.in_flight.empty() && w.in_flight.front().deliver_time <= t + kTimeEps) {
      const auto d = std::move(w.in_flight.front());
      w.in_flight.pop_front();
      Robot* rx = w.find(d.receiver);
      if (!rx || !rx->alive) continue;
      if (auto rep = decode_report(d.message)) {
        rx->neighbors[d.message.sender] = *rep;
        ++rx->delivered_this_step;
      }
    }

    // Control.
    for (auto& r : w.robots) {
      if (!r.alive) {
        std::fill(r.duties.begin(), r.duties.end(), 0.0);
        continue;
      }
      build_sensors(w, r, sc, sensors);
      if (opt.controller) {
        opt.controller(r, sensors, r.duties);
      } else {
        tissue->activate(sensors, r.duties, scratch);
      }
    }

    // Physics, then sensing of the new state.
    try {
      for (auto& r : w.robots) {
        const auto wrench = dynamics::thruster_wrench(sc.body, r.duties);
        const auto acc = dynamics::acceleration(r.truth, sc.body, wrench);
        const double heading_before = r.truth.heading;
        r.truth = dynamics::step(r.truth, sc.body, r.duties, sc.dt);
        r.last_accel_body = rotate(acc.linear, -heading_before);
        if (!r.alive) continue;
        const auto imu = nav::imu_sample(r.truth.angular_velocity, r.last_accel_body, r.noise, r.rng);
        std::optional<Vec2> fix;
        if (t_next + kTimeEps >= r.next_fix_time) {
          fix = nav::camera_fix(r.truth.position, r.noise, r.rng);
          r.next_fix_time += 1.0 / r.noise.camera_rate;
        }
        r.estimate = nav::fuse(r.estimate, imu, fix, sc.dt, sc.filter);
        r.last_gyro = imu.gyro;
      }
    } catch (const InvalidArgument&) {
      diverged = true;
      break;
    }
    for (const auto& r : w.robots) {
      if (!r.truth.finite()) diverged = true;
    }
    if (diverged) break;

    // Steering and metrics.
    w.t = t_next;
    StepRecord st;
    st.t = t_next;
    st.gain = steering_gain(w, sc.steer_from_truth, sc.wavelength);
    w.last_gain = st.gain;
    if (sc.formation) {
      std::vector<Vec2> pos, slots;
      for (const auto& r : w.robots) {
        if (r.alive && r.slot) {
          pos.push_back(r.truth.position);
          slots.push_back(sc.formation->slots[*r.slot]);
        }
      }
      st.formation_error = formation_error(pos, slots).rms;
    }
    for (std::size_t i = 0; i < w.robots.size(); ++i) {
      const auto& a = w.robots[i];
      st.steered += a.steered ? 1 : 0;
      st.delivered += a.delivered_this_step;
      if (!a.alive) continue;
      for (std::size_t j = i + 1; j < w.robots.size(); ++j) {
        if (!w.robots[j].alive) continue;
        const double d = norm(a.truth.position - w.robots[j].truth.position);
        if (st.min_distance < 0.0 || d < st.min_distance) st.min_distance = d;
      }
    }
    if (opt.level == RecordLevel::full) {
      for (const auto& r : w.robots) {
        st.robots.push_back({r.id, r.truth, r.estimate.position, r.estimate.velocity, r.estimate.heading, r.duties,
                             r.delivered_this_step, r.alive, r.steered});
      }
    }
    rec.steps.push_back(std::move(st));

    // Failures: pending segregations first, then newly due events.
    for (auto& r : w.robots) {
      if (r.segregate_in > 0 && --r.segregate_in == 0) {
        r.steered = false;
        r.segregate_in = -1;
      }
    }
    inject_failures(w, sc.failure_schedule, t_next);
  }

  rec.summary = summarize(sc, rec.steps, diverged, w.mute_flag);
  return rec;
}

}  // namespace swarmlink::harness

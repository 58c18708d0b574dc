#include "swarmlink/config.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace swarmlink {

namespace pt = boost::property_tree;
using harness::FailureEvent;

namespace {

std::string num(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string num(int x) { return std::to_string(x); }

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

/// Byte offset of `key` inside `[section]`, or of the section header, for error messages.
std::uint64_t offset_of(const std::string& text, const std::string& section, const std::string& key = {}) {
  std::size_t pos = 0;
  bool in_section = section.empty();
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    const auto first = line.find_first_not_of(" \t\r");
    line = first == std::string::npos ? std::string() : line.substr(first);
    if (!line.empty() && line[0] == '[') {
      const auto close = line.find(']');
      const std::string name = line.substr(1, close == std::string::npos ? std::string::npos : close - 1);
      if (in_section && !key.empty() && name != section) {
        // left the section without seeing the key
      }
      in_section = name == section;
      if (in_section && key.empty()) return pos;
    } else if (in_section && !key.empty()) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        std::string k = line.substr(0, eq);
        while (!k.empty() && (k.back() == ' ' || k.back() == '\t')) k.pop_back();
        if (k == key) return pos;
      }
    }
    pos = end + 1;
  }
  return 0;
}

class Reader {
 public:
  Reader(const std::string& text, const pt::ptree& tree, const std::string& section)
      : text_(text), section_(section) {
    if (auto child = tree.get_child_optional(section)) node_ = &*child;
  }

  bool present() const { return node_ != nullptr; }

  std::optional<std::string> raw(const std::string& key) {
    seen_.insert(key);
    if (!node_) return std::nullopt;
    auto v = node_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    auto s = *v;
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
    return s;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw ParseError("[" + section_ + "] " + key + ": " + why, offset_of(text_, section_, key));
  }

  double real(const std::string& key, double fallback) {
    auto s = raw(key);
    if (!s) return fallback;
    return parse_real(key, *s);
  }

  double parse_real(const std::string& key, const std::string& s) const {
    double x = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail(key, "expected a number, got '" + s + "'");
    return x;
  }

  template <typename Int>
  Int integer(const std::string& key, Int fallback) {
    auto s = raw(key);
    if (!s) return fallback;
    Int x{};
    auto r = std::from_chars(s->data(), s->data() + s->size(), x);
    if (r.ec != std::errc() || r.ptr != s->data() + s->size()) fail(key, "expected an integer, got '" + *s + "'");
    return x;
  }

  bool boolean(const std::string& key, bool fallback) {
    auto s = raw(key);
    if (!s) return fallback;
    if (*s == "true" || *s == "1" || *s == "yes") return true;
    if (*s == "false" || *s == "0" || *s == "no") return false;
    fail(key, "expected true or false");
  }

  std::string str(const std::string& key, const std::string& fallback) { return raw(key).value_or(fallback); }

  /// Keys matching prefix followed by digits, in numeric order.
  std::vector<std::pair<std::string, std::string>> indexed(const std::string& prefix) {
    std::map<long, std::pair<std::string, std::string>> found;
    if (node_) {
      for (const auto& [k, v] : *node_) {
        if (k.rfind(prefix, 0) != 0 || k.size() == prefix.size()) continue;
        const std::string digits = k.substr(prefix.size());
        long idx = 0;
        auto r = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
        if (r.ec != std::errc() || r.ptr != digits.data() + digits.size()) continue;
        seen_.insert(k);
        if (!found.emplace(idx, std::make_pair(k, v.data())).second) fail(k, "duplicate index");
      }
    }
    std::vector<std::pair<std::string, std::string>> out;
    for (auto& [i, kv] : found) out.push_back(kv);
    return out;
  }

  void reject_unknown() const {
    if (!node_) return;
    for (const auto& [k, v] : *node_) {
      if (!seen_.count(k)) fail(k, "unknown key");
    }
  }

 private:
  const std::string& text_;
  std::string section_;
  const pt::ptree* node_ = nullptr;
  std::set<std::string> seen_;
};

std::vector<double> reals(Reader& rd, const std::string& key, const std::string& value, std::size_t n) {
  const auto toks = split_ws(value);
  if (toks.size() != n) rd.fail(key, "expected " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (const auto& t : toks) out.push_back(rd.parse_real(key, t));
  return out;
}

FailureEvent parse_event(Reader& rd, const std::string& key, const std::string& value) {
  const auto toks = split_ws(value);
  if (toks.size() < 2) rd.fail(key, "expected '<kind> <time> ...'");
  const std::string& kind = toks[0];
  auto real_at = [&](std::size_t i) { return rd.parse_real(key, toks[i]); };
  auto need = [&](std::size_t n) {
    if (toks.size() != n) rd.fail(key, kind + " takes " + std::to_string(n - 1) + " fields");
  };
  if (kind == "kill_robot") {
    need(3);
    int id = 0;
    auto r = std::from_chars(toks[2].data(), toks[2].data() + toks[2].size(), id);
    if (r.ec != std::errc() || r.ptr != toks[2].data() + toks[2].size()) rd.fail(key, "bad robot id");
    return FailureEvent::kill(real_at(1), id);
  }
  if (kind == "comm_outage") {
    if (toks.size() != 3 && toks.size() != 4) rd.fail(key, "comm_outage takes <start> <duration> [all|id,id,...]");
    std::vector<int> scope;
    if (toks.size() == 4 && toks[3] != "all") {
      std::stringstream ss(toks[3]);
      std::string part;
      while (std::getline(ss, part, ',')) {
        int id = 0;
        auto r = std::from_chars(part.data(), part.data() + part.size(), id);
        if (r.ec != std::errc() || r.ptr != part.data() + part.size()) rd.fail(key, "bad outage scope");
        scope.push_back(id);
      }
    }
    return FailureEvent::outage(real_at(1), real_at(2), scope);
  }
  if (kind == "add_robot") {
    need(8);
    dynamics::RobotState s{{real_at(2), real_at(3)}, {real_at(5), real_at(6)}, real_at(4), real_at(7)};
    return FailureEvent::add(real_at(1), s);
  }
  if (kind == "retarget") {
    need(4);
    return FailureEvent::retarget_to(real_at(1), real_at(2), real_at(3));
  }
  rd.fail(key, "unknown event kind '" + kind + "'");
}

std::string event_text(const FailureEvent& e) {
  switch (e.kind) {
    case FailureEvent::Kind::kill_robot: return "kill_robot " + num(e.time) + " " + num(e.robot);
    case FailureEvent::Kind::comm_outage: {
      std::string scope = "all";
      if (!e.scope.empty()) {
        scope.clear();
        for (std::size_t i = 0; i < e.scope.size(); ++i) scope += (i ? "," : "") + num(e.scope[i]);
      }
      return "comm_outage " + num(e.time) + " " + num(e.duration) + " " + scope;
    }
    case FailureEvent::Kind::add_robot:
      return "add_robot " + num(e.time) + " " + num(e.initial.position.x) + " " + num(e.initial.position.y) + " " +
             num(e.initial.heading) + " " + num(e.initial.velocity.x) + " " + num(e.initial.velocity.y) + " " +
             num(e.initial.angular_velocity);
    case FailureEvent::Kind::retarget:
      return "retarget " + num(e.time) + " " + num(e.azimuth) + " " + num(e.elevation);
  }
  return {};
}

const std::set<std::string> kSections = {"meta",  "scenario",  "body",    "noise",   "filter",   "comms",
                                         "link",  "formation", "initial", "failures", "evolution"};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  {
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
      // Convert the reported line to a byte offset.
      std::uint64_t offset = 0;
      unsigned long line = 1;
      for (std::size_t i = 0; i < text.size() && line < e.line(); ++i) {
        if (text[i] == '\n') {
          ++line;
          offset = i + 1;
        }
      }
      throw ParseError("config: " + e.message(), offset);
    }
  }
  for (const auto& [name, node] : tree) {
    if (node.empty() && !node.data().empty()) throw ParseError("config: key '" + name + "' outside any section", offset_of(text, "", name));
    if (!kSections.count(name)) throw ParseError("config: unknown section [" + name + "]", offset_of(text, name));
  }

  ExperimentConfig cfg;
  auto& s = cfg.scenario;

  Reader meta(text, tree, "meta");
  const int version = meta.integer<int>("format_version", kConfigFormatVersion);
  if (version != kConfigFormatVersion) meta.fail("format_version", "unsupported version " + std::to_string(version));
  meta.reject_unknown();

  Reader sc(text, tree, "scenario");
  s.n_robots = sc.integer<int>("n_robots", s.n_robots);
  s.episode_length = sc.real("episode_length", s.episode_length);
  s.dt = sc.real("dt", s.dt);
  s.fitness_kind = harness::fitness_kind_from_string(sc.str("fitness", to_string(s.fitness_kind)));
  s.wavelength = sc.real("wavelength", s.wavelength);
  {
    const bool rad = sc.raw("target_azimuth").has_value();
    const bool deg = sc.raw("target_azimuth_deg").has_value();
    if (rad && deg) sc.fail("target_azimuth_deg", "give target_azimuth or target_azimuth_deg, not both");
    s.target_azimuth = deg ? sc.real("target_azimuth_deg", 0.0) * std::numbers::pi / 180.0
                           : sc.real("target_azimuth", s.target_azimuth);
    const bool erad = sc.raw("target_elevation").has_value();
    const bool edeg = sc.raw("target_elevation_deg").has_value();
    if (erad && edeg) sc.fail("target_elevation_deg", "give target_elevation or target_elevation_deg, not both");
    s.target_elevation = edeg ? sc.real("target_elevation_deg", 0.0) * std::numbers::pi / 180.0
                              : sc.real("target_elevation", s.target_elevation);
  }
  s.anchor = {sc.real("anchor_x", s.anchor.x), sc.real("anchor_y", s.anchor.y)};
  s.table_size = {sc.real("table_x", s.table_size.x), sc.real("table_y", s.table_size.y)};
  s.min_separation = sc.real("min_separation", s.min_separation);
  s.steer_from_truth = sc.boolean("steer_from_truth", s.steer_from_truth);
  s.segregation_delay_steps = sc.integer<int>("segregation_delay_steps", s.segregation_delay_steps);
  s.neighbor_timeout = sc.real("neighbor_timeout", s.neighbor_timeout);
  sc.reject_unknown();

  Reader body(text, tree, "body");
  s.body.mass = body.real("mass", s.body.mass);
  s.body.inertia = body.real("inertia", s.body.inertia);
  s.body.linear_damping = body.real("linear_damping", s.body.linear_damping);
  s.body.angular_damping = body.real("angular_damping", s.body.angular_damping);
  if (auto fans = body.indexed("thruster"); !fans.empty()) {
    s.body.thrusters.clear();
    for (const auto& [k, v] : fans) {
      const auto x = reals(body, k, v, 5);
      s.body.thrusters.push_back({{x[0], x[1]}, {x[2], x[3]}, x[4]});
    }
  }
  body.reject_unknown();

  Reader noise(text, tree, "noise");
  s.noise.camera_sigma = noise.real("camera_sigma", s.noise.camera_sigma);
  s.noise.camera_rate = noise.real("camera_rate", s.noise.camera_rate);
  s.noise.camera_dropout_prob = noise.real("camera_dropout_prob", s.noise.camera_dropout_prob);
  s.noise.gyro_sigma = noise.real("gyro_sigma", s.noise.gyro_sigma);
  s.noise.gyro_bias = noise.real("gyro_bias", s.noise.gyro_bias);
  s.noise.accel_sigma = noise.real("accel_sigma", s.noise.accel_sigma);
  noise.reject_unknown();

  Reader filter(text, tree, "filter");
  s.filter.position_alpha = filter.real("position_alpha", s.filter.position_alpha);
  s.filter.velocity_beta = filter.real("velocity_beta", s.filter.velocity_beta);
  filter.reject_unknown();

  Reader cm(text, tree, "comms");
  {
    const std::string mode = cm.str("loss", "bernoulli");
    const double latency = cm.real("latency", 0.0);
    if (mode == "bernoulli") {
      s.loss = comms::LossModel::bernoulli(cm.real("p", 0.0), latency);
    } else if (mode == "gilbert_elliott") {
      s.loss = comms::LossModel::gilbert_elliott(cm.real("p_good_to_bad", 0.0), cm.real("p_bad_to_good", 1.0),
                                                 cm.real("loss_good", 0.0), cm.real("loss_bad", 1.0), latency);
    } else if (mode == "intermittent") {
      s.loss = comms::LossModel::intermittent(s.dt);
      s.loss.latency = latency;
    } else {
      cm.fail("loss", "expected bernoulli, gilbert_elliott or intermittent");
    }
    for (const char* k : {"p", "p_good_to_bad", "p_bad_to_good", "loss_good", "loss_bad"}) {
      if (cm.raw(k) && mode != (std::string(k) == "p" ? "bernoulli" : "gilbert_elliott")) {
        cm.fail(k, "not used by loss = " + mode);
      }
    }
  }
  s.num_channels = cm.integer<int>("num_channels", s.num_channels);
  s.encrypt = cm.boolean("encrypt", s.encrypt);
  s.cipher_seed = cm.integer<std::uint64_t>("cipher_seed", s.cipher_seed);
  cm.reject_unknown();

  Reader link(text, tree, "link");
  s.link.reference_snr = link.real("reference_snr", s.link.reference_snr);
  s.link.bandwidth_hz = link.real("bandwidth_hz", s.link.bandwidth_hz);
  link.reject_unknown();

  Reader fm(text, tree, "formation");
  {
    const std::string kind = fm.str("kind", "line");
    const double tol = fm.real("tolerance", 0.01);
    const double spacing = fm.real("spacing", harness::default_formation_spacing(s.wavelength, s.min_separation));
    const auto n = static_cast<std::size_t>(std::max(0, s.n_robots));
    auto slots = fm.indexed("slot");
    if (kind != "custom" && !slots.empty()) fm.fail(slots.front().first, "slots are only read for kind = custom");
    if (kind == "none") {
      s.formation.reset();
    } else if (kind == "line") {
      s.formation = harness::line_formation(n, spacing, tol);
    } else if (kind == "square") {
      s.formation = harness::square_formation(n, spacing, tol);
    } else if (kind == "custom") {
      harness::FormationSpec f;
      f.tolerance = tol;
      for (const auto& [k, v] : slots) {
        const auto x = reals(fm, k, v, 2);
        f.slots.push_back({x[0], x[1]});
      }
      s.formation = f;
    } else {
      fm.fail("kind", "expected none, line, square or custom");
    }
  }
  fm.reject_unknown();

  Reader init(text, tree, "initial");
  {
    const std::string mode = init.str("mode", "jitter");
    s.jitter.position = init.real("position_jitter", s.jitter.position);
    s.jitter.velocity = init.real("velocity_jitter", s.jitter.velocity);
    s.jitter.heading = init.real("heading_jitter", s.jitter.heading);
    s.jitter.angular_velocity = init.real("angular_velocity_jitter", s.jitter.angular_velocity);
    auto robots = init.indexed("robot");
    if (mode == "explicit") {
      for (const auto& [k, v] : robots) {
        const auto x = reals(init, k, v, 6);
        s.initial_states.push_back({{x[0], x[1]}, {x[3], x[4]}, x[2], x[5]});
      }
    } else if (mode == "jitter") {
      if (!robots.empty()) init.fail(robots.front().first, "robot states are only read for mode = explicit");
    } else {
      init.fail("mode", "expected jitter or explicit");
    }
  }
  init.reject_unknown();

  Reader fail(text, tree, "failures");
  for (const auto& [k, v] : fail.indexed("event")) s.failure_schedule.push_back(parse_event(fail, k, v));
  fail.reject_unknown();

  Reader ev(text, tree, "evolution");
  auto& e = cfg.evolution;
  e.population_size = ev.integer<int>("population_size", e.population_size);
  e.generations = ev.integer<int>("generations", e.generations);
  e.tournament_size = ev.integer<int>("tournament_size", e.tournament_size);
  e.crossover_prob = ev.real("crossover_prob", e.crossover_prob);
  e.elite_count = ev.integer<int>("elite_count", e.elite_count);
  e.episodes_per_eval = ev.integer<int>("episodes_per_eval", e.episodes_per_eval);
  e.master_seed = ev.integer<std::uint64_t>("master_seed", e.master_seed);
  e.checkpoint_every = ev.integer<int>("checkpoint_every", e.checkpoint_every);
  auto& m = e.mutation;
  m.weight_rate = ev.real("weight_rate", m.weight_rate);
  m.weight_sigma = ev.real("weight_sigma", m.weight_sigma);
  m.threshold_rate = ev.real("threshold_rate", m.threshold_rate);
  m.threshold_sigma = ev.real("threshold_sigma", m.threshold_sigma);
  m.motor_insert_prob = ev.real("motor_insert_prob", m.motor_insert_prob);
  m.motor_delete_prob = ev.real("motor_delete_prob", m.motor_delete_prob);
  m.decision_insert_prob = ev.real("decision_insert_prob", m.decision_insert_prob);
  m.decision_delete_prob = ev.real("decision_delete_prob", m.decision_delete_prob);
  m.extent_prob = ev.real("extent_prob", m.extent_prob);
  m.activation_flip_prob = ev.real("activation_flip_prob", m.activation_flip_prob);
  m.tap_prob = ev.real("tap_prob", m.tap_prob);
  m.max_extent = ev.integer<int>("max_extent", m.max_extent);
  auto& sh = e.shape;
  sh.min_motor = ev.integer<int>("min_motor", sh.min_motor);
  sh.max_motor = ev.integer<int>("max_motor", sh.max_motor);
  sh.min_decision = ev.integer<int>("min_decision", sh.min_decision);
  sh.max_decision = ev.integer<int>("max_decision", sh.max_decision);
  sh.max_extent = m.max_extent;
  sh.regulation_threshold = ev.real("regulation_threshold", sh.regulation_threshold);
  sh.weight_scale = ev.real("weight_scale", sh.weight_scale);
  sh.two_threshold_fraction = ev.real("two_threshold_fraction", sh.two_threshold_fraction);
  sh.background_field = ev.boolean("background_field", sh.background_field);
  sh.actuator_count = static_cast<int>(s.body.thrusters.size());
  if (auto b = ev.raw("lattice_bounds")) {
    const auto x = reals(ev, "lattice_bounds", *b, 3);
    sh.lattice_bounds = {static_cast<int>(x[0]), static_cast<int>(x[1]), static_cast<int>(x[2])};
  }
  ev.reject_unknown();

  try {
    s.validate();
    e.validate();
  } catch (const InvalidArgument& err) {
    throw ParseError(std::string("config: ") + err.what(), 0);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open config " + path, 0);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string scenario_to_text(const harness::Scenario& s) {
  std::ostringstream o;
  o << "[meta]\nformat_version = " << kConfigFormatVersion << "\n\n";
  o << "[scenario]\n"
    << "n_robots = " << s.n_robots << "\n"
    << "episode_length = " << num(s.episode_length) << "\n"
    << "dt = " << num(s.dt) << "\n"
    << "fitness = " << to_string(s.fitness_kind) << "\n"
    << "wavelength = " << num(s.wavelength) << "\n"
    << "target_azimuth = " << num(s.target_azimuth) << "\n"
    << "target_elevation = " << num(s.target_elevation) << "\n"
    << "anchor_x = " << num(s.anchor.x) << "\nanchor_y = " << num(s.anchor.y) << "\n"
    << "table_x = " << num(s.table_size.x) << "\ntable_y = " << num(s.table_size.y) << "\n"
    << "min_separation = " << num(s.min_separation) << "\n"
    << "steer_from_truth = " << (s.steer_from_truth ? "true" : "false") << "\n"
    << "segregation_delay_steps = " << s.segregation_delay_steps << "\n"
    << "neighbor_timeout = " << num(s.neighbor_timeout) << "\n\n";
  o << "[body]\n"
    << "mass = " << num(s.body.mass) << "\ninertia = " << num(s.body.inertia) << "\n"
    << "linear_damping = " << num(s.body.linear_damping) << "\nangular_damping = " << num(s.body.angular_damping)
    << "\n";
  for (std::size_t i = 0; i < s.body.thrusters.size(); ++i) {
    const auto& t = s.body.thrusters[i];
    o << "thruster" << i << " = " << num(t.mount_point.x) << " " << num(t.mount_point.y) << " " << num(t.direction.x)
      << " " << num(t.direction.y) << " " << num(t.max_thrust) << "\n";
  }
  o << "\n[noise]\n"
    << "camera_sigma = " << num(s.noise.camera_sigma) << "\ncamera_rate = " << num(s.noise.camera_rate) << "\n"
    << "camera_dropout_prob = " << num(s.noise.camera_dropout_prob) << "\ngyro_sigma = " << num(s.noise.gyro_sigma)
    << "\ngyro_bias = " << num(s.noise.gyro_bias) << "\naccel_sigma = " << num(s.noise.accel_sigma) << "\n\n";
  o << "[filter]\nposition_alpha = " << num(s.filter.position_alpha)
    << "\nvelocity_beta = " << num(s.filter.velocity_beta) << "\n\n";
  o << "[comms]\n";
  if (s.loss.mode == comms::LossModel::Mode::bernoulli) {
    o << "loss = bernoulli\np = " << num(s.loss.p) << "\n";
  } else {
    o << "loss = gilbert_elliott\np_good_to_bad = " << num(s.loss.p_good_to_bad)
      << "\np_bad_to_good = " << num(s.loss.p_bad_to_good) << "\nloss_good = " << num(s.loss.loss_good)
      << "\nloss_bad = " << num(s.loss.loss_bad) << "\n";
  }
  o << "latency = " << num(s.loss.latency) << "\nnum_channels = " << s.num_channels
    << "\nencrypt = " << (s.encrypt ? "true" : "false") << "\ncipher_seed = " << s.cipher_seed << "\n\n";
  o << "[link]\nreference_snr = " << num(s.link.reference_snr) << "\nbandwidth_hz = " << num(s.link.bandwidth_hz)
    << "\n\n";
  o << "[formation]\n";
  if (!s.formation) {
    o << "kind = none\n\n";
  } else {
    o << "kind = custom\ntolerance = " << num(s.formation->tolerance) << "\n";
    for (std::size_t i = 0; i < s.formation->slots.size(); ++i) {
      o << "slot" << i << " = " << num(s.formation->slots[i].x) << " " << num(s.formation->slots[i].y) << "\n";
    }
    o << "\n";
  }
  o << "[initial]\nmode = " << (s.initial_states.empty() ? "jitter" : "explicit") << "\n"
    << "position_jitter = " << num(s.jitter.position) << "\nvelocity_jitter = " << num(s.jitter.velocity)
    << "\nheading_jitter = " << num(s.jitter.heading)
    << "\nangular_velocity_jitter = " << num(s.jitter.angular_velocity) << "\n";
  for (std::size_t i = 0; i < s.initial_states.size(); ++i) {
    const auto& r = s.initial_states[i];
    o << "robot" << i << " = " << num(r.position.x) << " " << num(r.position.y) << " " << num(r.heading) << " "
      << num(r.velocity.x) << " " << num(r.velocity.y) << " " << num(r.angular_velocity) << "\n";
  }
  o << "\n[failures]\n";
  for (std::size_t i = 0; i < s.failure_schedule.size(); ++i) {
    o << "event" << i << " = " << event_text(s.failure_schedule[i]) << "\n";
  }
  return o.str();
}

std::string evolution_to_text(const evo::EvoConfig& e) {
  std::ostringstream o;
  const auto& m = e.mutation;
  const auto& sh = e.shape;
  o << "[evolution]\n"
    << "population_size = " << e.population_size << "\ngenerations = " << e.generations
    << "\ntournament_size = " << e.tournament_size << "\ncrossover_prob = " << num(e.crossover_prob)
    << "\nelite_count = " << e.elite_count << "\nepisodes_per_eval = " << e.episodes_per_eval
    << "\nmaster_seed = " << e.master_seed << "\ncheckpoint_every = " << e.checkpoint_every
    << "\nweight_rate = " << num(m.weight_rate) << "\nweight_sigma = " << num(m.weight_sigma)
    << "\nthreshold_rate = " << num(m.threshold_rate) << "\nthreshold_sigma = " << num(m.threshold_sigma)
    << "\nmotor_insert_prob = " << num(m.motor_insert_prob) << "\nmotor_delete_prob = " << num(m.motor_delete_prob)
    << "\ndecision_insert_prob = " << num(m.decision_insert_prob)
    << "\ndecision_delete_prob = " << num(m.decision_delete_prob) << "\nextent_prob = " << num(m.extent_prob)
    << "\nactivation_flip_prob = " << num(m.activation_flip_prob) << "\ntap_prob = " << num(m.tap_prob)
    << "\nmax_extent = " << m.max_extent << "\nmin_motor = " << sh.min_motor << "\nmax_motor = " << sh.max_motor
    << "\nmin_decision = " << sh.min_decision << "\nmax_decision = " << sh.max_decision
    << "\nregulation_threshold = " << num(sh.regulation_threshold) << "\nweight_scale = " << num(sh.weight_scale)
    << "\ntwo_threshold_fraction = " << num(sh.two_threshold_fraction)
    << "\nbackground_field = " << (sh.background_field ? "true" : "false")
    << "\nlattice_bounds = " << sh.lattice_bounds.l << " " << sh.lattice_bounds.m << " " << sh.lattice_bounds.n
    << "\n";
  return o.str();
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

}  // namespace swarmlink

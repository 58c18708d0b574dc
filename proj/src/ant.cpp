#include "swarmlink/ant.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace swarmlink::ant {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::two_threshold: return "two_threshold";
  }
  return "?";
}

std::vector<SensorChannel> default_sensor_map() {
  static const char* names[] = {
      "slot_error_x",    "slot_error_y",   "velocity_x",       "velocity_y",
      "heading_sin",     "heading_cos",    "angular_velocity", "target_body_x",
      "target_body_y",   "neighbor_dx",    "neighbor_dy",      "neighbor_dvx",
      "neighbor_dvy",    "contribution",   "array_gain",       "comm_health",
  };
  std::vector<SensorChannel> map;
  for (int i = 0; i < static_cast<int>(std::size(names)); ++i) map.push_back({names[i], i});
  return map;
}

bool Genome::in_bounds(const Coord& c) const {
  return c.l >= 0 && c.m >= 0 && c.n >= 0 && c.l < lattice_bounds.l && c.m < lattice_bounds.m &&
         c.n < lattice_bounds.n;
}

void Genome::validate() const {
  if (lattice_bounds.l <= 0 || lattice_bounds.m <= 0 || lattice_bounds.n <= 0) {
    throw InvalidArgument("lattice bounds must be positive");
  }
  if (motor_genes.empty()) throw InvalidArgument("genome needs at least one motor gene");
  if (actuator_count <= 0) throw InvalidArgument("actuator_count must be positive");
  if (!(regulation_threshold > 0.0)) throw InvalidArgument("regulation_threshold must be > 0");
  if (sensor_map.empty()) throw InvalidArgument("sensor map is empty");
  std::vector<char> seen(sensor_map.size(), 0);
  std::vector<std::string> names;
  for (const auto& ch : sensor_map) {
    if (ch.index < 0 || ch.index >= static_cast<int>(sensor_map.size()) || seen[ch.index]) {
      throw InvalidArgument("sensor map must be a bijection onto [0, n)");
    }
    seen[ch.index] = 1;
    names.push_back(ch.name);
  }
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
    throw InvalidArgument("sensor channel names must be unique");
  }
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  for (const auto& g : motor_genes) {
    if (!in_bounds(g.coord)) throw InvalidArgument("motor gene coordinate out of lattice bounds");
    const std::size_t want = g.coord.n == 0 ? sensor_count() : kNeighborhood;
    if (g.input_weights.size() != want) throw InvalidArgument("motor gene has wrong input weight count");
    if (!finite(g.input_weights) || !std::isfinite(g.bias) || !std::isfinite(g.low_threshold) ||
        !std::isfinite(g.high_threshold)) {
      throw InvalidArgument("motor gene parameters must be finite");
    }
    if (g.actuator_tap && (*g.actuator_tap < 0 || *g.actuator_tap >= actuator_count)) {
      throw InvalidArgument("motor gene actuator tap out of range");
    }
  }
  for (const auto& g : decision_genes) {
    if (!in_bounds(g.coord)) throw InvalidArgument("decision gene coordinate out of lattice bounds");
    if (g.sensor_weights.size() != sensor_count()) throw InvalidArgument("decision gene has wrong sensor weight count");
    if (!finite(g.sensor_weights) || !std::isfinite(g.threshold)) {
      throw InvalidArgument("decision gene parameters must be finite");
    }
    if (g.extent.l < 0 || g.extent.m < 0 || g.extent.n < 0) throw InvalidArgument("field extent must be >= 0");
    if (!(g.concentration > 0.0) || !std::isfinite(g.concentration)) {
      throw InvalidArgument("decision concentration must be > 0");
    }
  }
}

// ---------------------------------------------------------------------------
// Random construction and mutation

namespace {

Coord random_coord(const Coord& bounds, Rng& rng) {
  return {std::uniform_int_distribution<int>(0, bounds.l - 1)(rng),
          std::uniform_int_distribution<int>(0, bounds.m - 1)(rng),
          std::uniform_int_distribution<int>(0, bounds.n - 1)(rng)};
}

bool chance(double p, Rng& rng) { return p > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

}  // namespace

MotorNeuronGene random_motor_gene(const Coord& coord, std::size_t sensor_count, int actuator_count, Rng& rng,
                                  double weight_scale, double two_threshold_fraction) {
  std::normal_distribution<double> w(0.0, weight_scale);
  MotorNeuronGene g;
  g.coord = coord;
  g.input_weights.resize(coord.n == 0 ? sensor_count : kNeighborhood);
  for (auto& x : g.input_weights) x = w(rng);
  g.bias = w(rng);
  g.activation = chance(two_threshold_fraction, rng) ? Activation::two_threshold : Activation::sigmoid;
  g.low_threshold = w(rng);
  g.high_threshold = g.low_threshold + std::abs(w(rng)) + 0.5;
  g.actuator_tap = std::uniform_int_distribution<int>(0, actuator_count - 1)(rng);
  return g;
}

DecisionNeuronGene random_decision_gene(const Coord& bounds, std::size_t sensor_count, int max_extent, Rng& rng,
                                        double weight_scale) {
  std::normal_distribution<double> w(0.0, weight_scale);
  std::uniform_int_distribution<int> ext(0, std::max(0, max_extent));
  DecisionNeuronGene g;
  g.coord = random_coord(bounds, rng);
  g.sensor_weights.resize(sensor_count);
  for (auto& x : g.sensor_weights) x = w(rng);
  g.threshold = w(rng);
  g.extent = {ext(rng), ext(rng), ext(rng)};
  g.concentration = std::uniform_real_distribution<double>(0.5, 1.5)(rng);
  return g;
}

DecisionNeuronGene background_decision_gene(const Coord& bounds, std::size_t sensor_count,
                                            double regulation_threshold) {
  DecisionNeuronGene g;
  g.coord = {bounds.l / 2, bounds.m / 2, bounds.n / 2};
  g.sensor_weights.assign(sensor_count, 0.0);
  g.threshold = -1.0;
  g.extent = {(bounds.l + 1) / 2, (bounds.m + 1) / 2, (bounds.n + 1) / 2};
  g.concentration = regulation_threshold;
  return g;
}

Genome random_genome(const GenomeShape& shape, Rng& rng) {
  Genome g;
  g.lattice_bounds = shape.lattice_bounds;
  g.sensor_map = shape.sensor_map;
  g.actuator_count = shape.actuator_count;
  g.regulation_threshold = shape.regulation_threshold;
  const int n_motor = std::uniform_int_distribution<int>(shape.min_motor, shape.max_motor)(rng);
  const int n_decision = std::uniform_int_distribution<int>(shape.min_decision, shape.max_decision)(rng);
  for (int i = 0; i < n_motor; ++i) {
    g.motor_genes.push_back(random_motor_gene(random_coord(g.lattice_bounds, rng), g.sensor_count(),
                                              g.actuator_count, rng, shape.weight_scale,
                                              shape.two_threshold_fraction));
  }
  for (int i = 0; i < n_decision; ++i) {
    g.decision_genes.push_back(
        random_decision_gene(g.lattice_bounds, g.sensor_count(), shape.max_extent, rng, shape.weight_scale));
  }
  if (shape.background_field) {
    g.decision_genes.push_back(background_decision_gene(g.lattice_bounds, g.sensor_count(), g.regulation_threshold));
  }
  return g;
}

MutationParams MutationParams::none() {
  MutationParams p;
  p.weight_rate = p.threshold_rate = 0.0;
  p.motor_insert_prob = p.motor_delete_prob = 0.0;
  p.decision_insert_prob = p.decision_delete_prob = 0.0;
  p.extent_prob = p.activation_flip_prob = p.tap_prob = 0.0;
  return p;
}

Genome perturb(const Genome& genome, const MutationParams& mp, Rng& rng) {
  Genome g = genome;
  std::normal_distribution<double> dw(0.0, mp.weight_sigma);
  std::normal_distribution<double> dt(0.0, mp.threshold_sigma);
  auto nudge = [&](double& x) {
    if (chance(mp.weight_rate, rng)) x += dw(rng);
  };

  for (auto& m : g.motor_genes) {
    for (auto& w : m.input_weights) nudge(w);
    nudge(m.bias);
    if (chance(mp.threshold_rate, rng)) {
      m.low_threshold += dt(rng);
      m.high_threshold += dt(rng);
      if (m.low_threshold > m.high_threshold) std::swap(m.low_threshold, m.high_threshold);
    }
    if (chance(mp.activation_flip_prob, rng)) {
      m.activation = m.activation == Activation::sigmoid ? Activation::two_threshold : Activation::sigmoid;
    }
    if (chance(mp.tap_prob, rng)) {
      m.actuator_tap = std::uniform_int_distribution<int>(0, g.actuator_count - 1)(rng);
    }
  }
  for (auto& d : g.decision_genes) {
    for (auto& w : d.sensor_weights) nudge(w);
    if (chance(mp.threshold_rate, rng)) d.threshold += dt(rng);
    if (chance(mp.threshold_rate, rng)) d.concentration *= std::exp(dt(rng));
    if (chance(mp.extent_prob, rng)) {
      const int axis = std::uniform_int_distribution<int>(0, 2)(rng);
      const int delta = chance(0.5, rng) ? 1 : -1;
      int& e = axis == 0 ? d.extent.l : axis == 1 ? d.extent.m : d.extent.n;
      e = std::clamp(e + delta, 0, std::max(0, mp.max_extent));
    }
  }

  if (g.motor_genes.size() > 1 && chance(mp.motor_delete_prob, rng)) {
    const auto i = std::uniform_int_distribution<std::size_t>(0, g.motor_genes.size() - 1)(rng);
    g.motor_genes.erase(g.motor_genes.begin() + static_cast<std::ptrdiff_t>(i));
  }
  if (chance(mp.motor_insert_prob, rng)) {
    g.motor_genes.push_back(
        random_motor_gene(random_coord(g.lattice_bounds, rng), g.sensor_count(), g.actuator_count, rng));
  }
  if (!g.decision_genes.empty() && chance(mp.decision_delete_prob, rng)) {
    const auto i = std::uniform_int_distribution<std::size_t>(0, g.decision_genes.size() - 1)(rng);
    g.decision_genes.erase(g.decision_genes.begin() + static_cast<std::ptrdiff_t>(i));
  }
  if (chance(mp.decision_insert_prob, rng)) {
    g.decision_genes.push_back(random_decision_gene(g.lattice_bounds, g.sensor_count(), mp.max_extent, rng));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Development and activation

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::size_t Tissue::cell_count() const {
  return static_cast<std::size_t>(bounds_.l) * static_cast<std::size_t>(bounds_.m) *
         static_cast<std::size_t>(bounds_.n);
}

std::size_t Tissue::cell_index(const Coord& c) const {
  return (static_cast<std::size_t>(c.n) * static_cast<std::size_t>(bounds_.m) + static_cast<std::size_t>(c.m)) *
             static_cast<std::size_t>(bounds_.l) +
         static_cast<std::size_t>(c.l);
}

int Tissue::neuron_at(const Coord& c) const {
  if (c.l < 0 || c.m < 0 || c.n < 0 || c.l >= bounds_.l || c.m >= bounds_.m || c.n >= bounds_.n) return -1;
  return cell_to_neuron_[cell_index(c)];
}

Tissue Tissue::develop(const Genome& genome) {
  if (genome.motor_genes.empty()) throw InvalidArgument("cannot develop a genome without motor genes");
  genome.validate();

  Tissue t;
  t.bounds_ = genome.lattice_bounds;
  t.sensor_count_ = genome.sensor_count();
  t.actuator_count_ = genome.actuator_count;
  t.regulation_threshold_ = genome.regulation_threshold;

  // Later genes overwrite earlier ones at the same coordinate.
  std::map<Coord, const MotorNeuronGene*> motor_cells;
  for (const auto& g : genome.motor_genes) motor_cells[g.coord] = &g;
  std::map<Coord, const DecisionNeuronGene*> decision_cells;
  for (const auto& g : genome.decision_genes) decision_cells[g.coord] = &g;

  std::vector<const MotorNeuronGene*> ordered;
  for (const auto& [c, g] : motor_cells) ordered.push_back(g);
  std::stable_sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->coord.n < b->coord.n; });

  t.cell_to_neuron_.assign(t.cell_count(), -1);
  for (const auto* g : ordered) {
    MotorNeuron m;
    m.coord = g->coord;
    m.weights = g->input_weights;
    m.bias = g->bias;
    m.activation = g->activation;
    m.low_threshold = g->low_threshold;
    m.high_threshold = g->high_threshold;
    m.actuator_tap = g->actuator_tap;
    m.afferents.fill(-1);
    t.cell_to_neuron_[t.cell_index(m.coord)] = static_cast<int>(t.motor_.size());
    t.motor_.push_back(std::move(m));
    t.output_layer_ = std::max(t.output_layer_, g->coord.n);
  }
  for (auto& m : t.motor_) {
    if (m.coord.n == 0) continue;
    std::size_t k = 0;
    for (int dl = -1; dl <= 1; ++dl) {
      for (int dm = -1; dm <= 1; ++dm) m.afferents[k++] = t.neuron_at({m.coord.l + dl, m.coord.m + dm, m.coord.n - 1});
    }
  }
  for (const auto& [c, g] : decision_cells) {
    t.decision_.push_back({g->coord, g->sensor_weights, g->threshold, g->extent, g->concentration});
  }
  return t;
}

void Tissue::check_sensors(std::span<const double> sensors) const {
  if (sensors.size() != sensor_count_) {
    throw InvalidArgument("sensor vector has " + std::to_string(sensors.size()) + " channels, tissue expects " +
                          std::to_string(sensor_count_));
  }
}

void Tissue::fill_field(std::span<const double> sensors, Scratch& s) const {
  s.field.assign(cell_count(), 0.0);
  for (const auto& d : decision_) {
    double drive = 0.0;
    for (std::size_t i = 0; i < sensors.size(); ++i) drive += d.sensor_weights[i] * sensors[i];
    if (!(drive >= d.threshold)) continue;
    const int l0 = std::max(0, d.coord.l - d.extent.l), l1 = std::min(bounds_.l - 1, d.coord.l + d.extent.l);
    const int m0 = std::max(0, d.coord.m - d.extent.m), m1 = std::min(bounds_.m - 1, d.coord.m + d.extent.m);
    const int n0 = std::max(0, d.coord.n - d.extent.n), n1 = std::min(bounds_.n - 1, d.coord.n + d.extent.n);
    for (int n = n0; n <= n1; ++n) {
      for (int m = m0; m <= m1; ++m) {
        for (int l = l0; l <= l1; ++l) s.field[cell_index({l, m, n})] += d.concentration;
      }
    }
  }
}

std::vector<int> Tissue::regulate(std::span<const double> sensors, Scratch& s) const {
  check_sensors(sensors);
  fill_field(sensors, s);
  std::vector<int> active;
  for (std::size_t i = 0; i < motor_.size(); ++i) {
    if (s.field[cell_index(motor_[i].coord)] >= regulation_threshold_) active.push_back(static_cast<int>(i));
  }
  return active;
}

std::vector<int> Tissue::regulate(std::span<const double> sensors) const {
  Scratch s;
  return regulate(sensors, s);
}

void Tissue::activate(std::span<const double> sensors, std::span<double> out, Scratch& s) const {
  check_sensors(sensors);
  if (out.size() != static_cast<std::size_t>(actuator_count_)) throw InvalidArgument("actuator buffer size mismatch");
  fill_field(sensors, s);
  s.active.assign(motor_.size(), 0);
  s.outputs.assign(motor_.size(), 0.0);
  s.tap_counts.assign(out.size(), 0);
  std::fill(out.begin(), out.end(), 0.0);

  for (std::size_t i = 0; i < motor_.size(); ++i) {
    const auto& m = motor_[i];
    if (!(s.field[cell_index(m.coord)] >= regulation_threshold_)) continue;
    s.active[i] = 1;
    double x = m.bias;
    if (m.coord.n == 0) {
      for (std::size_t k = 0; k < sensors.size(); ++k) x += m.weights[k] * sensors[k];
    } else {
      for (std::size_t k = 0; k < kNeighborhood; ++k) {
        if (m.afferents[k] >= 0) x += m.weights[k] * s.outputs[static_cast<std::size_t>(m.afferents[k])];
      }
    }
    s.outputs[i] = m.activation == Activation::sigmoid ? sigmoid(x)
                                                       : (x >= m.low_threshold && x < m.high_threshold ? 1.0 : 0.0);
    if (m.coord.n == output_layer_ && m.actuator_tap) {
      out[static_cast<std::size_t>(*m.actuator_tap)] += s.outputs[i];
      ++s.tap_counts[static_cast<std::size_t>(*m.actuator_tap)];
    }
  }
  for (std::size_t a = 0; a < out.size(); ++a) {
    if (s.tap_counts[a] > 0) out[a] /= s.tap_counts[a];
  }
}

std::vector<double> Tissue::activate(std::span<const double> sensors) const {
  Scratch s;
  std::vector<double> out(static_cast<std::size_t>(actuator_count_));
  activate(sensors, out, s);
  return out;
}

}  // namespace swarmlink::ant

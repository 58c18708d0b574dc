#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "swarmlink/common.hpp"

// Artificial neural tissue: a genome develops into a 3D lattice of motor
// neurons (computation) and decision neurons (gating). Decision neurons that
// fire flood an axis-aligned box of cells with a chemical concentration; only
// motor neurons sitting in cells whose summed concentration reaches the
// regulation threshold take part in an activation.

namespace swarmlink::ant {

using Rng = std::mt19937_64;

struct Coord {
  int l = 0;
  int m = 0;
  int n = 0;  ///< layer index; layer 0 reads sensors
  friend auto operator<=>(const Coord&, const Coord&) = default;
};

enum class Activation { sigmoid, two_threshold };

const char* to_string(Activation a);

/// Afferents of a neuron above layer 0: the 3x3 cells one layer down, row-major
/// in (dl, dm) from (-1, -1) to (+1, +1).
inline constexpr std::size_t kNeighborhood = 9;

struct MotorNeuronGene {
  Coord coord;
  /// kNeighborhood weights above layer 0; one weight per sensor channel on layer 0.
  std::vector<double> input_weights;
  double bias = 0.0;
  Activation activation = Activation::sigmoid;
  /// two_threshold outputs 1 while low <= x < high, else 0.
  double low_threshold = 0.0;
  double high_threshold = 1.0;
  std::optional<int> actuator_tap;
  friend bool operator==(const MotorNeuronGene&, const MotorNeuronGene&) = default;
};

struct DecisionNeuronGene {
  Coord coord;
  std::vector<double> sensor_weights;
  double threshold = 0.0;
  Coord extent;  ///< box half-widths in cells
  double concentration = 1.0;
  friend bool operator==(const DecisionNeuronGene&, const DecisionNeuronGene&) = default;
};

struct SensorChannel {
  std::string name;
  int index = 0;
  friend bool operator==(const SensorChannel&, const SensorChannel&) = default;
};

/// The 16 per-robot controller inputs used by the episode harness, in order.
std::vector<SensorChannel> default_sensor_map();

struct Genome {
  std::vector<MotorNeuronGene> motor_genes;
  std::vector<DecisionNeuronGene> decision_genes;
  Coord lattice_bounds{8, 8, 4};
  std::vector<SensorChannel> sensor_map = default_sensor_map();
  int actuator_count = 8;
  double regulation_threshold = 1.0;

  std::size_t sensor_count() const { return sensor_map.size(); }
  bool in_bounds(const Coord& c) const;
  /// Throws InvalidArgument on any violated invariant.
  void validate() const;
  friend bool operator==(const Genome&, const Genome&) = default;
};

/// Parameters for random genome construction.
struct GenomeShape {
  Coord lattice_bounds{8, 8, 4};
  std::vector<SensorChannel> sensor_map = default_sensor_map();
  int actuator_count = 8;
  double regulation_threshold = 1.0;
  int min_motor = 10;
  int max_motor = 40;
  int min_decision = 2;
  int max_decision = 8;
  int max_extent = 3;
  double weight_scale = 1.0;
  double two_threshold_fraction = 0.5;  ///< probability a motor gene starts with the two-threshold activation
  /// Append an always-firing decision gene whose field covers the whole lattice.
  bool background_field = false;
};

MotorNeuronGene random_motor_gene(const Coord& coord, std::size_t sensor_count, int actuator_count, Rng& rng,
                                  double weight_scale = 1.0, double two_threshold_fraction = 0.5);
/// Zero sensor weights and threshold -1, so it always fires; concentration meets `regulation_threshold`.
DecisionNeuronGene background_decision_gene(const Coord& bounds, std::size_t sensor_count,
                                            double regulation_threshold);
DecisionNeuronGene random_decision_gene(const Coord& bounds, std::size_t sensor_count, int max_extent, Rng& rng,
                                        double weight_scale = 1.0);
Genome random_genome(const GenomeShape& shape, Rng& rng);

struct MutationParams {
  double weight_rate = 0.1;       ///< per-weight probability of a Gaussian nudge (weights, biases)
  double weight_sigma = 0.1;
  double threshold_rate = 0.1;    ///< per-gene probability for thresholds and concentrations
  double threshold_sigma = 0.1;
  double motor_insert_prob = 0.05;
  double motor_delete_prob = 0.05;
  double decision_insert_prob = 0.02;
  double decision_delete_prob = 0.02;
  double extent_prob = 0.05;      ///< per-gene probability of a +-1 cell extent change on one axis
  double activation_flip_prob = 0.01;
  double tap_prob = 0.01;
  int max_extent = 3;

  static MutationParams none();
};

/// Returns a mutated copy; never drops below one motor gene.
Genome perturb(const Genome& genome, const MutationParams& params, Rng& rng);

/// Developed neuron with resolved wiring.
struct MotorNeuron {
  Coord coord;
  /// Indices into Tissue::motor() for the 3x3 cells below, -1 where empty.
  /// Unused on layer 0, which reads the sensor vector directly.
  std::array<int, kNeighborhood> afferents{};
  std::vector<double> weights;
  double bias = 0.0;
  Activation activation = Activation::sigmoid;
  double low_threshold = 0.0;
  double high_threshold = 1.0;
  std::optional<int> actuator_tap;
};

struct DecisionNeuron {
  Coord coord;
  std::vector<double> sensor_weights;
  double threshold = 0.0;
  Coord extent;
  double concentration = 1.0;
};

/// Per-activation working memory. Owned by the caller so one Tissue can be
/// shared read-only between robots and threads.
struct Scratch {
  std::vector<double> field;      ///< concentration per lattice cell
  std::vector<char> active;       ///< per motor neuron
  std::vector<double> outputs;    ///< per motor neuron
  std::vector<int> tap_counts;    ///< per actuator
};

class Tissue {
 public:
  /// Throws InvalidArgument when the genome has no motor genes or breaks an invariant.
  static Tissue develop(const Genome& genome);

  const std::vector<MotorNeuron>& motor() const noexcept { return motor_; }
  const std::vector<DecisionNeuron>& decision() const noexcept { return decision_; }
  int output_layer() const noexcept { return output_layer_; }
  std::size_t sensor_count() const noexcept { return sensor_count_; }
  int actuator_count() const noexcept { return actuator_count_; }
  const Coord& bounds() const noexcept { return bounds_; }
  double regulation_threshold() const noexcept { return regulation_threshold_; }

  std::size_t cell_index(const Coord& c) const;
  std::size_t cell_count() const;
  /// Index of the motor neuron at `c`, or -1.
  int neuron_at(const Coord& c) const;

  /// Decision-neuron firing and field superposition. Returns indices of active
  /// motor neurons (ascending); `scratch.field` holds the concentration map.
  std::vector<int> regulate(std::span<const double> sensors, Scratch& scratch) const;
  std::vector<int> regulate(std::span<const double> sensors) const;

  /// Full activation: writes one command in [0, 1] per actuator into `out`.
  void activate(std::span<const double> sensors, std::span<double> out, Scratch& scratch) const;
  std::vector<double> activate(std::span<const double> sensors) const;

 private:
  void check_sensors(std::span<const double> sensors) const;
  void fill_field(std::span<const double> sensors, Scratch& scratch) const;

  std::vector<MotorNeuron> motor_;  // ascending layer order
  std::vector<DecisionNeuron> decision_;
  std::vector<int> cell_to_neuron_;
  Coord bounds_;
  std::size_t sensor_count_ = 0;
  int actuator_count_ = 0;
  double regulation_threshold_ = 1.0;
  int output_layer_ = 0;
};

double sigmoid(double x);

// Text persistence. Doubles are written with 17 significant digits so that a
// save/load round trip is value-exact.
std::string genome_to_text(const Genome& genome);
Genome genome_from_text(const std::string& text);
void save_genome(const Genome& genome, const std::string& path);
Genome load_genome(const std::string& path);

}  // namespace swarmlink::ant

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "swarmlink/common.hpp"

namespace swarmlink::array {

/// Default carrier wavelength (2.4 GHz ISM band), meters.
inline constexpr double kDefaultWavelength = 0.125;

/// Unit look/steer direction. Construction validates the norm.
class Direction {
 public:
  static constexpr double kUnitTolerance = 1e-12;

  /// Throws InvalidArgument unless |v| = 1 within kUnitTolerance.
  explicit Direction(Vec3 v);
  /// Normalizes any non-zero vector.
  static Direction normalized(Vec3 v);
  /// z-up convention: az measured from +x toward +y, el from the x-y plane toward +z.
  static Direction from_az_el(double azimuth_rad, double elevation_rad);

  const Vec3& vec() const noexcept { return v_; }
  double azimuth() const;
  double elevation() const;

  friend bool operator==(const Direction&, const Direction&) = default;

 private:
  Vec3 v_;
};

struct ElementState {
  Vec3 position;
  double amplitude = 1.0;
  double phase = 0.0;
  bool active = true;
};

struct ArrayConfig {
  std::vector<ElementState> elements;
  double wavelength = kDefaultWavelength;

  double wavenumber() const noexcept { return 2.0 * std::numbers::pi / wavelength; }
  /// Throws InvalidArgument if wavelength, amplitudes or phases are invalid.
  void validate() const;
};

struct LinkBudget {
  double reference_snr = 1.0;
  double bandwidth_hz = 1.0;
};

/// AF(u) = sum over active elements of a_n exp(i(k r_n.u + phi_n)).
std::complex<double> array_factor(const ArrayConfig& config, const Direction& dir);

/// |AF|^2 / (sum of active amplitudes)^2, in [0, 1].
double normalized_gain(const ArrayConfig& config, const Direction& dir);

/// Conjugate-phase steering: phi_n = -k r_n.u, reduced to (-pi, pi].
std::vector<double> steering_phases(std::span<const Vec3> positions, double wavelength,
                                    const Direction& target);

struct PatternPoint {
  Direction direction;
  double gain;
};

std::vector<PatternPoint> beam_pattern(const ArrayConfig& config, std::span<const Direction> grid);

/// Evenly spaced azimuth sweep at fixed elevation covering [0, 2pi] inclusive.
std::vector<Direction> azimuth_sweep(std::size_t points, double elevation_rad = 0.0);

struct GainStats {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Monte Carlo gain at `target` when every element position is perturbed by an
/// isotropic Gaussian of per-axis std `position_noise_sigma`, phases steered to
/// the nominal positions.
GainStats gain_statistics(const ArrayConfig& config, double position_noise_sigma,
                          const Direction& target, std::size_t trials, std::uint64_t rng_seed);

double fitness_signal_strength(std::span<const double> gain_trace);

/// Mean Shannon-capacity proxy B log2(1 + snr0 n^2 g) over the trace, bits/s.
double fitness_data_rate(std::span<const double> gain_trace, const LinkBudget& link,
                         std::size_t n_active);
/// Per-step variant used when the active count changes during an episode.
double fitness_data_rate(std::span<const double> gain_trace, const LinkBudget& link,
                         std::span<const std::size_t> n_active);

std::string pattern_csv(std::span<const PatternPoint> pattern);

}  // namespace swarmlink::array

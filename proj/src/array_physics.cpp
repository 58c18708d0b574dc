#include "swarmlink/array_physics.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace swarmlink::array {

Direction::Direction(Vec3 v) : v_(v) {
  const double n = norm(v);
  if (!std::isfinite(n) || std::abs(n - 1.0) > kUnitTolerance) {
    throw InvalidArgument("direction must be a unit vector (norm " + std::to_string(n) + ")");
  }
}

Direction Direction::normalized(Vec3 v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("cannot normalize a zero or non-finite vector");
  return Direction((1.0 / n) * v);
}

Direction Direction::from_az_el(double az, double el) {
  return Direction::normalized({std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)});
}

double Direction::azimuth() const { return std::atan2(v_.y, v_.x); }
double Direction::elevation() const { return std::asin(std::clamp(v_.z, -1.0, 1.0)); }

void ArrayConfig::validate() const {
  if (!(wavelength > 0.0) || !std::isfinite(wavelength)) throw InvalidArgument("wavelength must be > 0");
  for (const auto& e : elements) {
    if (!(e.amplitude >= 0.0) || !std::isfinite(e.amplitude)) throw InvalidArgument("element amplitude must be >= 0");
    if (!std::isfinite(e.phase)) throw InvalidArgument("element phase must be finite");
  }
}

namespace {

double active_amplitude_sum(const ArrayConfig& config) {
  double sum = 0.0;
  std::size_t active = 0;
  for (const auto& e : config.elements) {
    if (!e.active) continue;
    sum += e.amplitude;
    ++active;
  }
  if (active == 0) throw InvalidArgument("array has no active elements");
  if (!(sum > 0.0)) throw InvalidArgument("active elements have zero total amplitude");
  return sum;
}

}  // namespace

std::complex<double> array_factor(const ArrayConfig& config, const Direction& dir) {
  config.validate();
  active_amplitude_sum(config);
  const double k = config.wavenumber();
  std::complex<double> af{0.0, 0.0};
  for (const auto& e : config.elements) {
    if (!e.active) continue;
    af += std::polar(e.amplitude, k * dot(e.position, dir.vec()) + e.phase);
  }
  return af;
}

double normalized_gain(const ArrayConfig& config, const Direction& dir) {
  const auto af = array_factor(config, dir);
  const double sum = active_amplitude_sum(config);
  // Rounding can push a perfectly coherent sum a few ulps past 1.
  return std::min(1.0, std::norm(af) / (sum * sum));
}

std::vector<double> steering_phases(std::span<const Vec3> positions, double wavelength, const Direction& target) {
  if (positions.empty()) throw InvalidArgument("steering_phases needs at least one position");
  if (!(wavelength > 0.0)) throw InvalidArgument("wavelength must be > 0");
  const double k = 2.0 * std::numbers::pi / wavelength;
  std::vector<double> phases;
  phases.reserve(positions.size());
  for (const auto& p : positions) phases.push_back(wrap_angle(-k * dot(p, target.vec())));
  return phases;
}

std::vector<PatternPoint> beam_pattern(const ArrayConfig& config, std::span<const Direction> grid) {
  if (grid.empty()) throw InvalidArgument("beam_pattern grid is empty");
  std::vector<PatternPoint> out;
  out.reserve(grid.size());
  for (const auto& d : grid) out.push_back({d, normalized_gain(config, d)});
  return out;
}

std::vector<Direction> azimuth_sweep(std::size_t points, double elevation_rad) {
  if (points < 2) throw InvalidArgument("azimuth sweep needs at least 2 points");
  std::vector<Direction> grid;
  grid.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double az = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(points - 1);
    grid.push_back(Direction::from_az_el(az, elevation_rad));
  }
  return grid;
}

GainStats gain_statistics(const ArrayConfig& config, double sigma, const Direction& target, std::size_t trials,
                          std::uint64_t rng_seed) {
  if (trials == 0) throw InvalidArgument("gain_statistics needs trials >= 1");
  if (!(sigma >= 0.0)) throw InvalidArgument("position noise sigma must be >= 0");
  config.validate();
  const double amp_sum = active_amplitude_sum(config);
  const double k = config.wavenumber();

  std::vector<Vec3> nominal;
  std::vector<double> amps;
  for (const auto& e : config.elements) {
    if (!e.active) continue;
    nominal.push_back(e.position);
    amps.push_back(e.amplitude);
  }
  const auto phases = steering_phases(nominal, config.wavelength, target);

  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::complex<double> af{0.0, 0.0};
    for (std::size_t n = 0; n < nominal.size(); ++n) {
      Vec3 p = nominal[n];
      if (sigma > 0.0) p = p + Vec3{sigma * noise(rng), sigma * noise(rng), sigma * noise(rng)};
      af += std::polar(amps[n], k * dot(p, target.vec()) + phases[n]);
    }
    const double g = sigma > 0.0 ? std::min(1.0, std::norm(af) / (amp_sum * amp_sum)) : 1.0;
    const double delta = g - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (g - mean);
  }
  const double var = trials > 1 ? m2 / static_cast<double>(trials - 1) : 0.0;
  return {mean, std::sqrt(std::max(0.0, var))};
}

double fitness_signal_strength(std::span<const double> gain_trace) {
  if (gain_trace.empty()) throw InvalidArgument("gain trace is empty");
  double sum = 0.0;
  for (double g : gain_trace) sum += g;
  return sum / static_cast<double>(gain_trace.size());
}

double fitness_data_rate(std::span<const double> gain_trace, const LinkBudget& link, std::size_t n_active) {
  if (gain_trace.empty()) throw InvalidArgument("gain trace is empty");
  if (n_active == 0) throw InvalidArgument("data-rate fitness needs n_active >= 1");
  std::vector<std::size_t> n(gain_trace.size(), n_active);
  return fitness_data_rate(gain_trace, link, n);
}

double fitness_data_rate(std::span<const double> gain_trace, const LinkBudget& link,
                         std::span<const std::size_t> n_active) {
  if (gain_trace.empty()) throw InvalidArgument("gain trace is empty");
  if (n_active.size() != gain_trace.size()) throw InvalidArgument("active-count trace length mismatch");
  if (!(link.reference_snr > 0.0) || !(link.bandwidth_hz > 0.0)) throw InvalidArgument("invalid link budget");
  double sum = 0.0;
  for (std::size_t i = 0; i < gain_trace.size(); ++i) {
    const double n = static_cast<double>(n_active[i]);
    sum += link.bandwidth_hz * std::log2(1.0 + link.reference_snr * n * n * gain_trace[i]);
  }
  return sum / static_cast<double>(gain_trace.size());
}

std::string pattern_csv(std::span<const PatternPoint> pattern) {
  std::ostringstream os;
  os.precision(17);
  os << "azimuth_rad,elevation_rad,gain\n";
  for (const auto& p : pattern) {
    os << p.direction.azimuth() << ',' << p.direction.elevation() << ',' << p.gain << '\n';
  }
  return os.str();
}

}  // namespace swarmlink::array

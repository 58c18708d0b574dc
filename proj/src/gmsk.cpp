#include <algorithm>
#include <cmath>

#include "swarmlink/dsp.hpp"

namespace swarmlink::dsp {

void GmskParams::validate() const {
  if (samples_per_symbol < 2) throw InvalidArgument("samples_per_symbol must be >= 2");
  // Values above 1 are accepted so the near-rectangular (MSK-like) limit can be exercised.
  if (!(bt_product > 0.0) || !std::isfinite(bt_product)) throw InvalidArgument("bt_product must be > 0");
  if (pulse_span_symbols < 1) throw InvalidArgument("pulse_span_symbols must be >= 1");
}

Bits preamble_bits() {
  Bits b(kPreambleSymbols);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = static_cast<std::uint8_t>((i + 1) % 2);
  return b;
}

std::vector<double> gaussian_pulse(const GmskParams& p) {
  p.validate();
  const int n = p.pulse_length();
  const double k = 2.0 * std::numbers::pi * p.bt_product / std::sqrt(std::log(2.0));
  auto q = [](double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); };
  std::vector<double> taps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = (i - (n - 1) / 2.0) / p.samples_per_symbol;  // symbol periods
    taps[static_cast<std::size_t>(i)] = q(k * (t - 0.5)) - q(k * (t + 0.5));
  }
  double sum = 0.0;
  for (double x : taps) sum += x;
  for (auto& x : taps) x /= sum;
  // Enforce exact even symmetry against rounding in erfc.
  for (int i = 0; i < n / 2; ++i) {
    const double avg = 0.5 * (taps[static_cast<std::size_t>(i)] + taps[static_cast<std::size_t>(n - 1 - i)]);
    taps[static_cast<std::size_t>(i)] = taps[static_cast<std::size_t>(n - 1 - i)] = avg;
  }
  return taps;
}

IqBuffer gmsk_modulate_raw(std::span<const std::uint8_t> bits, const GmskParams& p, double sample_rate) {
  if (bits.empty()) throw InvalidArgument("gmsk_modulate needs at least one bit");
  const auto taps = gaussian_pulse(p);
  const std::size_t sps = static_cast<std::size_t>(p.samples_per_symbol);
  const std::size_t len = bits.size() * sps + taps.size() - sps;

  std::vector<double> freq(len, 0.0);
  for (std::size_t k = 0; k < bits.size(); ++k) {
    const double a = bits[k] ? 1.0 : -1.0;
    for (std::size_t j = 0; j < taps.size(); ++j) freq[k * sps + j] += a * taps[j];
  }
  IqBuffer out;
  out.sample_rate = sample_rate;
  out.samples.resize(len);
  double phase = 0.0;
  for (std::size_t n = 0; n < len; ++n) {
    phase += kPhasePerSymbol * freq[n];
    out.samples[n] = std::polar(1.0, phase);
  }
  return out;
}

IqBuffer gmsk_modulate(std::span<const std::uint8_t> bits, const GmskParams& p, double sample_rate) {
  if (bits.empty()) throw InvalidArgument("gmsk_modulate needs at least one bit");
  Bits framed = preamble_bits();
  framed.insert(framed.end(), bits.begin(), bits.end());
  return gmsk_modulate_raw(framed, p, sample_rate);
}

DemodResult gmsk_demodulate_ex(const IqBuffer& iq, const GmskParams& p, const DemodOptions& opt) {
  p.validate();
  const std::size_t sps = static_cast<std::size_t>(p.samples_per_symbol);
  const std::size_t pulse = static_cast<std::size_t>(p.pulse_length());
  const auto reference = gmsk_modulate_raw(preamble_bits(), p).samples;
  const std::size_t ref_len = kPreambleSymbols * sps;  // unaffected by what follows the preamble
  const auto& s = iq.samples;
  if (s.size() < ref_len + pulse) throw SyncError("buffer too short for a preamble");

  double ref_energy = 0.0;
  for (std::size_t i = 0; i < ref_len; ++i) ref_energy += std::norm(reference[i]);

  double window_energy = 0.0;
  for (std::size_t i = 0; i < ref_len; ++i) window_energy += std::norm(s[i]);
  double best = -1.0;
  std::size_t best_at = 0;
  const std::size_t last = s.size() - ref_len;
  for (std::size_t tau = 0; tau <= last; ++tau) {
    if (tau > 0) window_energy += std::norm(s[tau + ref_len - 1]) - std::norm(s[tau - 1]);
    if (window_energy / static_cast<double>(ref_len) < opt.squelch_power) continue;
    cf64 acc{0.0, 0.0};
    for (std::size_t i = 0; i < ref_len; ++i) acc += s[tau + i] * std::conj(reference[i]);
    const double rho = std::abs(acc) / std::sqrt(std::max(window_energy, 1e-300) * ref_energy);
    if (rho > best) {
      best = rho;
      best_at = tau;
    }
  }
  if (best < opt.sync_threshold) {
    throw SyncError("preamble not found (best correlation " + std::to_string(std::max(best, 0.0)) + ")");
  }

  DemodResult r;
  r.sync_index = best_at;
  r.sync_quality = best;
  const std::size_t tail = pulse - sps;
  const std::size_t avail = s.size() - best_at;
  if (avail < tail) return r;
  const std::size_t symbols = (avail - tail) / sps;
  if (symbols <= kPreambleSymbols) return r;
  // Phase advance over the central symbol interval of each pulse.
  const std::size_t centre = (pulse - sps) / 2;
  r.bits.reserve(symbols - kPreambleSymbols);
  for (std::size_t k = kPreambleSymbols; k < symbols; ++k) {
    const std::size_t first = best_at + k * sps + centre;
    double advance = 0.0;
    for (std::size_t j = 0; j < sps; ++j) {
      const std::size_t n = first + j;
      if (n == 0 || n >= s.size()) continue;
      advance += std::arg(s[n] * std::conj(s[n - 1]));
    }
    r.bits.push_back(advance > 0.0 ? 1 : 0);
  }
  return r;
}

Bits gmsk_demodulate(const IqBuffer& iq, const GmskParams& p, const DemodOptions& opt) {
  return gmsk_demodulate_ex(iq, p, opt).bits;
}

Bits bytes_to_bits(std::span<const std::uint8_t> bytes) {
  Bits bits;
  bits.reserve(bytes.size() * 8);
  for (auto b : bytes)
    for (int i = 7; i >= 0; --i) bits.push_back(static_cast<std::uint8_t>((b >> i) & 1u));
  return bits;
}

std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits) {
  std::vector<std::uint8_t> out(bits.size() / 8, 0);
  for (std::size_t i = 0; i < out.size() * 8; ++i) {
    if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(1u << (7 - i % 8));
  }
  return out;
}

void add_awgn(IqBuffer& iq, double snr_db, std::mt19937_64& rng) {
  const double noise_power = std::pow(10.0, -snr_db / 10.0);
  std::normal_distribution<double> n(0.0, std::sqrt(noise_power / 2.0));
  for (auto& x : iq.samples) {
    const double re = n(rng);
    const double im = n(rng);
    x += cf64(re, im);
  }
}

}  // namespace swarmlink::dsp

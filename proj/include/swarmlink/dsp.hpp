#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmlink/common.hpp"

namespace swarmlink::dsp {

using cf64 = std::complex<double>;
using Bits = std::vector<std::uint8_t>;  ///< one bit (0 or 1) per element

struct IqBuffer {
  std::vector<cf64> samples;
  double sample_rate = 1.0;

  std::size_t size() const noexcept { return samples.size(); }
};

/// Raised when the demodulator cannot find the frame preamble.
class SyncError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// GMSK

struct GmskParams {
  int samples_per_symbol = 8;
  double bt_product = 0.5;
  int pulse_span_symbols = 4;
  static constexpr double kModulationIndex = 0.5;

  void validate() const;
  int pulse_length() const { return samples_per_symbol * pulse_span_symbols; }
};

/// Phase advanced by one full symbol: pi * h.
inline constexpr double kPhasePerSymbol = std::numbers::pi * GmskParams::kModulationIndex;

/// Alternating 32-symbol timing preamble that gmsk_modulate prepends to every burst.
inline constexpr std::size_t kPreambleSymbols = 32;
Bits preamble_bits();

/// Gaussian-filtered rectangular frequency pulse sampled over the span and
/// normalized so the taps sum to 1 (a full symbol advances the phase by pi/2).
std::vector<double> gaussian_pulse(const GmskParams& params);

/// Frequency-pulse shaped NRZ stream with phase accumulation. The preamble is
/// prepended, so the output holds (32 + bits) * sps + (pulse_length - sps) samples.
IqBuffer gmsk_modulate(std::span<const std::uint8_t> bits, const GmskParams& params, double sample_rate = 1.0);

/// Same as gmsk_modulate but without the preamble; exposed for waveform tests.
IqBuffer gmsk_modulate_raw(std::span<const std::uint8_t> bits, const GmskParams& params, double sample_rate = 1.0);

struct DemodOptions {
  /// Minimum normalized preamble correlation.
  double sync_threshold = 0.8;
  /// Minimum mean power over the preamble window (linear, unit envelope = 1).
  double squelch_power = 1e-3;
};

struct DemodResult {
  Bits bits;
  std::size_t sync_index = 0;   ///< sample index of the preamble start
  double sync_quality = 0.0;    ///< normalized correlation at sync
};

/// Noncoherent discriminator demodulator: locates the preamble, then takes the
/// phase advance across the central symbol interval of every following symbol.
/// Returns all symbols that fit in the buffer after the preamble.
DemodResult gmsk_demodulate_ex(const IqBuffer& iq, const GmskParams& params, const DemodOptions& opt = {});
Bits gmsk_demodulate(const IqBuffer& iq, const GmskParams& params, const DemodOptions& opt = {});

// ---------------------------------------------------------------------------
// Polyphase filterbank

struct ChannelizerSpec {
  int num_channels = 4;
  int taps_per_phase = 32;
  double prototype_attenuation_db = 60.0;

  void validate() const;
  int prototype_length() const { return num_channels * taps_per_phase; }
  /// Synthesize followed by channelize delays every channel by this many
  /// channel-rate samples.
  int roundtrip_delay() const { return taps_per_phase; }
};

/// Kaiser-windowed sinc low-pass, cutoff pi/M, unit DC gain, length M*P,
/// symmetric about index M*P/2 (tap 0 is zero).
std::vector<double> design_prototype(const ChannelizerSpec& spec);

/// Critically sampled analysis bank: channel c is centered at c * rate / M.
/// Input is zero-padded to a multiple of M.
std::vector<IqBuffer> channelize(const IqBuffer& wideband, const ChannelizerSpec& spec);

/// Inverse structure: M channel buffers of equal length to one wideband buffer.
IqBuffer synthesize(std::span<const IqBuffer> channels, const ChannelizerSpec& spec);

// ---------------------------------------------------------------------------
// Spectrum

struct PsdPoint {
  double freq_hz;
  double db;  ///< relative to the peak bin
};

/// Welch periodogram with a Hann window and 50% overlap, frequencies ascending
/// from -rate/2. `max_segments` = 0 averages every available segment.
std::vector<PsdPoint> power_spectrum(const IqBuffer& iq, std::size_t fft_size, std::size_t max_segments = 0);

struct FdmaSpectrumReport {
  std::size_t peak_count = 0;
  std::vector<double> peak_freq_hz;   ///< one per detected peak region
  std::vector<double> channel_peak_db;  ///< max PSD near each channel center
  double floor_db = 0.0;              ///< max PSD in the inter-channel gaps
  bool peaks_at_centers = false;
};

/// Counts peak regions more than `margin_db` above the inter-channel floor and
/// checks each lies within a quarter channel spacing of a channel center.
FdmaSpectrumReport analyze_fdma_spectrum(std::span<const PsdPoint> psd, int num_channels, double sample_rate,
                                         double margin_db = 20.0);

std::string psd_csv(std::span<const PsdPoint> psd);

// ---------------------------------------------------------------------------
// Utilities

Bits bytes_to_bits(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits);

/// Adds complex white Gaussian noise for a per-sample SNR given unit signal power.
void add_awgn(IqBuffer& iq, double snr_db, std::mt19937_64& rng);

/// IQF1 file: "IQF1", 4 reserved bytes, f64 sample rate, then interleaved f32 I/Q, all little-endian.
void write_iq_file(const IqBuffer& iq, const std::string& path);
IqBuffer read_iq_file(const std::string& path);

}  // namespace swarmlink::dsp

#include <cmath>

#include "swarmlink/dsp.hpp"

namespace swarmlink::dsp {

void ChannelizerSpec::validate() const {
  if (num_channels < 2) throw InvalidArgument("num_channels must be >= 2");
  if (taps_per_phase < 4) throw InvalidArgument("taps_per_phase must be >= 4");
  if (!(prototype_attenuation_db >= 40.0)) throw InvalidArgument("prototype_attenuation_db must be >= 40");
  if ((num_channels * taps_per_phase) % 2 != 0) {
    throw InvalidArgument("num_channels * taps_per_phase must be even");
  }
}

namespace {

double kaiser_beta(double atten_db) {
  if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
  if (atten_db >= 21.0) return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
  return 0.0;
}

std::vector<cf64> twiddles(int m) {
  // exp(+j 2 pi k / M), k = 0 .. M-1
  std::vector<cf64> w(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) w[static_cast<std::size_t>(k)] = std::polar(1.0, 2.0 * std::numbers::pi * k / m);
  return w;
}

}  // namespace

std::vector<double> design_prototype(const ChannelizerSpec& spec) {
  spec.validate();
  const int m = spec.num_channels;
  const int len = spec.prototype_length();
  const double centre = len / 2.0;
  const double beta = kaiser_beta(spec.prototype_attenuation_db);
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  std::vector<double> h(static_cast<std::size_t>(len), 0.0);
  for (int n = 1; n < len; ++n) {
    const double x = n - centre;
    const double arg = std::numbers::pi * x / m;
    const double sinc = x == 0.0 ? 1.0 / m : std::sin(arg) / (std::numbers::pi * x);
    const double r = x / centre;
    const double w = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[static_cast<std::size_t>(n)] = sinc * w;
  }
  double sum = 0.0;
  for (double v : h) sum += v;
  for (auto& v : h) v /= sum;
  return h;
}

std::vector<IqBuffer> channelize(const IqBuffer& wideband, const ChannelizerSpec& spec) {
  const auto h = design_prototype(spec);
  const std::size_t m = static_cast<std::size_t>(spec.num_channels);
  const std::size_t p = static_cast<std::size_t>(spec.taps_per_phase);
  const std::size_t blocks = (wideband.size() + m - 1) / m;
  const auto w = twiddles(spec.num_channels);
  const auto& x = wideband.samples;
  auto sample = [&](std::ptrdiff_t i) -> cf64 {
    return i >= 0 && static_cast<std::size_t>(i) < x.size() ? x[static_cast<std::size_t>(i)] : cf64{};
  };

  std::vector<IqBuffer> out(m);
  for (auto& ch : out) {
    ch.sample_rate = wideband.sample_rate / static_cast<double>(m);
    ch.samples.assign(blocks, cf64{});
  }
  std::vector<cf64> branch(m);
  for (std::size_t b = 0; b < blocks; ++b) {
    // Polyphase branch r filters x[bM - r] with h[pM + r].
    for (std::size_t r = 0; r < m; ++r) {
      cf64 acc{};
      for (std::size_t k = 0; k < p && k <= b; ++k) {
        acc += h[k * m + r] * sample(static_cast<std::ptrdiff_t>((b - k) * m) - static_cast<std::ptrdiff_t>(r));
      }
      branch[r] = acc;
    }
    // y_c = sum_r branch_r exp(+j 2 pi c r / M)
    for (std::size_t c = 0; c < m; ++c) {
      cf64 acc{};
      for (std::size_t r = 0; r < m; ++r) acc += branch[r] * w[(c * r) % m];
      out[c].samples[b] = acc;
    }
  }
  return out;
}

IqBuffer synthesize(std::span<const IqBuffer> channels, const ChannelizerSpec& spec) {
  const auto h = design_prototype(spec);
  const std::size_t m = static_cast<std::size_t>(spec.num_channels);
  const std::size_t p = static_cast<std::size_t>(spec.taps_per_phase);
  if (channels.size() != m) throw InvalidArgument("synthesize needs exactly num_channels buffers");
  const std::size_t blocks = channels[0].size();
  for (const auto& ch : channels) {
    if (ch.size() != blocks) throw InvalidArgument("channel buffers must have equal length");
  }
  const auto w = twiddles(spec.num_channels);

  // Y_r[q] = sum_c y_c[q] exp(+j 2 pi c r / M)
  std::vector<std::vector<cf64>> mixed(m, std::vector<cf64>(blocks));
  for (std::size_t q = 0; q < blocks; ++q) {
    for (std::size_t r = 0; r < m; ++r) {
      cf64 acc{};
      for (std::size_t c = 0; c < m; ++c) acc += channels[c].samples[q] * w[(c * r) % m];
      mixed[r][q] = acc;
    }
  }
  IqBuffer out;
  out.sample_rate = channels[0].sample_rate * static_cast<double>(m);
  out.samples.assign(blocks * m, cf64{});
  const double gain = static_cast<double>(m);
  for (std::size_t q = 0; q < blocks; ++q) {
    for (std::size_t r = 0; r < m; ++r) {
      cf64 acc{};
      for (std::size_t k = 0; k < p && k <= q; ++k) acc += h[k * m + r] * mixed[r][q - k];
      out.samples[q * m + r] = gain * acc;
    }
  }
  return out;
}

}  // namespace swarmlink::dsp

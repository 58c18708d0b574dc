#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>

#include "swarmlink/dsp.hpp"

namespace swarmlink::dsp {

namespace {

// FFTW's planner is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    in_ = fftw_alloc_complex(n);
    out_ = fftw_alloc_complex(n);
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ~FftPlan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  fftw_complex* in() { return in_; }
  const fftw_complex* out() const { return out_; }
  void execute() { fftw_execute(plan_); }

 private:
  std::size_t n_;
  fftw_complex* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace

std::vector<PsdPoint> power_spectrum(const IqBuffer& iq, std::size_t fft_size, std::size_t max_segments) {
  if (fft_size < 2 || !std::has_single_bit(fft_size)) throw InvalidArgument("fft_size must be a power of two");
  if (iq.size() < fft_size) throw InvalidArgument("buffer shorter than fft_size");

  std::vector<double> window(fft_size);
  for (std::size_t i = 0; i < fft_size; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(fft_size));
  }
  const std::size_t hop = fft_size / 2;
  std::size_t segments = (iq.size() - fft_size) / hop + 1;
  if (max_segments > 0) segments = std::min(segments, max_segments);

  FftPlan plan(fft_size);
  std::vector<double> acc(fft_size, 0.0);
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t start = s * hop;
    for (std::size_t i = 0; i < fft_size; ++i) {
      const cf64 v = iq.samples[start + i] * window[i];
      plan.in()[i][0] = v.real();
      plan.in()[i][1] = v.imag();
    }
    plan.execute();
    for (std::size_t k = 0; k < fft_size; ++k) {
      acc[k] += plan.out()[k][0] * plan.out()[k][0] + plan.out()[k][1] * plan.out()[k][1];
    }
  }
  const double peak = *std::max_element(acc.begin(), acc.end());
  std::vector<PsdPoint> psd(fft_size);
  const double bin_hz = iq.sample_rate / static_cast<double>(fft_size);
  for (std::size_t i = 0; i < fft_size; ++i) {
    const std::size_t k = (i + fft_size / 2) % fft_size;  // fftshift
    const double rel = peak > 0.0 ? acc[k] / peak : 0.0;
    psd[i].freq_hz = (static_cast<double>(i) - static_cast<double>(fft_size / 2)) * bin_hz;
    psd[i].db = rel > 0.0 ? std::max(10.0 * std::log10(rel), -300.0) : -300.0;
  }
  return psd;
}

FdmaSpectrumReport analyze_fdma_spectrum(std::span<const PsdPoint> psd, int num_channels, double sample_rate,
                                         double margin_db) {
  if (psd.empty() || num_channels < 1) throw InvalidArgument("empty spectrum");
  const double spacing = sample_rate / num_channels;
  auto offset_from = [&](double f, double centre) {
    // circular distance on [-rate/2, rate/2)
    return std::abs(std::remainder(f - centre, sample_rate));
  };
  auto nearest_centre = [&](double f) {
    double best = sample_rate;
    for (int c = 0; c < num_channels; ++c) best = std::min(best, offset_from(f, c * spacing));
    return best;
  };

  FdmaSpectrumReport rep;
  rep.floor_db = -300.0;
  rep.channel_peak_db.assign(static_cast<std::size_t>(num_channels), -300.0);
  for (const auto& p : psd) {
    // Gap regions: within spacing/8 of the midpoint between neighbouring channels.
    for (int c = 0; c < num_channels; ++c) {
      if (offset_from(p.freq_hz, (c + 0.5) * spacing) <= spacing / 8.0) rep.floor_db = std::max(rep.floor_db, p.db);
      if (offset_from(p.freq_hz, c * spacing) <= spacing / 4.0) {
        rep.channel_peak_db[static_cast<std::size_t>(c)] = std::max(rep.channel_peak_db[static_cast<std::size_t>(c)], p.db);
      }
    }
  }

  // Regions above floor + margin on the circular frequency axis. Dips narrower
  // than a quarter channel spacing do not split a peak.
  const double threshold = rep.floor_db + margin_db;
  const std::size_t n = psd.size();
  const double bin_hz = n > 1 ? std::abs(psd[1].freq_hz - psd[0].freq_hz) : sample_rate;
  const auto guard = static_cast<std::size_t>(std::ceil(spacing / 4.0 / bin_hz));
  std::vector<bool> above(n);
  for (std::size_t i = 0; i < n; ++i) above[i] = psd[i].db >= threshold;
  if (std::none_of(above.begin(), above.end(), [](bool b) { return b; })) return rep;
  if (std::all_of(above.begin(), above.end(), [](bool b) { return b; })) {
    rep.peak_count = 1;
    rep.peak_freq_hz.push_back(std::max_element(psd.begin(), psd.end(), [](auto& a, auto& b) { return a.db < b.db; })->freq_hz);
    return rep;
  }
  std::size_t origin = 0;  // an above bin preceded by a below bin
  while (!(above[origin] && !above[(origin + n - 1) % n])) ++origin;
  std::vector<std::pair<std::size_t, std::size_t>> runs;  // [first, last] offsets from origin
  for (std::size_t k = 0; k < n; ++k) {
    if (!above[(origin + k) % n]) continue;
    if (!runs.empty() && runs.back().second + 1 == k) {
      runs.back().second = k;
    } else {
      runs.push_back({k, k});
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> merged;
  for (const auto& r : runs) {
    if (!merged.empty() && r.first - merged.back().second - 1 < guard) {
      merged.back().second = r.second;
    } else {
      merged.push_back(r);
    }
  }
  if (merged.size() > 1 && (n - 1 - merged.back().second) + merged.front().first < guard) {
    merged.front() = {merged.back().first, merged.front().second + n};
    merged.pop_back();
  }
  for (const auto& [first, last] : merged) {
    std::size_t best = (origin + first) % n;
    for (std::size_t k = first; k <= last; ++k) {
      const std::size_t i = (origin + k) % n;
      if (psd[i].db > psd[best].db) best = i;
    }
    rep.peak_freq_hz.push_back(psd[best].freq_hz);
  }
  rep.peak_count = rep.peak_freq_hz.size();
  rep.peaks_at_centers = rep.peak_count > 0;
  for (double f : rep.peak_freq_hz) {
    if (nearest_centre(f) > spacing / 4.0) rep.peaks_at_centers = false;
  }
  return rep;
}

std::string psd_csv(std::span<const PsdPoint> psd) {
  std::ostringstream os;
  os.precision(12);
  os << "freq_hz,db\n";
  for (const auto& p : psd) os << p.freq_hz << ',' << p.db << '\n';
  return os.str();
}

namespace {

static_assert(std::endian::native == std::endian::little, "IQF1 I/O assumes a little-endian host");

}  // namespace

void write_iq_file(const IqBuffer& iq, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  const char magic[4] = {'I', 'Q', 'F', '1'};
  const std::uint32_t reserved = 0;
  f.write(magic, 4);
  f.write(reinterpret_cast<const char*>(&reserved), 4);
  f.write(reinterpret_cast<const char*>(&iq.sample_rate), 8);
  for (const auto& s : iq.samples) {
    const float pair[2] = {static_cast<float>(s.real()), static_cast<float>(s.imag())};
    f.write(reinterpret_cast<const char*>(pair), sizeof pair);
  }
}

IqBuffer read_iq_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  char header[16];
  if (!f.read(header, 16)) throw ParseError("IQF1 header truncated", static_cast<std::uint64_t>(f.gcount()));
  if (std::memcmp(header, "IQF1", 4) != 0) throw ParseError("bad IQF1 magic", 0);
  IqBuffer iq;
  std::memcpy(&iq.sample_rate, header + 8, 8);
  float pair[2];
  std::uint64_t offset = 16;
  while (f.read(reinterpret_cast<char*>(pair), sizeof pair)) {
    iq.samples.emplace_back(pair[0], pair[1]);
    offset += sizeof pair;
  }
  if (f.gcount() != 0) throw ParseError("IQF1 payload truncated mid-sample", offset);
  return iq;
}

}  // namespace swarmlink::dsp

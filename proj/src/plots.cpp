#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>

#include "swarmlink/record.hpp"

namespace swarmlink::record {

namespace {

constexpr double kW = 640, kH = 420, kMargin = 56;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kW - 2 * kMargin); }
  double py(double y) const { return kH - kMargin - (y - y0) / (y1 - y0) * (kH - 2 * kMargin); }
};

void pad(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double c = std::isfinite(lo) ? lo : 0.0;
    lo = c - 0.5;
    hi = c + 0.5;
    return;
  }
  const double m = 0.05 * (hi - lo);
  lo -= m;
  hi += m;
}

std::string open_svg(const std::string& title) {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW
    << ' ' << kH << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << escape(title) << "</text>\n";
  return o.str();
}

std::string axes(const Frame& f, const std::string& x_label, const std::string& y_label) {
  std::ostringstream o;
  o << "<g font-family=\"sans-serif\" font-size=\"11\" stroke=\"none\" fill=\"#333\">\n";
  o << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kW - 2 * kMargin << "\" height=\""
    << kH - 2 * kMargin << "\" fill=\"none\" stroke=\"#999\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    o << "<text x=\"" << f.px(xv) << "\" y=\"" << kH - kMargin + 16 << "\" text-anchor=\"middle\">" << fmt(xv)
      << "</text>\n";
    o << "<text x=\"" << kMargin - 6 << "\" y=\"" << f.py(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv)
      << "</text>\n";
  }
  o << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">" << escape(x_label)
    << "</text>\n";
  o << "<text transform=\"translate(14," << kH / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label)
    << "</text>\n</g>\n";
  return o.str();
}

std::string polyline(const Frame& f, std::span<const double> x, std::span<const double> y, const char* colour) {
  std::ostringstream o;
  o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    o << fmt(f.px(x[i])) << ',' << fmt(f.py(y[i])) << ' ';
  }
  o << "\"/>\n";
  return o.str();
}

}  // namespace

std::string svg_series(const std::string& title, const std::string& y_label, std::span<const double> x,
                       std::span<const double> y) {
  Frame f{0, 1, 0, 1};
  if (!x.empty()) {
    f.x0 = *std::min_element(x.begin(), x.end());
    f.x1 = *std::max_element(x.begin(), x.end());
    f.y0 = *std::min_element(y.begin(), y.end());
    f.y1 = *std::max_element(y.begin(), y.end());
  }
  if (!(f.x1 > f.x0)) f.x1 = f.x0 + 1.0;
  pad(f.y0, f.y1);
  return open_svg(title) + axes(f, "t [s]", y_label) + polyline(f, x, y, kPalette[0]) + "</svg>\n";
}

std::string svg_gain(const harness::RunRecord& rec) {
  std::vector<double> t, g;
  for (const auto& st : rec.steps) {
    t.push_back(st.t);
    g.push_back(st.gain);
  }
  return svg_series("Normalized array gain", "gain", t, g);
}

std::string svg_formation_error(const harness::RunRecord& rec) {
  std::vector<double> t, e;
  for (const auto& st : rec.steps) {
    t.push_back(st.t);
    e.push_back(st.formation_error * 100.0);
  }
  return svg_series("Formation error", "RMS error [cm]", t, e);
}

std::string svg_trajectories(const harness::RunRecord& rec, const harness::Scenario& sc) {
  Frame f{0, sc.table_size.x, 0, sc.table_size.y};
  for (const auto& st : rec.steps) {
    for (const auto& r : st.robots) {
      f.x0 = std::min(f.x0, r.truth.position.x);
      f.x1 = std::max(f.x1, r.truth.position.x);
      f.y0 = std::min(f.y0, r.truth.position.y);
      f.y1 = std::max(f.y1, r.truth.position.y);
    }
  }
  std::string out = open_svg("Trajectories") + axes(f, "x [m]", "y [m]");
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> paths;
  for (const auto& st : rec.steps) {
    for (const auto& r : st.robots) {
      auto& p = paths[r.id];
      p.first.push_back(r.truth.position.x);
      p.second.push_back(r.truth.position.y);
    }
  }
  std::size_t k = 0;
  for (const auto& [id, p] : paths) {
    const char* colour = kPalette[k++ % std::size(kPalette)];
    out += polyline(f, p.first, p.second, colour);
    out += "<circle cx=\"" + fmt(f.px(p.first.back())) + "\" cy=\"" + fmt(f.py(p.second.back())) +
           "\" r=\"3\" fill=\"" + colour + "\"/>\n";
  }
  if (sc.formation) {
    for (const auto& s : sc.formation->slots) {
      const Vec2 w = sc.anchor + s;
      out += "<circle cx=\"" + fmt(f.px(w.x)) + "\" cy=\"" + fmt(f.py(w.y)) +
             "\" r=\"5\" fill=\"none\" stroke=\"#555\" stroke-dasharray=\"2,2\"/>\n";
    }
  }
  return out + "</svg>\n";
}

std::string svg_beam_polar(std::span<const array::PatternPoint> pattern, const std::string& title) {
  const double cx = kW / 2, cy = kH / 2 + 10, radius = kH / 2 - 50;
  constexpr double kFloorDb = -40.0;
  std::ostringstream o;
  o << open_svg(title);
  for (double db : {0.0, -10.0, -20.0, -30.0}) {
    const double r = radius * (db - kFloorDb) / -kFloorDb;
    o << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << fmt(r)
      << "\" fill=\"none\" stroke=\"#ddd\"/>\n<text x=\"" << cx + 3 << "\" y=\"" << fmt(cy - r - 2)
      << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#777\">" << db << " dB</text>\n";
  }
  o << "<polygon fill=\"rgba(31,119,180,0.15)\" stroke=\"" << kPalette[0] << "\" stroke-width=\"1.5\" points=\"";
  for (const auto& p : pattern) {
    const double db = std::max(kFloorDb, 10.0 * std::log10(std::max(p.gain, 1e-12)));
    const double r = radius * (db - kFloorDb) / -kFloorDb;
    const double az = p.direction.azimuth();
    o << fmt(cx + r * std::cos(az)) << ',' << fmt(cy - r * std::sin(az)) << ' ';
  }
  o << "\"/>\n</svg>\n";
  return o.str();
}

std::string svg_psd(std::span<const dsp::PsdPoint> psd, const std::string& title) {
  std::vector<double> f, d;
  for (const auto& p : psd) {
    f.push_back(p.freq_hz);
    d.push_back(std::max(p.db, -120.0));
  }
  Frame fr{0, 1, -120, 5};
  if (!f.empty()) {
    fr.x0 = f.front();
    fr.x1 = f.back();
  }
  if (!(fr.x1 > fr.x0)) fr.x1 = fr.x0 + 1.0;
  return open_svg(title) + axes(fr, "frequency [Hz]", "PSD [dB rel. peak]") + polyline(fr, f, d, kPalette[0]) +
         "</svg>\n";
}

}  // namespace swarmlink::record

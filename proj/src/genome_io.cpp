#include <charconv>
#include <fstream>
#include <sstream>

#include "swarmlink/ant.hpp"

namespace swarmlink::ant {

namespace {

constexpr int kFormatVersion = 1;

std::string fmt(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += fmt(v[i]);
  }
  return s;
}

std::string fmt_coord(const Coord& c) {
  return std::to_string(c.l) + ',' + std::to_string(c.m) + ',' + std::to_string(c.n);
}

struct LineParser {
  std::string_view line;
  std::uint64_t offset;

  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError("genome: " + why + " in line '" + std::string(line) + "'", offset);
  }

  static std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    if (s.empty()) return out;
    std::size_t start = 0;
    while (true) {
      const auto pos = s.find(sep, start);
      out.push_back(s.substr(start, pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return out;
  }

  double number(std::string_view s) const {
    double x = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail("bad number '" + std::string(s) + "'");
    return x;
  }

  int integer(std::string_view s) const {
    int x = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail("bad integer '" + std::string(s) + "'");
    return x;
  }

  std::vector<double> numbers(std::string_view s) const {
    std::vector<double> v;
    for (auto part : split(s, ',')) v.push_back(number(part));
    return v;
  }

  Coord coord(std::string_view s, char sep = ',') const {
    auto parts = split(s, sep);
    if (parts.size() != 3) fail("expected 3 coordinates");
    return {integer(parts[0]), integer(parts[1]), integer(parts[2])};
  }

  /// Parses "tag k=v k=v ..." and checks the keys appear in exactly the given order.
  std::vector<std::string_view> fields(const std::vector<std::string_view>& keys) const {
    auto tokens = split(line, ' ');
    if (tokens.size() != keys.size() + 1) fail("expected " + std::to_string(keys.size()) + " fields");
    std::vector<std::string_view> values;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const auto tok = tokens[i + 1];
      const auto eq = tok.find('=');
      if (eq == std::string_view::npos || tok.substr(0, eq) != keys[i]) {
        fail("expected field '" + std::string(keys[i]) + "'");
      }
      values.push_back(tok.substr(eq + 1));
    }
    return values;
  }
};

}  // namespace

std::string genome_to_text(const Genome& g) {
  std::ostringstream os;
  os << "# swarmlink ANT genome\n";
  os << "format_version = " << kFormatVersion << '\n';
  os << "lattice_bounds = " << g.lattice_bounds.l << ' ' << g.lattice_bounds.m << ' ' << g.lattice_bounds.n << '\n';
  os << "sensor_map =";
  for (const auto& ch : g.sensor_map) os << ' ' << ch.name << ':' << ch.index;
  os << '\n';
  os << "actuator_count = " << g.actuator_count << '\n';
  os << "regulation_threshold = " << fmt(g.regulation_threshold) << '\n';
  for (const auto& m : g.motor_genes) {
    os << "motor coord=" << fmt_coord(m.coord) << " input_weights=" << fmt_list(m.input_weights)
       << " bias=" << fmt(m.bias) << " activation=" << to_string(m.activation) << " low=" << fmt(m.low_threshold)
       << " high=" << fmt(m.high_threshold) << " tap=" << (m.actuator_tap ? std::to_string(*m.actuator_tap) : "none")
       << '\n';
  }
  for (const auto& d : g.decision_genes) {
    os << "decision coord=" << fmt_coord(d.coord) << " sensor_weights=" << fmt_list(d.sensor_weights)
       << " threshold=" << fmt(d.threshold) << " extent=" << fmt_coord(d.extent)
       << " concentration=" << fmt(d.concentration) << '\n';
  }
  return os.str();
}

Genome genome_from_text(const std::string& text) {
  Genome g;
  g.sensor_map.clear();
  bool have_version = false, have_bounds = false, have_map = false, have_actuators = false, have_reg = false;
  std::uint64_t offset = 0;
  std::string_view all(text);
  while (offset < all.size()) {
    auto end = all.find('\n', offset);
    if (end == std::string_view::npos) end = all.size();
    std::string_view line = all.substr(offset, end - offset);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    LineParser p{line, offset};
    const std::uint64_t next = end + 1;

    if (line.empty() || line.front() == '#') {
      offset = next;
      continue;
    }
    if (line.starts_with("motor ")) {
      auto v = p.fields({"coord", "input_weights", "bias", "activation", "low", "high", "tap"});
      MotorNeuronGene m;
      m.coord = p.coord(v[0]);
      m.input_weights = p.numbers(v[1]);
      m.bias = p.number(v[2]);
      if (v[3] == "sigmoid") m.activation = Activation::sigmoid;
      else if (v[3] == "two_threshold") m.activation = Activation::two_threshold;
      else p.fail("unknown activation");
      m.low_threshold = p.number(v[4]);
      m.high_threshold = p.number(v[5]);
      if (v[6] != "none") m.actuator_tap = p.integer(v[6]);
      g.motor_genes.push_back(std::move(m));
    } else if (line.starts_with("decision ")) {
      auto v = p.fields({"coord", "sensor_weights", "threshold", "extent", "concentration"});
      DecisionNeuronGene d;
      d.coord = p.coord(v[0]);
      d.sensor_weights = p.numbers(v[1]);
      d.threshold = p.number(v[2]);
      d.extent = p.coord(v[3]);
      d.concentration = p.number(v[4]);
      g.decision_genes.push_back(std::move(d));
    } else {
      const auto eq = line.find(" = ");
      if (eq == std::string_view::npos) p.fail("unrecognized line");
      const auto key = line.substr(0, eq);
      const auto value = line.substr(eq + 3);
      if (key == "format_version") {
        if (p.integer(value) != kFormatVersion) p.fail("unsupported format_version");
        have_version = true;
      } else if (key == "lattice_bounds") {
        g.lattice_bounds = p.coord(value, ' ');
        have_bounds = true;
      } else if (key == "sensor_map") {
        for (auto entry : LineParser::split(value, ' ')) {
          const auto colon = entry.rfind(':');
          if (colon == std::string_view::npos) p.fail("sensor_map entries are name:index");
          g.sensor_map.push_back({std::string(entry.substr(0, colon)), p.integer(entry.substr(colon + 1))});
        }
        have_map = true;
      } else if (key == "actuator_count") {
        g.actuator_count = p.integer(value);
        have_actuators = true;
      } else if (key == "regulation_threshold") {
        g.regulation_threshold = p.number(value);
        have_reg = true;
      } else {
        p.fail("unknown key '" + std::string(key) + "'");
      }
    }
    offset = next;
  }
  if (!(have_version && have_bounds && have_map && have_actuators && have_reg)) {
    throw ParseError("genome: incomplete header", text.size());
  }
  try {
    g.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("genome: ") + e.what(), text.size());
  }
  return g;
}

void save_genome(const Genome& genome, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write genome file " + path);
  f << genome_to_text(genome);
}

Genome load_genome(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read genome file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return genome_from_text(ss.str());
}

}  // namespace swarmlink::ant

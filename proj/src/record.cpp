#include "swarmlink/record.hpp"

#include <zlib.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "swarmlink/config.hpp"

namespace swarmlink::record {

using nlohmann::ordered_json;
using namespace harness;

namespace {

ordered_json state_json(const dynamics::RobotState& s) {
  return {s.position.x, s.position.y, s.heading, s.velocity.x, s.velocity.y, s.angular_velocity};
}

dynamics::RobotState state_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 6) throw std::runtime_error("state must have 6 numbers");
  return {{j[0].get<double>(), j[1].get<double>()}, {j[3].get<double>(), j[4].get<double>()}, j[2].get<double>(),
          j[5].get<double>()};
}

ordered_json summary_json(const RunSummary& s) {
  ordered_json j;
  j["fitness"] = s.fitness;
  j["mean_gain"] = s.mean_gain;
  j["mean_formation_error"] = s.mean_formation_error;
  j["min_separation"] = s.min_separation;
  j["steps"] = s.steps;
  j["collision"] = s.collision;
  j["divergence"] = s.divergence;
  j["mute_robot"] = s.mute_robot;
  return j;
}

RunSummary summary_from(const nlohmann::json& j) {
  RunSummary s;
  s.fitness = j.at("fitness").get<double>();
  s.mean_gain = j.at("mean_gain").get<double>();
  s.mean_formation_error = j.at("mean_formation_error").get<double>();
  s.min_separation = j.at("min_separation").get<double>();
  s.steps = j.at("steps").get<std::size_t>();
  s.collision = j.at("collision").get<bool>();
  s.divergence = j.at("divergence").get<bool>();
  s.mute_robot = j.at("mute_robot").get<bool>();
  return s;
}

}  // namespace

std::string to_jsonl(const RunRecord& rec) {
  std::string out;
  ordered_json head;
  head["format"] = kRecordFormat;
  head["version"] = kRecordVersion;
  head["config_hash"] = rec.config_hash;
  head["seed"] = rec.seed;
  head["scenario"] = rec.scenario_text;
  out += head.dump() + "\n";
  for (const auto& st : rec.steps) {
    ordered_json j;
    j["t"] = st.t;
    j["gain"] = st.gain;
    j["formation_error"] = st.formation_error;
    j["steered"] = st.steered;
    j["delivered"] = st.delivered;
    j["min_distance"] = st.min_distance;
    auto robots = ordered_json::array();
    for (const auto& r : st.robots) {
      ordered_json o;
      o["id"] = r.id;
      o["truth"] = state_json(r.truth);
      o["est"] = {r.est_position.x, r.est_position.y, r.est_heading, r.est_velocity.x, r.est_velocity.y};
      o["duties"] = r.duties;
      o["delivered"] = r.delivered;
      o["alive"] = r.alive;
      o["steered"] = r.steered;
      robots.push_back(std::move(o));
    }
    j["robots"] = std::move(robots);
    out += j.dump() + "\n";
  }
  ordered_json tail;
  tail["summary"] = summary_json(rec.summary);
  out += tail.dump() + "\n";
  return out;
}

RunRecord from_jsonl(const std::string& text) {
  RunRecord rec;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool have_summary = false;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) throw ParseError("record: unterminated last line", pos);
    const std::string line = text.substr(pos, end - pos);
    if (have_summary) throw ParseError("record: data after summary", pos);
    try {
      const auto j = nlohmann::json::parse(line);
      if (line_no == 0) {
        if (j.at("format").get<std::string>() != kRecordFormat) throw std::runtime_error("not a run record");
        if (j.at("version").get<int>() != kRecordVersion) throw std::runtime_error("unsupported record version");
        rec.config_hash = j.at("config_hash").get<std::string>();
        rec.seed = j.at("seed").get<std::uint64_t>();
        rec.scenario_text = j.at("scenario").get<std::string>();
      } else if (j.contains("summary")) {
        rec.summary = summary_from(j.at("summary"));
        have_summary = true;
      } else {
        StepRecord st;
        st.t = j.at("t").get<double>();
        st.gain = j.at("gain").get<double>();
        st.formation_error = j.at("formation_error").get<double>();
        st.steered = j.at("steered").get<int>();
        st.delivered = j.at("delivered").get<int>();
        st.min_distance = j.at("min_distance").get<double>();
        for (const auto& o : j.at("robots")) {
          RobotStep r;
          r.id = o.at("id").get<int>();
          r.truth = state_from(o.at("truth"));
          const auto& e = o.at("est");
          if (!e.is_array() || e.size() != 5) throw std::runtime_error("est must have 5 numbers");
          r.est_position = {e[0].get<double>(), e[1].get<double>()};
          r.est_heading = e[2].get<double>();
          r.est_velocity = {e[3].get<double>(), e[4].get<double>()};
          r.duties = o.at("duties").get<std::vector<double>>();
          r.delivered = o.at("delivered").get<int>();
          r.alive = o.at("alive").get<bool>();
          r.steered = o.at("steered").get<bool>();
          st.robots.push_back(std::move(r));
        }
        rec.steps.push_back(std::move(st));
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(std::string("record line ") + std::to_string(line_no + 1) + ": " + e.what(), pos);
    }
    ++line_no;
    pos = end + 1;
  }
  if (line_no == 0) throw ParseError("record: empty", 0);
  if (!have_summary) throw ParseError("record: truncated, no summary line", text.size());
  return rec;
}

std::string gzip(const std::string& data) {
  z_stream zs{};
  // windowBits 15 + 16 selects the gzip wrapper; zlib writes mtime 0 and no name.
  if (deflateInit2(&zs, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw std::runtime_error("deflateInit2 failed");
  }
  std::string out;
  out.resize(deflateBound(&zs, static_cast<uLong>(data.size())) + 32);
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw std::runtime_error("deflate failed");
  out.resize(zs.total_out);
  return out;
}

std::string gunzip(const std::string& data) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 16) != Z_OK) throw std::runtime_error("inflateInit2 failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  std::string out;
  char buf[1 << 15];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof buf;
    rc = inflate(&zs, Z_NO_FLUSH);
    out.append(buf, sizeof buf - zs.avail_out);
    if (rc == Z_STREAM_END) break;
    if (rc != Z_OK) {
      const auto at = zs.total_in;
      const std::string msg = rc == Z_BUF_ERROR ? "truncated compressed stream" : "corrupt compressed stream";
      inflateEnd(&zs);
      throw ParseError("record: " + msg, at);
    }
    if (zs.avail_in == 0 && zs.avail_out != 0) {
      const auto at = zs.total_in;
      inflateEnd(&zs);
      throw ParseError("record: truncated compressed stream", at);
    }
  }
  inflateEnd(&zs);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_record(const RunRecord& rec, const std::string& path) { write_text(path, gzip(to_jsonl(rec))); }

RunRecord read_record(const std::string& path) { return from_jsonl(gunzip(read_file(path))); }

ReplayResult replay(const RunRecord& rec) {
  if (sha256_hex(rec.scenario_text) != rec.config_hash) {
    throw InvalidArgument("record config hash does not match its scenario");
  }
  ReplayResult r;
  r.scenario = parse_config(rec.scenario_text).scenario;
  r.summary = summarize(r.scenario, rec.steps, rec.summary.divergence, rec.summary.mute_robot);
  r.matches = r.summary == rec.summary;
  return r;
}

std::string metrics_csv(const RunRecord& rec) {
  std::ostringstream o;
  o.precision(17);
  o << "t,robot_id,x,y,theta,est_x,est_y,gain,formation_error,alive,msgs_delivered\n";
  for (const auto& st : rec.steps) {
    for (const auto& r : st.robots) {
      o << st.t << ',' << r.id << ',' << r.truth.position.x << ',' << r.truth.position.y << ',' << r.truth.heading
        << ',' << r.est_position.x << ',' << r.est_position.y << ',' << st.gain << ',' << st.formation_error << ','
        << (r.alive ? 1 : 0) << ',' << r.delivered << '\n';
    }
  }
  return o.str();
}

}  // namespace swarmlink::record

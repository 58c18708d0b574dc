#pragma once

#include <string>
#include <vector>

#include "swarmlink/array_physics.hpp"
#include "swarmlink/dsp.hpp"
#include "swarmlink/harness.hpp"

namespace swarmlink::record {

inline constexpr const char* kRecordFormat = "swarmlink-run";
inline constexpr int kRecordVersion = 1;

/// Uncompressed JSON-lines: a header object, one object per step, a summary object.
std::string to_jsonl(const harness::RunRecord& rec);
/// Throws ParseError with the byte offset of the first bad line.
harness::RunRecord from_jsonl(const std::string& text);

/// gzip-compressed JSON-lines. Output bytes depend only on the record.
void write_record(const harness::RunRecord& rec, const std::string& path);
harness::RunRecord read_record(const std::string& path);

std::string gzip(const std::string& data);
/// Throws ParseError on a truncated or corrupt stream, offset into the compressed input.
std::string gunzip(const std::string& data);

struct ReplayResult {
  harness::Scenario scenario;
  harness::RunSummary summary;
  bool matches = false;  ///< recomputed summary equals the recorded one
};

/// Recomputes the summary from the recorded series without re-simulating.
/// Throws InvalidArgument when the config hash does not match the embedded scenario.
ReplayResult replay(const harness::RunRecord& rec);

/// Columns: t, robot_id, x, y, theta, est_x, est_y, gain, formation_error, alive, msgs_delivered.
std::string metrics_csv(const harness::RunRecord& rec);

// SVG plots
std::string svg_trajectories(const harness::RunRecord& rec, const harness::Scenario& scenario);
std::string svg_series(const std::string& title, const std::string& y_label, std::span<const double> x,
                       std::span<const double> y);
std::string svg_gain(const harness::RunRecord& rec);
std::string svg_formation_error(const harness::RunRecord& rec);
std::string svg_beam_polar(std::span<const array::PatternPoint> pattern, const std::string& title);
std::string svg_psd(std::span<const dsp::PsdPoint> psd, const std::string& title);

void write_text(const std::string& path, const std::string& text);
std::string read_file(const std::string& path);

}  // namespace swarmlink::record

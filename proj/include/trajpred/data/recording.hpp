#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "trajpred/core/domain.hpp"

namespace trajpred::data {

inline constexpr double kRecordingHz = 25.0;
inline constexpr double kRecordingDt = 1.0 / kRecordingHz;
inline constexpr int kDefaultDownsample = 5;

inline constexpr std::array<std::string_view, 13> kRecordingColumns = {
    "recording_id", "frame", "track_id", "x", "y", "vx", "vy",
    "ax", "ay", "heading_deg", "width", "length", "agent_class"};

/// One row of a drone-style recording CSV (frame numbers at 25 Hz).
struct RecordingRow {
  std::string recording_id;
  std::int64_t frame = 0;
  std::int64_t track_id = 0;
  double x = 0, y = 0, vx = 0, vy = 0, ax = 0, ay = 0;
  double heading_deg = 0;
  double width = 1.8;
  double length = 4.5;
  std::string agent_class = "car";
};

struct RecordingFile {
  std::string recording_id;
  std::vector<RecordingRow> rows;
};

/// Writes the CSV with a header row; doubles use shortest round-trip formatting.
void write_recording(const RecordingFile& file, const std::filesystem::path& path);
void write_recording(const RecordingFile& file, std::ostream& out);

/// Parses a recording CSV. Schema violations raise SchemaError whose message
/// names the 1-based data row (header excluded).
RecordingFile read_recording(std::istream& in, const std::string& source = "<stream>");
RecordingFile read_recording(const std::filesystem::path& path);

/// One Trajectory per track, ordered by frame; heading converted to radians.
/// dt is the raw 0.04 s and timestep_index is the frame number.
std::vector<Trajectory> to_trajectories(const RecordingFile& file);
std::vector<Trajectory> load_recording(const std::filesystem::path& path);

/// Keeps the states whose timestep index is a multiple of `factor`, renumbers
/// indices by division, and scales dt. Tracks left with fewer than 2 states
/// are dropped.
std::vector<Trajectory> downsample(const std::vector<Trajectory>& trajs, int factor = kDefaultDownsample);

}  // namespace trajpred::data

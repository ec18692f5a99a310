#include "trajpred/data/recording.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "trajpred/core/error.hpp"

namespace trajpred::data {

void write_recording(const RecordingFile& file, std::ostream& out) {
  for (std::size_t i = 0; i < kRecordingColumns.size(); ++i) {
    out << (i ? "," : "") << kRecordingColumns[i];
  }
  out << '\n';
  for (const auto& r : file.rows) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.recording_id, r.frame, r.track_id, r.x, r.y,
                       r.vx, r.vy, r.ax, r.ay, r.heading_deg, r.width, r.length, r.agent_class);
  }
}

void write_recording(const RecordingFile& file, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_recording(file, out);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void schema_fail(const std::string& source, std::size_t row, const std::string& what) {
  throw SchemaError(source + ": row " + std::to_string(row) + ": " + what);
}

double parse_double(std::string_view s, const std::string& source, std::size_t row, std::string_view column) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    schema_fail(source, row, "cannot parse '" + std::string(s) + "' in column '" + std::string(column) + "'");
  }
  if (!std::isfinite(v)) schema_fail(source, row, "non-finite value in column '" + std::string(column) + "'");
  return v;
}

std::int64_t parse_int(std::string_view s, const std::string& source, std::size_t row, std::string_view column) {
  std::int64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    schema_fail(source, row, "cannot parse integer '" + std::string(s) + "' in column '" + std::string(column) + "'");
  }
  return v;
}

}  // namespace

RecordingFile read_recording(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  // Owning keys: `line` is reused for the data rows.
  std::map<std::string, std::size_t, std::less<>> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[std::string(header[i])] = i;
  for (auto name : kRecordingColumns) {
    if (!col.contains(name)) throw SchemaError(source + ": missing column '" + std::string(name) + "'");
  }
  if (header.size() != kRecordingColumns.size()) {
    throw SchemaError(source + ": expected " + std::to_string(kRecordingColumns.size()) + " columns, found " +
                      std::to_string(header.size()));
  }

  RecordingFile file;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const auto f = split_csv(line);
    if (f.size() != header.size()) {
      schema_fail(source, row, "expected " + std::to_string(header.size()) + " fields, found " +
                                   std::to_string(f.size()));
    }
    auto get = [&](std::string_view name) { return f[col.find(name)->second]; };
    auto num = [&](std::string_view name) { return parse_double(get(name), source, row, name); };
    RecordingRow r;
    r.recording_id = std::string(get("recording_id"));
    r.frame = parse_int(get("frame"), source, row, "frame");
    r.track_id = parse_int(get("track_id"), source, row, "track_id");
    r.x = num("x");
    r.y = num("y");
    r.vx = num("vx");
    r.vy = num("vy");
    r.ax = num("ax");
    r.ay = num("ay");
    r.heading_deg = num("heading_deg");
    r.width = num("width");
    r.length = num("length");
    r.agent_class = std::string(get("agent_class"));
    if (r.frame < 0) schema_fail(source, row, "negative frame");
    file.rows.push_back(std::move(r));
  }
  if (!file.rows.empty()) file.recording_id = file.rows.front().recording_id;

  // (frame, track) uniqueness and per-track contiguity.
  std::map<std::int64_t, std::vector<std::pair<std::int64_t, std::size_t>>> by_track;
  for (std::size_t i = 0; i < file.rows.size(); ++i) {
    by_track[file.rows[i].track_id].emplace_back(file.rows[i].frame, i + 1);
  }
  for (auto& [track, frames] : by_track) {
    std::sort(frames.begin(), frames.end());
    for (std::size_t k = 1; k < frames.size(); ++k) {
      if (frames[k].first == frames[k - 1].first) {
        schema_fail(source, frames[k].second, "duplicate frame " + std::to_string(frames[k].first) + " for track " +
                                                  std::to_string(track));
      }
      if (frames[k].first != frames[k - 1].first + 1) {
        schema_fail(source, frames[k].second, "non-contiguous frames for track " + std::to_string(track));
      }
    }
  }
  return file;
}

RecordingFile read_recording(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_recording(in, path.string());
}

std::vector<Trajectory> to_trajectories(const RecordingFile& file) {
  std::map<std::int64_t, std::vector<const RecordingRow*>> by_track;
  for (const auto& r : file.rows) by_track[r.track_id].push_back(&r);
  std::vector<Trajectory> out;
  for (auto& [track, rows] : by_track) {
    std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) { return a->frame < b->frame; });
    Trajectory t;
    t.agent_id = file.recording_id + ":" + std::to_string(track);
    t.dt = kRecordingDt;
    t.states.reserve(rows.size());
    for (const auto* r : rows) {
      t.states.push_back({r->x, r->y, r->vx, r->vy, r->ax, r->ay, r->heading_deg * std::numbers::pi / 180.0,
                          r->frame});
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Trajectory> load_recording(const std::filesystem::path& path) {
  return to_trajectories(read_recording(path));
}

std::vector<Trajectory> downsample(const std::vector<Trajectory>& trajs, int factor) {
  if (factor < 1) throw InvalidInput("downsample factor must be >= 1");
  std::vector<Trajectory> out;
  for (const auto& t : trajs) {
    Trajectory d;
    d.agent_id = t.agent_id;
    d.dt = t.dt * factor;
    for (const auto& s : t.states) {
      if (s.timestep_index % factor != 0) continue;
      AgentState k = s;
      k.timestep_index = s.timestep_index / factor;
      d.states.push_back(k);
    }
    if (d.states.size() >= 2) out.push_back(std::move(d));
  }
  return out;
}

}  // namespace trajpred::data

#include "trajpred/data/synth.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <random>

#include "trajpred/core/error.hpp"

namespace trajpred::data {
namespace {

constexpr double kPi = std::numbers::pi;

struct Sampler {
  std::mt19937_64 rng;
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
};

// Straight line, constant-yaw-rate arc, straight line; every consecutive pair
// of points is exactly `step` apart.
std::vector<Vec2> line_arc_line(Vec2 start, double heading, int n_in, double radius, double turn, int n_out,
                                double step) {
  std::vector<Vec2> pts;
  pts.push_back(start);
  Vec2 p = start;
  for (int k = 0; k < n_in; ++k) {
    p = {start.x + (k + 1) * step * std::cos(heading), start.y + (k + 1) * step * std::sin(heading)};
    pts.push_back(p);
  }
  double h = heading;
  if (turn != 0.0) {
    const double sign = turn > 0 ? 1.0 : -1.0;
    const double dphi = 2.0 * std::asin(step / (2.0 * radius));
    const int n_arc = std::max(1, static_cast<int>(std::lround(std::abs(turn) / dphi)));
    const Vec2 c{p.x - sign * radius * std::sin(h), p.y + sign * radius * std::cos(h)};
    const Vec2 r0{p.x - c.x, p.y - c.y};
    for (int k = 1; k <= n_arc; ++k) {
      const double a = sign * k * dphi;
      const double ca = std::cos(a), sa = std::sin(a);
      pts.push_back({c.x + ca * r0.x - sa * r0.y, c.y + sa * r0.x + ca * r0.y});
    }
    h += sign * n_arc * dphi;
    p = pts.back();
  }
  const Vec2 exit_start = p;
  for (int k = 0; k < n_out; ++k) {
    pts.push_back({exit_start.x + (k + 1) * step * std::cos(h), exit_start.y + (k + 1) * step * std::sin(h)});
  }
  return pts;
}

void append_track(RecordingFile& file, std::int64_t track_id, std::int64_t first_frame, const std::vector<Vec2>& pts) {
  const std::size_t n = pts.size();
  std::vector<double> vx(n), vy(n), ax(n), ay(n);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    vx[k] = (pts[k + 1].x - pts[k].x) / kRecordingDt;
    vy[k] = (pts[k + 1].y - pts[k].y) / kRecordingDt;
  }
  vx[n - 1] = vx[n - 2];
  vy[n - 1] = vy[n - 2];
  for (std::size_t k = 0; k + 1 < n; ++k) {
    ax[k] = (vx[k + 1] - vx[k]) / kRecordingDt;
    ay[k] = (vy[k + 1] - vy[k]) / kRecordingDt;
  }
  ax[n - 1] = ax[n - 2];
  ay[n - 1] = ay[n - 2];
  for (std::size_t k = 0; k < n; ++k) {
    RecordingRow r;
    r.recording_id = file.recording_id;
    r.frame = first_frame + static_cast<std::int64_t>(k);
    r.track_id = track_id;
    r.x = pts[k].x;
    r.y = pts[k].y;
    r.vx = vx[k];
    r.vy = vy[k];
    r.ax = ax[k];
    r.ay = ay[k];
    r.heading_deg = std::atan2(vy[k], vx[k]) * 180.0 / kPi;
    file.rows.push_back(std::move(r));
  }
}

std::vector<Vec2> roundabout_agent(Sampler& s) {
  const double radius = s.uniform(12.0, 18.0);
  const double speed = s.uniform(6.0, 10.0);
  const double step = speed * kRecordingDt;
  const double entry = s.integer(0, 3) * kPi / 2 + s.uniform(-0.1, 0.1);
  const double turn = s.integer(1, 3) * kPi / 2;
  const double heading = entry + kPi / 2;
  const int n_in = static_cast<int>(std::lround(s.uniform(30.0, 50.0) / step));
  const int n_out = static_cast<int>(std::lround(s.uniform(30.0, 50.0) / step));
  const Vec2 e{radius * std::cos(entry), radius * std::sin(entry)};
  const Vec2 start{e.x - n_in * step * std::cos(heading), e.y - n_in * step * std::sin(heading)};
  return line_arc_line(start, heading, n_in, radius, turn, n_out, step);
}

std::vector<Vec2> intersection_agent(Sampler& s) {
  const double arm = s.integer(0, 3) * kPi / 2;
  const double heading = arm + kPi;
  const double speed = s.uniform(5.0, 11.0);
  const double step = speed * kRecordingDt;
  const double dist = s.uniform(40.0, 60.0);
  const Vec2 start{dist * std::cos(arm) + 1.75 * std::sin(heading), dist * std::sin(arm) - 1.75 * std::cos(heading)};
  const int kind = s.integer(0, 2);  // 0 left, 1 right, 2 straight
  double radius = 1.0, turn = 0.0, approach = dist;
  if (kind == 0) {
    radius = s.uniform(10.0, 14.0);
    turn = kPi / 2;
    approach = dist - radius + 1.75;
  } else if (kind == 1) {
    radius = s.uniform(5.0, 8.0);
    turn = -kPi / 2;
    approach = dist - radius - 1.75;
  }
  const int n_in = static_cast<int>(std::lround(std::max(approach, 5.0) / step));
  const int n_out = static_cast<int>(std::lround(s.uniform(30.0, 50.0) / step));
  return line_arc_line(start, heading, n_in, radius, turn, n_out, step);
}

std::vector<Vec2> highway_agent(Sampler& s) {
  const int lane = s.integer(0, kHighwayLanes - 1);
  const double x0 = s.uniform(0.0, 150.0);
  const double v0 = s.uniform(20.0, 28.0);
  const double acc = s.uniform(-0.3, 0.3);
  const int frames = s.integer(300, 450);
  const double duration = frames * kRecordingDt;
  const double wobble_period = s.uniform(6.0, 10.0);
  const double wobble_phase = s.uniform(0.0, 2 * kPi);
  const bool change = s.uniform(0.0, 1.0) < 0.5;
  double t_change = 0.0, dir = 0.0;
  if (change) {
    t_change = s.uniform(2.0, duration - 6.0);
    dir = lane == 0 ? 1.0 : (lane == kHighwayLanes - 1 ? -1.0 : (s.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0));
  }
  const double change_time = kLaneWidth / kLaneChangeSpeed;
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(frames));
  for (int k = 0; k < frames; ++k) {
    const double t = k * kRecordingDt;
    double lateral = 0.0;
    if (change && t > t_change) lateral = dir * kLaneChangeSpeed * std::min(t - t_change, change_time);
    const double y = lane * kLaneWidth + 0.1 * std::sin(2 * kPi * t / wobble_period + wobble_phase) + lateral;
    pts.push_back({x0 + v0 * t + 0.5 * acc * t * t, y});
  }
  return pts;
}

}  // namespace

std::vector<RecordingFile> synth_scenario(Scenario kind, int n_recordings, int agents_per_recording,
                                          std::uint64_t seed) {
  if (n_recordings < 1 || agents_per_recording < 1) throw InvalidInput("synth counts must be >= 1");
  std::vector<RecordingFile> out;
  for (int r = 0; r < n_recordings; ++r) {
    RecordingFile file;
    file.recording_id = fmt::format("{}_{:03d}", to_string(kind), r);
    Sampler s{std::mt19937_64(seed * 0x100000001B3ULL + static_cast<std::uint64_t>(kind) * 7919 +
                              static_cast<std::uint64_t>(r))};
    for (int a = 0; a < agents_per_recording; ++a) {
      std::vector<Vec2> pts;
      std::int64_t first = 0;
      switch (kind) {
        case Scenario::roundabout:
          first = s.integer(0, 250);
          pts = roundabout_agent(s);
          break;
        case Scenario::intersection:
          first = s.integer(0, 250);
          pts = intersection_agent(s);
          break;
        case Scenario::highway:
          first = s.integer(0, 150);
          pts = highway_agent(s);
          break;
      }
      append_track(file, a + 1, first, pts);
    }
    out.push_back(std::move(file));
  }
  return out;
}

std::vector<std::filesystem::path> write_recordings(const std::vector<RecordingFile>& files,
                                                    const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> paths;
  for (const auto& f : files) {
    auto p = dir / (f.recording_id + ".csv");
    write_recording(f, p);
    paths.push_back(std::move(p));
  }
  return paths;
}

}  // namespace trajpred::data

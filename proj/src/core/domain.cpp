#include "trajpred/core/domain.hpp"

#include <cmath>
#include <numbers>

#include "trajpred/core/error.hpp"

namespace trajpred {

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::intersection: return "intersection";
    case Scenario::roundabout: return "roundabout";
    case Scenario::highway: return "highway";
  }
  return "unknown";
}

Scenario parse_scenario(std::string_view name) {
  if (name == "intersection") return Scenario::intersection;
  if (name == "roundabout") return Scenario::roundabout;
  if (name == "highway") return Scenario::highway;
  throw InvalidInput("unknown scenario tag '" + std::string(name) + "'");
}

std::size_t MaskedTrajectory::valid_count() const {
  std::size_t n = 0;
  for (auto m : mask) n += m ? 1 : 0;
  return n;
}

int MaskedTrajectory::last_valid() const {
  for (int i = static_cast<int>(mask.size()) - 1; i >= 0; --i) {
    if (mask[static_cast<std::size_t>(i)]) return i;
  }
  return -1;
}

void validate(const Trajectory& traj) {
  if (traj.states.size() < 2) {
    throw InvalidInput("trajectory '" + traj.agent_id + "' has fewer than 2 states");
  }
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const auto& s = traj.states[i];
    if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.vx) || !std::isfinite(s.vy) ||
        !std::isfinite(s.ax) || !std::isfinite(s.ay) || !std::isfinite(s.yaw)) {
      throw InvalidInput("trajectory '" + traj.agent_id + "' has non-finite state at index " + std::to_string(i));
    }
    if (s.timestep_index < 0) throw InvalidInput("negative timestep index");
    if (i > 0 && s.timestep_index != traj.states[i - 1].timestep_index + 1) {
      throw InvalidInput("trajectory '" + traj.agent_id + "' has non-contiguous timestep at index " +
                         std::to_string(i));
    }
  }
}

std::vector<Action> derive_actions(const Trajectory& traj) {
  if (traj.states.size() < 2) throw InvalidInput("derive_actions needs at least 2 states");
  std::vector<Action> out;
  out.reserve(traj.states.size() - 1);
  for (std::size_t t = 0; t + 1 < traj.states.size(); ++t) {
    out.push_back({traj.states[t + 1].x - traj.states[t].x, traj.states[t + 1].y - traj.states[t].y});
  }
  return out;
}

std::vector<Vec2> reconstruct_positions(Vec2 start, const std::vector<Action>& actions) {
  std::vector<Vec2> out;
  out.reserve(actions.size() + 1);
  out.push_back(start);
  for (const auto& a : actions) {
    const Vec2 prev = out.back();
    out.push_back({prev.x + a.dx, prev.y + a.dy});
  }
  return out;
}

namespace {

MaskedTrajectory slice_masked(const Trajectory& src, std::int64_t t0, int count) {
  MaskedTrajectory out;
  out.traj.agent_id = src.agent_id;
  out.traj.dt = src.dt;
  out.traj.states.resize(static_cast<std::size_t>(count));
  out.mask.assign(static_cast<std::size_t>(count), 0);
  const std::int64_t first = src.first_step();
  for (int k = 0; k < count; ++k) {
    const std::int64_t step = t0 + k;
    const std::int64_t idx = step - first;
    auto& dst = out.traj.states[static_cast<std::size_t>(k)];
    if (idx >= 0 && idx < static_cast<std::int64_t>(src.states.size())) {
      dst = src.states[static_cast<std::size_t>(idx)];
      out.mask[static_cast<std::size_t>(k)] = 1;
    } else {
      dst = AgentState{};
      dst.timestep_index = step;
    }
  }
  return out;
}

Trajectory slice(const Trajectory& src, std::size_t begin, std::size_t count) {
  Trajectory out;
  out.agent_id = src.agent_id;
  out.dt = src.dt;
  out.states.assign(src.states.begin() + static_cast<std::ptrdiff_t>(begin),
                    src.states.begin() + static_cast<std::ptrdiff_t>(begin + count));
  return out;
}

}  // namespace

std::vector<PredictionInstance> window_instances(const std::vector<Trajectory>& recording, int history,
                                                 int horizon, int stride, Scenario scenario,
                                                 const std::string& recording_id) {
  if (history < 2) throw InvalidInput("history length must be >= 2");
  if (horizon < 1) throw InvalidInput("horizon must be >= 1");
  if (stride < 1) throw InvalidInput("stride must be >= 1");

  std::vector<PredictionInstance> out;
  const auto span = static_cast<std::size_t>(history + horizon);
  for (std::size_t i = 0; i < recording.size(); ++i) {
    const auto& target = recording[i];
    if (target.states.size() < span) continue;
    for (std::size_t k = 0; k + span <= target.states.size(); k += static_cast<std::size_t>(stride)) {
      PredictionInstance inst;
      inst.scenario = scenario;
      inst.recording_id = recording_id;
      inst.target_history = slice(target, k, static_cast<std::size_t>(history));
      inst.target_future = slice(target, k + static_cast<std::size_t>(history), static_cast<std::size_t>(horizon));
      const auto& last = inst.target_history.states.back();
      inst.origin = {last.x, last.y};

      const std::int64_t t0 = target.states[k].timestep_index;
      const std::int64_t t_obs_end = t0 + history;  // exclusive
      for (std::size_t j = 0; j < recording.size(); ++j) {
        if (j == i || recording[j].states.empty()) continue;
        const auto& other = recording[j];
        if (other.last_step() < t0 || other.first_step() >= t_obs_end) continue;
        inst.neighbor_histories.push_back(slice_masked(other, t0, history));
        inst.neighbor_futures.push_back(slice_masked(other, t_obs_end, horizon));
      }
      out.push_back(std::move(inst));
    }
  }
  return out;
}

WindowSpec scenario_window_defaults(Scenario s) {
  switch (s) {
    case Scenario::intersection:
    case Scenario::roundabout: return {15, 25};
    case Scenario::highway: return {10, 25};
  }
  throw InvalidInput("unknown scenario");
}

WindowSpec scenario_window_defaults(std::string_view name) { return scenario_window_defaults(parse_scenario(name)); }

namespace {

void shift(Trajectory& t, Vec2 d) {
  for (auto& s : t.states) {
    s.x -= d.x;
    s.y -= d.y;
  }
}

void shift(MaskedTrajectory& t, Vec2 d) {
  for (std::size_t k = 0; k < t.traj.states.size(); ++k) {
    if (!t.mask[k]) continue;
    t.traj.states[k].x -= d.x;
    t.traj.states[k].y -= d.y;
  }
}

}  // namespace

PredictionInstance to_local(const PredictionInstance& inst) {
  if (inst.local_frame) return inst;
  PredictionInstance out = inst;
  shift(out.target_history, inst.origin);
  shift(out.target_future, inst.origin);
  for (auto& n : out.neighbor_histories) shift(n, inst.origin);
  for (auto& n : out.neighbor_futures) shift(n, inst.origin);
  out.local_frame = true;
  return out;
}

std::vector<Vec2> to_global(const PredictionInstance& inst, const std::vector<Vec2>& local) {
  std::vector<Vec2> out;
  out.reserve(local.size());
  for (const auto& p : local) out.push_back({p.x + inst.origin.x, p.y + inst.origin.y});
  return out;
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0) a += two_pi;
  return a - std::numbers::pi;
}

}  // namespace trajpred

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace trajpred {

/// Kinematic state of one agent at one (downsampled) timestep.
struct AgentState {
  double x = 0.0;   // m
  double y = 0.0;   // m
  double vx = 0.0;  // m/s
  double vy = 0.0;  // m/s
  double ax = 0.0;  // m/s^2
  double ay = 0.0;  // m/s^2
  double yaw = 0.0; // rad
  std::int64_t timestep_index = 0;

  bool operator==(const AgentState&) const = default;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Vec2&) const = default;
};

inline constexpr double kDefaultDt = 0.2;

struct Trajectory {
  std::string agent_id;
  std::vector<AgentState> states;
  double dt = kDefaultDt;

  std::size_t size() const noexcept { return states.size(); }
  std::int64_t first_step() const { return states.front().timestep_index; }
  std::int64_t last_step() const { return states.back().timestep_index; }
};

/// Per-step displacement; the action abstraction for IRL and the policy.
struct Action {
  double dx = 0.0;
  double dy = 0.0;

  bool operator==(const Action&) const = default;
};

enum class Scenario { intersection, roundabout, highway };

std::string_view to_string(Scenario s);
/// Throws InvalidInput for unknown names.
Scenario parse_scenario(std::string_view name);

/// A history of `mask.size()` steps aligned with the target's observation
/// window. Absent steps hold zero kinematics and mask 0.
struct MaskedTrajectory {
  Trajectory traj;
  std::vector<std::uint8_t> mask;

  std::size_t valid_count() const;
  /// Index of the last valid step, or -1 if fully masked.
  int last_valid() const;
};

/// One (observation, future, neighbor context) sample, stored in global
/// coordinates. `origin` is the target's last observed position; the model
/// works in the frame translated by -origin.
struct PredictionInstance {
  Trajectory target_history;
  Trajectory target_future;
  std::vector<MaskedTrajectory> neighbor_histories;
  std::vector<MaskedTrajectory> neighbor_futures;
  Scenario scenario = Scenario::roundabout;
  std::string recording_id;
  Vec2 origin;
  bool local_frame = false;

  int history_length() const { return static_cast<int>(target_history.size()); }
  int horizon() const { return static_cast<int>(target_future.size()); }
};

/// Throws InvalidInput if a trajectory violates its invariants
/// (length >= 2, finite kinematics, contiguous timestep indices).
void validate(const Trajectory& traj);

/// a_t = x_{t+1} - x_t. Throws InvalidInput for fewer than 2 states.
std::vector<Action> derive_actions(const Trajectory& traj);

/// Cumulative-sum inverse of derive_actions.
std::vector<Vec2> reconstruct_positions(Vec2 start, const std::vector<Action>& actions);

/// Emits every window of `history + horizon` contiguous steps for every agent
/// as a target, with all co-present agents as neighbors. Windows start every
/// `stride` steps from the start of the target's track.
std::vector<PredictionInstance> window_instances(const std::vector<Trajectory>& recording, int history,
                                                 int horizon, int stride, Scenario scenario = Scenario::roundabout,
                                                 const std::string& recording_id = {});

struct WindowSpec {
  int history = 0;
  int horizon = 0;
};

/// Observation/prediction step counts at dt = 0.2 s for a scenario kind.
WindowSpec scenario_window_defaults(Scenario s);
WindowSpec scenario_window_defaults(std::string_view name);

/// Translation into the instance's scene-local frame (origin at x_L). The
/// returned copy keeps `origin` so to_global can undo the shift.
PredictionInstance to_local(const PredictionInstance& inst);
std::vector<Vec2> to_global(const PredictionInstance& inst, const std::vector<Vec2>& local);

double wrap_angle(double a);

}  // namespace trajpred

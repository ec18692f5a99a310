#include "trajpred/data/dataset.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "trajpred/core/error.hpp"

namespace trajpred::data {

std::vector<std::filesystem::path> recording_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("data directory '" + dir.string() + "' does not exist");
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<Trajectory>> load_source_trajectories(const DataSource& src, int downsample_factor) {
  std::vector<std::vector<Trajectory>> out;
  for (const auto& path : recording_files(src.dir)) out.push_back(downsample(load_recording(path), downsample_factor));
  return out;
}

namespace {

std::vector<PredictionInstance> windows_for(const RecordingFile& file, Scenario scenario, const WindowOptions& opts) {
  const auto defaults = scenario_window_defaults(scenario);
  const int history = opts.history > 0 ? opts.history : defaults.history;
  const int horizon = opts.horizon > 0 ? opts.horizon : defaults.horizon;
  const auto trajs = downsample(to_trajectories(file), opts.downsample);
  return window_instances(trajs, history, horizon, opts.stride, scenario, file.recording_id);
}

}  // namespace

std::vector<PredictionInstance> instances_from_recordings(const std::vector<RecordingFile>& files, Scenario scenario,
                                                          const WindowOptions& opts) {
  std::vector<PredictionInstance> out;
  for (const auto& f : files) {
    auto part = windows_for(f, scenario, opts);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

std::vector<PredictionInstance> load_instances(const DataSource& src, const WindowOptions& opts) {
  std::vector<PredictionInstance> out;
  for (const auto& path : recording_files(src.dir)) {
    auto part = windows_for(read_recording(path), src.scenario, opts);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

std::vector<Trajectory> demonstration_tracks(const std::vector<PredictionInstance>& instances) {
  std::map<std::pair<std::string, std::string>, std::map<std::int64_t, AgentState>> steps;
  std::map<std::pair<std::string, std::string>, double> dts;
  for (const auto& inst : instances) {
    const std::pair key{inst.recording_id, inst.target_history.agent_id};
    auto& track = steps[key];
    dts[key] = inst.target_history.dt;
    for (const auto* part : {&inst.target_history, &inst.target_future}) {
      for (const auto& s : part->states) track[s.timestep_index] = s;
    }
  }
  std::vector<Trajectory> out;
  for (const auto& [key, track] : steps) {
    Trajectory run{key.second, {}, dts[key]};
    auto flush = [&] {
      if (run.states.size() >= 2) out.push_back(run);
      run.states.clear();
    };
    for (const auto& [step, s] : track) {
      if (!run.states.empty() && step != run.states.back().timestep_index + 1) flush();
      run.states.push_back(s);
    }
    flush();
  }
  return out;
}

}  // namespace trajpred::data

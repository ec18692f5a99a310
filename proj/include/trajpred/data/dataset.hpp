#pragma once

#include <filesystem>
#include <vector>

#include "trajpred/core/domain.hpp"
#include "trajpred/data/recording.hpp"

namespace trajpred::data {

/// A directory of recording CSVs that all belong to one scenario kind.
struct DataSource {
  std::filesystem::path dir;
  Scenario scenario = Scenario::roundabout;
};

struct WindowOptions {
  int history = 0;  // 0: scenario default
  int horizon = 0;  // 0: scenario default
  int stride = 1;
  int downsample = kDefaultDownsample;
};

/// Sorted list of *.csv files in a directory. Missing directory -> IoError.
std::vector<std::filesystem::path> recording_files(const std::filesystem::path& dir);

/// Downsampled trajectories of every recording in the source, per recording.
std::vector<std::vector<Trajectory>> load_source_trajectories(const DataSource& src, int downsample);

std::vector<PredictionInstance> instances_from_recordings(const std::vector<RecordingFile>& files, Scenario scenario,
                                                          const WindowOptions& opts);
std::vector<PredictionInstance> load_instances(const DataSource& src, const WindowOptions& opts);

/// Target tracks covered by a set of windows, with overlapping windows merged:
/// one trajectory per contiguous run of (recording, agent) steps, ordered by
/// recording, agent and first step. Runs shorter than 2 states are dropped.
std::vector<Trajectory> demonstration_tracks(const std::vector<PredictionInstance>& instances);

}  // namespace trajpred::data

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "trajpred/core/domain.hpp"
#include "trajpred/data/recording.hpp"

namespace trajpred::data {

/// Highway lane geometry used by the generator.
inline constexpr double kLaneWidth = 3.75;
inline constexpr int kHighwayLanes = 3;
inline constexpr double kLaneChangeSpeed = 1.0;  // m/s lateral

/// Desk-scale stand-ins for drone recordings, sampled at 25 Hz.
///
///  - roundabout: straight tangent approach, constant-speed circular arc
///    (counter-clockwise, 90/180/270 degrees), straight tangent exit.
///  - intersection: straight approach, constant-yaw-rate left/right turn or
///    straight through, straight exit.
///  - highway: lane keeping along +x with mild constant acceleration and a
///    small lateral wobble; some agents perform one lane change at constant
///    lateral velocity.
///
/// Urban paths are sampled at a constant chord length v*dt, so finite
/// difference speed is exactly constant. Velocities and accelerations are
/// forward differences of the sampled positions (the last sample repeats the
/// previous one). Output is a pure function of the arguments.
std::vector<RecordingFile> synth_scenario(Scenario kind, int n_recordings, int agents_per_recording,
                                          std::uint64_t seed);

/// Writes each recording to `<dir>/<recording_id>.csv`; returns the paths.
std::vector<std::filesystem::path> write_recordings(const std::vector<RecordingFile>& files,
                                                    const std::filesystem::path& dir);

}  // namespace trajpred::data

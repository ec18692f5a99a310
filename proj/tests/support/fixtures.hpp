#pragma once

#include <random>
#include <vector>

#include "trajpred/core/domain.hpp"
#include "trajpred/data/dataset.hpp"
#include "trajpred/data/synth.hpp"
#include "trajpred/model/predictor.hpp"

namespace trajpred::testing {

/// Straight-line trajectory from (x0, y0) with constant velocity.
inline Trajectory line(const std::string& id, double x0, double y0, double vx, double vy, int n,
                       std::int64_t first = 0, double dt = kDefaultDt) {
  Trajectory t{id, {}, dt};
  for (int k = 0; k < n; ++k) {
    AgentState s;
    s.x = x0 + vx * dt * k;
    s.y = y0 + vy * dt * k;
    s.vx = vx;
    s.vy = vy;
    s.yaw = std::atan2(vy, vx);
    s.timestep_index = first + k;
    t.states.push_back(s);
  }
  return t;
}

/// Windows cut from a small synthetic recording set.
inline std::vector<PredictionInstance> synthetic_instances(Scenario kind, int recordings, int agents,
                                                           std::uint64_t seed, int stride = 5, int history = 0,
                                                           int horizon = 0) {
  data::WindowOptions wo;
  wo.stride = stride;
  wo.history = history;
  wo.horizon = horizon;
  return data::instances_from_recordings(data::synth_scenario(kind, recordings, agents, seed), kind, wo);
}

/// Tiny predictor for gradient and property tests.
inline model::PredictorConfig tiny_model() {
  model::PredictorConfig c;
  c.encoder.hidden = 6;
  c.encoder.attention_dim = 5;
  c.decoder.channels = 5;
  c.decoder.state_size = 3;
  return c;
}

}  // namespace trajpred::testing

#pragma once

#include <vector>

#include "trajpred/model/batch.hpp"
#include "trajpred/model/decoder.hpp"
#include "trajpred/model/encoder.hpp"

namespace trajpred::model {

struct PredictorConfig {
  EncoderConfig encoder;
  DecoderConfig decoder;
  double radius = data::kDefaultInteractionRadius;
};

/// Encoder + decoder parameter bundle (the trajectory prediction module).
struct TrajectoryPredictor {
  PredictorConfig config;
  EncoderParams encoder;
  DecoderParams decoder;

  TrajectoryPredictor() = default;
  TrajectoryPredictor(const PredictorConfig& cfg, std::uint64_t seed);

  nn::ParamRefs parameters();
  nn::ConstParamRefs parameters() const;

  /// Differentiable forward pass over a prepared batch.
  Rollout forward(nn::Tape& tape, const ModelBatch& batch, bool use_gnn, bool teacher_forcing = false,
                  bool trainable = true) const;
};

/// Predicted future states (local frame, unscaled) per instance, evaluated in
/// chunks of `chunk` instances. Instances may have different horizons.
std::vector<std::vector<AgentState>> predict_states(const TrajectoryPredictor& model,
                                                    const std::vector<PredictionInstance>& instances, bool use_gnn,
                                                    int chunk = 256);

/// Predicted positions in the instance's local frame.
std::vector<std::vector<Vec2>> predict_positions(const TrajectoryPredictor& model,
                                                 const std::vector<PredictionInstance>& instances, bool use_gnn,
                                                 int chunk = 256);

}  // namespace trajpred::model

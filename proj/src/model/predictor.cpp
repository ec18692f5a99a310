#include "trajpred/model/predictor.hpp"

#include <map>

#include "trajpred/model/features.hpp"

namespace trajpred::model {

TrajectoryPredictor::TrajectoryPredictor(const PredictorConfig& cfg, std::uint64_t seed) : config(cfg) {
  nn::Rng rng(seed);
  encoder = EncoderParams(cfg.encoder, rng);
  decoder = DecoderParams(cfg.decoder, cfg.encoder.hidden, rng);
}

nn::ParamRefs TrajectoryPredictor::parameters() {
  nn::ParamRefs out;
  encoder.collect(out);
  decoder.collect(out);
  return out;
}

nn::ConstParamRefs TrajectoryPredictor::parameters() const {
  nn::ConstParamRefs out;
  encoder.collect(out);
  decoder.collect(out);
  return out;
}

Rollout TrajectoryPredictor::forward(nn::Tape& tape, const ModelBatch& batch, bool use_gnn, bool teacher_forcing,
                                     bool trainable) const {
  nn::Var latent = encode(tape, encoder, batch, use_gnn, trainable);
  nn::Var last = tape.constant(batch.last_state);
  return rollout(tape, decoder, latent, last, batch.horizon, teacher_forcing ? &batch.future_states : nullptr,
                 trainable);
}

std::vector<std::vector<AgentState>> predict_states(const TrajectoryPredictor& model,
                                                    const std::vector<PredictionInstance>& instances, bool use_gnn,
                                                    int chunk) {
  std::vector<std::vector<AgentState>> out(instances.size());
  // Group by horizon so each batch shares one rollout length.
  std::map<int, std::vector<std::size_t>> by_horizon;
  for (std::size_t i = 0; i < instances.size(); ++i) by_horizon[instances[i].horizon()].push_back(i);
  BatchOptions opts{model.config.radius, use_gnn};
  for (const auto& [horizon, idx] : by_horizon) {
    for (std::size_t start = 0; start < idx.size(); start += static_cast<std::size_t>(chunk)) {
      const std::size_t end = std::min(idx.size(), start + static_cast<std::size_t>(chunk));
      std::vector<const PredictionInstance*> ptrs;
      for (std::size_t k = start; k < end; ++k) ptrs.push_back(&instances[idx[k]]);
      ModelBatch batch = make_batch(ptrs, opts);
      Eigen::MatrixXd latent;
      {
        nn::Tape tape;
        latent = encode(tape, model.encoder, batch, use_gnn, false).value();
      }
      const auto states = rollout_inference(model.decoder, latent, batch.last_state, horizon);
      for (std::size_t k = start; k < end; ++k) {
        auto& dst = out[idx[k]];
        dst.reserve(static_cast<std::size_t>(horizon));
        for (int t = 0; t < horizon; ++t) {
          dst.push_back(unscaled_state(states[static_cast<std::size_t>(t)].col(
              static_cast<Eigen::Index>(k - start))));
          dst.back().timestep_index = instances[idx[k]].target_history.last_step() + t + 1;
        }
      }
    }
  }
  return out;
}

std::vector<std::vector<Vec2>> predict_positions(const TrajectoryPredictor& model,
                                                 const std::vector<PredictionInstance>& instances, bool use_gnn,
                                                 int chunk) {
  auto states = predict_states(model, instances, use_gnn, chunk);
  std::vector<std::vector<Vec2>> out(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (const auto& s : states[i]) out[i].push_back({s.x, s.y});
  }
  return out;
}

}  // namespace trajpred::model

#pragma once

// Random scenes and encoders for gradient and property tests.

#include <random>

#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"
#include "trajpred/model/batch.hpp"
#include "trajpred/model/encoder.hpp"

namespace trajpred::testing {

inline std::vector<PredictionInstance> random_scene(int n_agents, std::uint64_t seed, int history = 6,
                                                    int horizon = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-15, 15), vel(-8, 8);
  std::vector<Trajectory> rec;
  for (int k = 0; k < n_agents; ++k)
    rec.push_back(line("a" + std::to_string(k), pos(rng), pos(rng), vel(rng), vel(rng), history + horizon + 3));
  return window_instances(rec, history, horizon, 100);
}

inline model::EncoderParams random_encoder(std::uint64_t seed) {
  nn::Rng rng(seed);
  model::EncoderParams p(tiny_model().encoder, rng);
  p.bias.value = random_weights(p.hidden(), 1, seed + 3);
  return p;
}

/// Smallest |pre-activation| of the attention LeakyReLU over the batch.
/// Central differences straddling the kink are meaningless, so gradient
/// cases closer than a margin are redrawn.
inline double attention_kink_margin(const model::EncoderParams& p, const model::ModelBatch& batch) {
  nn::Tape t;
  const nn::Matrix h = model::encode_node_histories(t, p, batch).value();
  const auto& e = batch.edges;
  double margin = 1e300;
  for (std::size_t k = 0; k < e.src.size(); ++k) {
    Eigen::VectorXd z(2 * h.rows() + e.features.rows());
    z << h.col(e.src[k]), h.col(e.dst[k]), e.features.col(static_cast<Eigen::Index>(k));
    margin = std::min(margin, (p.score_proj.value * z).cwiseAbs().minCoeff());
  }
  return margin;
}

inline constexpr double kKinkMargin = 0.02;

}  // namespace trajpred::testing

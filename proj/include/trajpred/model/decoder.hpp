#pragma once

#include <optional>
#include <vector>

#include "trajpred/nn/layers.hpp"

namespace trajpred::model {

struct DecoderConfig {
  int channels = 64;
  int state_size = 16;
  /// Delta, B and C depend on the current input (off: learned constants).
  bool selective = true;
  /// Output head predicts the change of the scaled state (off: the state itself).
  bool residual = true;
  /// Adds dt * velocity of the consumed state to its position before the head
  /// correction (residual mode only), so a zero head yields constant velocity.
  bool kinematic_prior = true;
  /// Adds a projection of the encoder latent to every step's input.
  bool latent_every_step = true;
  /// Multiplies the SSM output by SiLU(gate u_t).
  bool gated = true;
};

/// Autoregressive selective SSM decoder.
///
///   u_t     = embed(s_{t-1}) [+ context(latent)]                (D)
///   delta_t = softplus(delta_proj u_t)                           (D, > 0)
///   B_t, C_t = b_proj u_t, c_proj u_t                            (N each)
///   A       = -exp(a_log)                                        (D x N, diagonal modes)
///   h_t     = exp(delta_t A) h_{t-1} + phi1(delta_t A) delta_t B_t u_t
///   y_t     = (C_t . h_t + skip .* u_t) .* SiLU(gate u_t)         (gate optional)
///   s_t     = s_{t-1} + K s_{t-1} + head(y_t)   (residual, K: position += dt * velocity)
///           | s_{t-1} + head(y_t)              (residual, no kinematic prior)
///           | head(y_t)
///
/// with phi1(z) = (e^z - 1)/z and h_L = seed(latent). State rows are laid out
/// channel-major: row d*N + n.
struct DecoderParams {
  DecoderConfig config;
  nn::Linear embed;       // kStateDim -> D
  nn::Linear delta_proj;  // D -> D
  nn::Linear b_proj;      // D -> N
  nn::Linear c_proj;      // D -> N
  nn::Parameter a_log;    // D*N x 1
  nn::Parameter skip;     // D x 1
  nn::Linear head;        // D -> kStateDim
  nn::Linear seed;        // latent -> D*N
  nn::Parameter context;  // D x latent
  nn::Linear gate;        // D -> D

  DecoderParams() = default;
  DecoderParams(const DecoderConfig& cfg, int latent_dim, nn::Rng& rng);

  void collect(nn::ParamRefs& out);
  void collect(nn::ConstParamRefs& out) const;
};

struct Rollout {
  std::vector<nn::Var> states;  // per future step: kStateDim x B, scaled
  std::vector<nn::Var> xy;      // per future step: 2 x B, metres
};

/// Decodes `horizon` steps from latent (H x B) and the last observed scaled
/// state (kStateDim x B). With `teacher` set, step t consumes the given
/// ground-truth state instead of the previous prediction (teacher[t-1] feeds step t).
/// Throws NumericalDivergence naming the step on a non-finite prediction.
Rollout rollout(nn::Tape& tape, const DecoderParams& p, nn::Var latent, nn::Var last_state, int horizon,
                const std::vector<Eigen::MatrixXd>* teacher = nullptr, bool trainable = true);

/// Same free-running rollout without a gradient graph; returns the scaled
/// states per step. Memory does not grow with the horizon.
std::vector<Eigen::MatrixXd> rollout_inference(const DecoderParams& p, const Eigen::MatrixXd& latent,
                                               const Eigen::MatrixXd& last_state, int horizon);

}  // namespace trajpred::model

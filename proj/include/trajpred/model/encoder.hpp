#pragma once

#include "trajpred/model/batch.hpp"
#include "trajpred/nn/layers.hpp"

namespace trajpred::model {

struct EncoderConfig {
  int hidden = 64;
  int attention_dim = 64;
};

inline constexpr double kAttentionSlope = 0.2;

/// GRU history encoder followed by one graph-attention update of the target.
///
/// Attention logits use a scoring projection over [h_v || h_i || e_vi] and a
/// scoring vector; the aggregation uses a separate value projection:
///
///   alpha_vi = softmax_i( score_vec . LeakyReLU_0.2(score_proj [h_v||h_i||e_vi]) )
///   h'_v     = bias + sum_i alpha_vi * value_proj h_i
///
/// over the inclusive neighbourhood (self edge feature = 0).
struct EncoderParams {
  nn::GruCell gru;
  nn::Parameter score_proj;  // attention_dim x (2H + kEdgeDim)
  nn::Parameter score_vec;   // attention_dim x 1
  nn::Parameter value_proj;  // H x H
  nn::Parameter bias;        // H x 1

  EncoderParams() = default;
  EncoderParams(const EncoderConfig& cfg, nn::Rng& rng);

  int hidden() const { return gru.hidden(); }
  void collect(nn::ParamRefs& out);
  void collect(nn::ConstParamRefs& out) const;
};

/// Final masked GRU state of every node column: H x n_nodes. Masked steps keep
/// the previous hidden state; the initial state is zero.
nn::Var encode_node_histories(nn::Tape& tape, const EncoderParams& p, const ModelBatch& batch, bool trainable = true);

/// Attention weights per edge (1 x K), normalised within each instance.
nn::Var attention_weights(nn::Tape& tape, const EncoderParams& p, nn::Var node_hidden, const AttentionEdges& edges,
                          bool trainable = true);

/// Graph-attention update of every target: H x n_segments.
nn::Var gat_update(nn::Tape& tape, const EncoderParams& p, nn::Var node_hidden, nn::Var weights,
                   const AttentionEdges& edges, bool trainable = true);

/// Latent h_L per instance (H x B). With use_gnn=false the target's recurrent
/// encoding is returned unchanged.
nn::Var encode(nn::Tape& tape, const EncoderParams& p, const ModelBatch& batch, bool use_gnn, bool trainable = true);

}  // namespace trajpred::model

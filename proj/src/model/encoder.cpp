#include "trajpred/model/encoder.hpp"

#include "trajpred/core/error.hpp"
#include "trajpred/model/features.hpp"

namespace trajpred::model {

EncoderParams::EncoderParams(const EncoderConfig& cfg, nn::Rng& rng)
    : gru("encoder.gru", kStateDim, cfg.hidden, rng),
      score_proj(nn::xavier("encoder.score_proj", cfg.attention_dim, 2 * cfg.hidden + kEdgeDim, rng)),
      score_vec(nn::xavier("encoder.score_vec", cfg.attention_dim, 1, rng)),
      value_proj(nn::xavier("encoder.value_proj", cfg.hidden, cfg.hidden, rng)),
      bias(nn::zeros("encoder.bias", cfg.hidden, 1)) {}

void EncoderParams::collect(nn::ParamRefs& out) {
  gru.collect(out);
  out.push_back(&score_proj);
  out.push_back(&score_vec);
  out.push_back(&value_proj);
  out.push_back(&bias);
}

void EncoderParams::collect(nn::ConstParamRefs& out) const {
  gru.collect(out);
  out.push_back(&score_proj);
  out.push_back(&score_vec);
  out.push_back(&value_proj);
  out.push_back(&bias);
}

nn::Var encode_node_histories(nn::Tape& tape, const EncoderParams& p, const ModelBatch& batch, bool trainable) {
  if (batch.node_inputs.empty()) throw InvalidInput("batch has no history steps");
  for (const auto& x : batch.node_inputs) {
    if (x.rows() != p.gru.in_dim() || x.cols() != batch.n_nodes) throw InvalidInput("node input shape mismatch");
  }
  nn::Var h = tape.constant(nn::Matrix::Zero(p.hidden(), batch.n_nodes));
  for (std::size_t t = 0; t < batch.node_inputs.size(); ++t) {
    nn::Var x = tape.constant(batch.node_inputs[t]);
    nn::Var m = tape.constant(batch.node_masks[t]);
    nn::Var cand = p.gru.step(tape, x, h, trainable);
    // h <- h + m * (cand - h)
    h = h + ad::mul_row(cand - h, m);
  }
  return h;
}

nn::Var attention_weights(nn::Tape& tape, const EncoderParams& p, nn::Var node_hidden, const AttentionEdges& edges,
                          bool trainable) {
  nn::Var hv = ad::gather_cols(node_hidden, edges.src);
  nn::Var hi = ad::gather_cols(node_hidden, edges.dst);
  nn::Var e = tape.constant(edges.features);
  nn::Var z = ad::matmul(tape.param(p.score_proj, trainable), ad::concat_rows({hv, hi, e}));
  nn::Var act = ad::leaky_relu(z, kAttentionSlope);
  nn::Var scores = ad::col_sums(ad::mul_col(act, tape.param(p.score_vec, trainable)));
  return ad::segment_softmax(scores, edges.segment);
}

nn::Var gat_update(nn::Tape& tape, const EncoderParams& p, nn::Var node_hidden, nn::Var weights,
                   const AttentionEdges& edges, bool trainable) {
  nn::Var values = ad::matmul(tape.param(p.value_proj, trainable), ad::gather_cols(node_hidden, edges.dst));
  nn::Var weighted = ad::mul_row(values, weights);
  nn::Var agg = ad::segment_sum_cols(weighted, edges.segment, edges.n_segments);
  return ad::add_col(agg, tape.param(p.bias, trainable));
}

nn::Var encode(nn::Tape& tape, const EncoderParams& p, const ModelBatch& batch, bool use_gnn, bool trainable) {
  nn::Var nodes = encode_node_histories(tape, p, batch, trainable);
  if (!use_gnn) return ad::gather_cols(nodes, batch.target_column);
  nn::Var w = attention_weights(tape, p, nodes, batch.edges, trainable);
  return gat_update(tape, p, nodes, w, batch.edges, trainable);
}

}  // namespace trajpred::model

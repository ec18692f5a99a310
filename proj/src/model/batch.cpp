#include "trajpred/model/batch.hpp"

#include <algorithm>

#include "trajpred/core/error.hpp"
#include "trajpred/model/features.hpp"

namespace trajpred::model {

ModelBatch make_batch(const std::vector<PredictionInstance>& instances, const BatchOptions& opts) {
  std::vector<const PredictionInstance*> ptrs;
  ptrs.reserve(instances.size());
  for (const auto& i : instances) ptrs.push_back(&i);
  return make_batch(ptrs, opts);
}

ModelBatch make_batch(const std::vector<const PredictionInstance*>& instances, const BatchOptions& opts) {
  if (instances.empty()) throw InvalidInput("empty batch");
  ModelBatch b;
  b.batch_size = static_cast<int>(instances.size());
  b.horizon = instances.front()->horizon();
  for (const auto* inst : instances) {
    if (inst->horizon() != b.horizon) throw InvalidInput("instances in a batch must share the horizon");
    if (inst->history_length() < 1) throw InvalidInput("instance without history");
    b.steps = std::max(b.steps, inst->history_length());
  }

  // Node columns: per instance, target first, then graph neighbors.
  struct NodeRef {
    const PredictionInstance* inst;
    int source;  // -1 target
  };
  std::vector<NodeRef> nodes;
  b.local.reserve(instances.size());
  std::vector<std::vector<double>> edge_cols;
  for (int i = 0; i < b.batch_size; ++i) {
    b.local.push_back(to_local(*instances[static_cast<std::size_t>(i)]));
    const auto& inst = b.local.back();
    data::TrafficGraph g;
    if (opts.use_gnn) {
      g = data::build_graph(inst, opts.radius);
    } else {
      g.node_features = data::state_vector(inst.target_history.states.back()).transpose();
      g.node_source = {-1};
      g.edge_features.resize(0, data::kEdgeFeatureDim);
    }
    const int base = static_cast<int>(nodes.size());
    b.target_column.push_back(base);
    for (int src : g.node_source) nodes.push_back({nullptr, src});
    // Self edge first, then the target's outgoing edges.
    b.edges.src.push_back(base);
    b.edges.dst.push_back(base);
    b.edges.segment.push_back(i);
    edge_cols.push_back(std::vector<double>(kEdgeDim, 0.0));
    for (int k : g.target_out_edges()) {
      b.edges.src.push_back(base);
      b.edges.dst.push_back(base + g.edge_index[static_cast<std::size_t>(k)].second);
      b.edges.segment.push_back(i);
      std::vector<double> f(kEdgeDim);
      for (int c = 0; c < kEdgeDim; ++c) f[static_cast<std::size_t>(c)] = g.edge_features(k, c);
      edge_cols.push_back(std::move(f));
    }
    b.graphs.push_back(std::move(g));
  }
  // Fix instance pointers now that `local` will not reallocate.
  {
    std::size_t n = 0;
    for (int i = 0; i < b.batch_size; ++i) {
      for (std::size_t k = 0; k < b.graphs[static_cast<std::size_t>(i)].node_source.size(); ++k) {
        nodes[n++].inst = &b.local[static_cast<std::size_t>(i)];
      }
    }
  }
  b.n_nodes = static_cast<int>(nodes.size());
  b.edges.n_segments = b.batch_size;
  const auto escale = edge_scale();
  b.edges.features.resize(kEdgeDim, static_cast<Eigen::Index>(edge_cols.size()));
  for (std::size_t k = 0; k < edge_cols.size(); ++k) {
    for (int c = 0; c < kEdgeDim; ++c) {
      b.edges.features(c, static_cast<Eigen::Index>(k)) = edge_cols[k][static_cast<std::size_t>(c)] / escale(c);
    }
  }

  b.node_inputs.assign(static_cast<std::size_t>(b.steps), Eigen::MatrixXd::Zero(kStateDim, b.n_nodes));
  b.node_masks.assign(static_cast<std::size_t>(b.steps), Eigen::MatrixXd::Zero(1, b.n_nodes));
  for (int col = 0; col < b.n_nodes; ++col) {
    const auto& ref = nodes[static_cast<std::size_t>(col)];
    const int L = ref.inst->history_length();
    const int pad = b.steps - L;
    for (int t = 0; t < L; ++t) {
      const AgentState* s = nullptr;
      if (ref.source < 0) {
        s = &ref.inst->target_history.states[static_cast<std::size_t>(t)];
      } else {
        const auto& n = ref.inst->neighbor_histories[static_cast<std::size_t>(ref.source)];
        if (n.mask[static_cast<std::size_t>(t)]) s = &n.traj.states[static_cast<std::size_t>(t)];
      }
      if (!s) continue;
      b.node_inputs[static_cast<std::size_t>(pad + t)].col(col) = scaled_state(*s);
      b.node_masks[static_cast<std::size_t>(pad + t)](0, col) = 1.0;
    }
  }

  b.last_state.resize(kStateDim, b.batch_size);
  b.future_states.assign(static_cast<std::size_t>(b.horizon), Eigen::MatrixXd(kStateDim, b.batch_size));
  b.future_xy.assign(static_cast<std::size_t>(b.horizon), Eigen::MatrixXd(2, b.batch_size));
  for (int i = 0; i < b.batch_size; ++i) {
    const auto& inst = b.local[static_cast<std::size_t>(i)];
    b.last_state.col(i) = scaled_state(inst.target_history.states.back());
    for (int t = 0; t < b.horizon; ++t) {
      const auto& s = inst.target_future.states[static_cast<std::size_t>(t)];
      b.future_states[static_cast<std::size_t>(t)].col(i) = scaled_state(s);
      b.future_xy[static_cast<std::size_t>(t)](0, i) = s.x;
      b.future_xy[static_cast<std::size_t>(t)](1, i) = s.y;
    }
  }
  return b;
}

}  // namespace trajpred::model

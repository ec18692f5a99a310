#pragma once

#include <Eigen/Dense>
#include <vector>

#include "trajpred/core/domain.hpp"
#include "trajpred/data/graph.hpp"

namespace trajpred::model {

/// Target-centred attention edges across a batch. Edge k connects the target
/// node column src[k] to node column dst[k]; the self edge of every target is
/// included with a zero feature vector. Edges of one instance are contiguous.
struct AttentionEdges {
  std::vector<int> src;
  std::vector<int> dst;
  std::vector<int> segment;  // instance index per edge
  Eigen::MatrixXd features;  // kEdgeDim x K, scaled
  int n_segments = 0;
};

/// Network-ready tensors for a batch of instances in their local frames.
/// All nodes of all instances are columns of the per-step node matrices.
/// Histories are right-aligned; padding and absent steps have mask 0.
struct ModelBatch {
  int batch_size = 0;
  int steps = 0;    // longest history in the batch
  int horizon = 0;  // shared prediction length
  std::vector<Eigen::MatrixXd> node_inputs;  // per step: kStateDim x n_nodes
  std::vector<Eigen::MatrixXd> node_masks;   // per step: 1 x n_nodes
  std::vector<int> target_column;            // per instance
  int n_nodes = 0;
  AttentionEdges edges;
  Eigen::MatrixXd last_state;                   // kStateDim x B, scaled s_L
  std::vector<Eigen::MatrixXd> future_states;   // per future step: kStateDim x B, scaled
  std::vector<Eigen::MatrixXd> future_xy;       // per future step: 2 x B, metres (local)
  std::vector<PredictionInstance> local;        // the instances in local frame
  std::vector<data::TrafficGraph> graphs;
};

struct BatchOptions {
  double radius = data::kDefaultInteractionRadius;
  /// false: every instance is encoded from its target alone (no graph fusion).
  bool use_gnn = true;
};

/// Instances must share a horizon; history lengths may differ.
ModelBatch make_batch(const std::vector<const PredictionInstance*>& instances, const BatchOptions& opts);
ModelBatch make_batch(const std::vector<PredictionInstance>& instances, const BatchOptions& opts);

}  // namespace trajpred::model

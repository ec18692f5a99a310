#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "trajpred/core/domain.hpp"

namespace trajpred::data {

inline constexpr int kNodeFeatureDim = 7;  // x, y, vx, vy, ax, ay, yaw
inline constexpr int kEdgeFeatureDim = 5;  // rel x, rel y, rel vx, rel vy, distance
inline constexpr double kDefaultInteractionRadius = 30.0;

/// Interaction graph of one instance. Node 0 is always the target.
struct TrafficGraph {
  Eigen::MatrixXd node_features;  // n_nodes x kNodeFeatureDim, last observed state
  std::vector<std::pair<int, int>> edge_index;
  Eigen::MatrixXd edge_features;  // n_edges x kEdgeFeatureDim, row k <-> edge_index[k]
  int target_node = 0;
  /// -1 for the target, otherwise the index into neighbor_histories.
  std::vector<int> node_source;

  int num_nodes() const { return static_cast<int>(node_source.size()); }
  int num_edges() const { return static_cast<int>(edge_index.size()); }
  /// Indices of edges (target, j), in edge order.
  std::vector<int> target_out_edges() const;
};

Eigen::Matrix<double, kNodeFeatureDim, 1> state_vector(const AgentState& s);

/// Nodes: target plus every neighbor whose last valid observed position lies
/// within `radius` of the target's last position. Directed edges both ways
/// between every pair of nodes at most `radius` apart; no self-loops. Edge
/// (v, i) carries [p_i - p_v, v_i - v_v, |p_i - p_v|].
TrafficGraph build_graph(const PredictionInstance& instance, double radius = kDefaultInteractionRadius);

}  // namespace trajpred::data

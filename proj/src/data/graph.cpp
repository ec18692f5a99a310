#include "trajpred/data/graph.hpp"

#include <cmath>

namespace trajpred::data {

std::vector<int> TrafficGraph::target_out_edges() const {
  std::vector<int> out;
  for (std::size_t k = 0; k < edge_index.size(); ++k) {
    if (edge_index[k].first == target_node) out.push_back(static_cast<int>(k));
  }
  return out;
}

Eigen::Matrix<double, kNodeFeatureDim, 1> state_vector(const AgentState& s) {
  Eigen::Matrix<double, kNodeFeatureDim, 1> v;
  v << s.x, s.y, s.vx, s.vy, s.ax, s.ay, s.yaw;
  return v;
}

TrafficGraph build_graph(const PredictionInstance& instance, double radius) {
  std::vector<const AgentState*> last;
  TrafficGraph g;
  const AgentState& target = instance.target_history.states.back();
  last.push_back(&target);
  g.node_source.push_back(-1);
  for (std::size_t k = 0; k < instance.neighbor_histories.size(); ++k) {
    const auto& n = instance.neighbor_histories[k];
    const int lv = n.last_valid();
    if (lv < 0) continue;
    const AgentState& s = n.traj.states[static_cast<std::size_t>(lv)];
    if (std::hypot(s.x - target.x, s.y - target.y) <= radius) {
      last.push_back(&s);
      g.node_source.push_back(static_cast<int>(k));
    }
  }

  const auto n = static_cast<Eigen::Index>(last.size());
  g.node_features.resize(n, kNodeFeatureDim);
  for (Eigen::Index i = 0; i < n; ++i) g.node_features.row(i) = state_vector(*last[static_cast<std::size_t>(i)]);

  std::vector<Eigen::Matrix<double, 1, kEdgeFeatureDim>> feats;
  for (Eigen::Index v = 0; v < n; ++v) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (v == i) continue;
      const auto& a = *last[static_cast<std::size_t>(v)];
      const auto& b = *last[static_cast<std::size_t>(i)];
      const double dx = b.x - a.x, dy = b.y - a.y;
      const double d = std::hypot(dx, dy);
      if (d > radius) continue;
      g.edge_index.emplace_back(static_cast<int>(v), static_cast<int>(i));
      Eigen::Matrix<double, 1, kEdgeFeatureDim> e;
      e << dx, dy, b.vx - a.vx, b.vy - a.vy, d;
      feats.push_back(e);
    }
  }
  g.edge_features.resize(static_cast<Eigen::Index>(feats.size()), kEdgeFeatureDim);
  for (std::size_t k = 0; k < feats.size(); ++k) g.edge_features.row(static_cast<Eigen::Index>(k)) = feats[k];
  return g;
}

}  // namespace trajpred::data

#pragma once

#include <Eigen/Dense>
#include <numbers>

#include "trajpred/core/domain.hpp"
#include "trajpred/data/graph.hpp"

namespace trajpred::model {

/// State feature vector (x, y, vx, vy, ax, ay, yaw) in the scene-local frame.
inline constexpr int kStateDim = data::kNodeFeatureDim;
inline constexpr int kEdgeDim = data::kEdgeFeatureDim;

// Fixed divisors that bring features to O(1) before they enter a network.
inline constexpr double kPosScale = 10.0;
inline constexpr double kVelScale = 10.0;
inline constexpr double kAccScale = 5.0;
inline constexpr double kYawScale = std::numbers::pi;

/// Kinematic features used by the reward and the policy: (vx, vy, ax, ay) scaled.
inline constexpr int kKinematicDim = 4;
inline constexpr int kActionDim = 2;
inline constexpr double kActionScale = 2.0;  // metres per unit action feature
/// Displacement bound per 0.2 s step (30 m/s).
inline constexpr double kMaxDisplacement = 6.0;

inline Eigen::Matrix<double, kStateDim, 1> state_scale() {
  Eigen::Matrix<double, kStateDim, 1> s;
  s << kPosScale, kPosScale, kVelScale, kVelScale, kAccScale, kAccScale, kYawScale;
  return s;
}

inline Eigen::Matrix<double, kEdgeDim, 1> edge_scale() {
  Eigen::Matrix<double, kEdgeDim, 1> s;
  s << kPosScale, kPosScale, kVelScale, kVelScale, kPosScale;
  return s;
}

/// Scaled state vector; yaw is wrapped to (-pi, pi].
inline Eigen::Matrix<double, kStateDim, 1> scaled_state(const AgentState& s) {
  Eigen::Matrix<double, kStateDim, 1> v;
  v << s.x, s.y, s.vx, s.vy, s.ax, s.ay, wrap_angle(s.yaw);
  return v.cwiseQuotient(state_scale());
}

inline AgentState unscaled_state(const Eigen::Ref<const Eigen::VectorXd>& v) {
  AgentState s;
  s.x = v(0) * kPosScale;
  s.y = v(1) * kPosScale;
  s.vx = v(2) * kVelScale;
  s.vy = v(3) * kVelScale;
  s.ax = v(4) * kAccScale;
  s.ay = v(5) * kAccScale;
  s.yaw = v(6) * kYawScale;
  return s;
}

inline Eigen::Vector4d kinematic_features(const AgentState& s) {
  return {s.vx / kVelScale, s.vy / kVelScale, s.ax / kAccScale, s.ay / kAccScale};
}

inline Eigen::Vector2d action_features(const Action& a) { return {a.dx / kActionScale, a.dy / kActionScale}; }

}  // namespace trajpred::model

#pragma once

#include <random>
#include <vector>

#include "trajpred/core/domain.hpp"
#include "trajpred/nn/layers.hpp"

namespace trajpred::irl {

using nn::Matrix;

/// Reward input: kinematic state features (4) followed by action features (2).
inline constexpr int kRewardInputDim = 6;

struct RewardConfig {
  int input_dim = kRewardInputDim;
  int hidden = 64;
  double l2 = 1e-3;  // regularisation weight on the squared parameter norm
};

/// R(s, a) as a 2-hidden-layer tanh network with a scalar output.
struct RewardNet {
  RewardConfig config;
  nn::Mlp net;

  RewardNet() = default;
  RewardNet(const RewardConfig& cfg, std::uint64_t seed);

  /// inputs: input_dim x P; returns 1 x P.
  nn::Var forward(nn::Tape& tape, nn::Var inputs, bool trainable = true) const;
  Matrix evaluate(const Matrix& inputs) const;

  nn::ParamRefs parameters();
  nn::ConstParamRefs parameters() const;
};

/// Reward input column for one state-action pair.
Eigen::VectorXd pair_features(const AgentState& s, const Action& a);

/// State-action pairs of a set of trajectories, grouped by trajectory.
struct PairSet {
  Matrix features;                // input_dim x P
  std::vector<int> trajectory;    // trajectory index per pair column
  int n_trajectories = 0;

  Eigen::Index size() const { return features.cols(); }
};

/// Pairs (s_t, x_{t+1} - x_t) for t = 1..n-1 of every trajectory.
PairSet demonstration_pairs(const std::vector<Trajectory>& trajs);

/// Sum of rewards over the trajectory's state-action pairs.
double trajectory_return(const RewardNet& r, const Trajectory& traj);

/// Monte-Carlo log partition estimate from per-pair rewards:
///   log Z ~= logsumexp(R) - log M - log q
/// where q is the constant proposal probability of every sample. Throws
/// InvalidInput for M = 0.
double estimate_log_z(const Eigen::RowVectorXd& rewards, double log_proposal);
nn::Var estimate_log_z(nn::Var rewards, double log_proposal);

/// How the M partition samples are drawn.
enum class ZSampling {
  /// state-action pairs drawn uniformly from the demonstration pool
  demo_pairs,
  /// states from the pool, actions uniform in the displacement box [-a_max, a_max]^2
  uniform_action,
};

struct ZSampler {
  ZSampling mode = ZSampling::uniform_action;
  int samples = 1024;
  double max_displacement = 6.0;

  /// Draws samples from `pool` (a demonstration PairSet) into input columns.
  Matrix draw(const PairSet& pool, std::mt19937_64& rng) const;
  /// Constant proposal probability: 1 / (number of pool pairs).
  static double log_proposal(const PairSet& pool);
};

/// L_RF = -mean_tau[ sum_t R(s_t, a_t) - n_tau log Z ] + l2 * ||theta||^2
/// with the expectation over the demonstration trajectories in `demos` and
/// one log Z shared by the batch.
struct RfLoss {
  nn::Var loss;
  double log_z = 0.0;
  double mean_return = 0.0;
};
RfLoss loss_rf(nn::Tape& tape, const RewardNet& r, const PairSet& demos, const Matrix& samples, double log_proposal,
               bool trainable = true);

ZSampling parse_z_sampling(std::string_view name);
std::string_view to_string(ZSampling s);

}  // namespace trajpred::irl

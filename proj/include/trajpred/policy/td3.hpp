#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <vector>

#include "json.hpp"
#include "trajpred/irl/reward.hpp"
#include "trajpred/model/features.hpp"
#include "trajpred/model/predictor.hpp"

namespace trajpred::policy {

using nn::Matrix;

struct Td3Config {
  int state_dim = model::kKinematicDim;
  int action_dim = model::kActionDim;
  int hidden = 64;
  double max_action = model::kMaxDisplacement;
  double discount = 0.99;
  double tau = 0.005;
  /// Target policy smoothing noise std and clip, as fractions of max_action.
  double policy_noise = 0.2;
  double noise_clip = 0.5;
  int batch_size = 128;
  int policy_delay = 3;
  double lr_actor = 3e-4;
  double lr_critic = 3e-4;
  int epochs = 80;
  /// Critic updates per epoch; 0 means one pass worth of batches over the buffer.
  int steps_per_epoch = 0;
  /// Actor loss: -q_weight * Q1(s, pi(s)) / mean|Q1| + bc_weight * ||pi(s) - a||^2.
  double q_weight = 2.5;
  double bc_weight = 1.0;
  /// Recompute the penalty part of every reward at the start of each epoch.
  bool relabel_each_epoch = true;
  std::uint64_t seed = 0;
};

void validate(const Td3Config& cfg);
nlohmann::json to_json(const Td3Config& cfg);
/// Starts from defaults; unknown keys raise InvalidInput.
Td3Config td3_config_from_json(const nlohmann::json& j);

/// Transitions stored column-wise. Actions are in metres.
struct ReplayBuffer {
  Matrix states;       // state_dim x n
  Matrix actions;      // action_dim x n
  Matrix next_states;  // state_dim x n
  Eigen::RowVectorXd rewards;
  /// Reward-network part of each reward, kept so the penalty can be relabeled.
  Eigen::RowVectorXd base_rewards;
  Eigen::RowVectorXd done;  // 1 at trajectory ends

  Eigen::Index size() const { return states.cols(); }
};

/// Deterministic actor pi(s) = max_action * tanh(mlp(s)) with twin critics
/// Q(s, a / max_action) and target copies.
struct Td3Agent {
  Td3Config config;
  nn::Mlp actor;
  nn::Mlp critic1;
  nn::Mlp critic2;
  nn::Mlp actor_target;
  nn::Mlp critic1_target;
  nn::Mlp critic2_target;

  Td3Agent() = default;
  explicit Td3Agent(const Td3Config& cfg);

  /// states: state_dim x B -> action_dim x B.
  Matrix act(const Matrix& states) const;
  nn::ParamRefs parameters();
  nn::ConstParamRefs parameters() const;
};

/// r = R(s, a) - ||a - pi(s)||^2.
double label_reward(const AgentState& s, const Action& a, const irl::RewardNet& reward, const Td3Agent& agent);

/// One transition per consecutive state pair of every trajectory; the last
/// transition of each trajectory has done = 1. Throws InvalidInput when no
/// trajectory has two states.
ReplayBuffer build_replay(const std::vector<Trajectory>& demos, const irl::RewardNet& reward, const Td3Agent& agent);

/// rewards = base_rewards - ||a - pi(s)||^2 with the current actor.
void relabel_penalty(ReplayBuffer& buffer, const Td3Agent& agent);

struct Td3Stats {
  long critic_updates = 0;
  long actor_updates = 0;
  std::vector<double> epoch_critic_loss;
  std::vector<double> epoch_actor_loss;
};

using Relabel = std::function<void(ReplayBuffer&, const Td3Agent&)>;

/// Offline TD3 over a fixed buffer. `relabel` runs before every epoch when
/// relabel_each_epoch is set. Throws InvalidInput if the buffer is smaller than
/// a batch and TrainingFailure on a non-finite loss.
Td3Stats td3_train(Td3Agent& agent, ReplayBuffer& buffer, const Relabel& relabel = {},
                   const std::function<void(int epoch, const Td3Stats&)>& on_epoch = {});

/// Offsets x_L + cumulative sum of actions, one point per action.
std::vector<Vec2> cumulative_coordinates(Vec2 last, const std::vector<Action>& actions);

/// Future coordinates in each instance's local frame: predict future states
/// with the TPM, take a_t = pi(s_t) for every predicted state and accumulate
/// the actions from x_L. The TPM's own coordinates are not used.
std::vector<std::vector<Vec2>> ood_predict(const model::TrajectoryPredictor& predictor, const Td3Agent& agent,
                                           const std::vector<PredictionInstance>& instances, bool use_gnn);

void save_policy(const std::filesystem::path& path, const Td3Agent& agent);
Td3Agent load_policy(const std::filesystem::path& path);

}  // namespace trajpred::policy

#include "trajpred/policy/td3.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "trajpred/core/error.hpp"
#include "trajpred/core/json_fields.hpp"
#include "trajpred/train/checkpoint_io.hpp"

namespace trajpred::policy {

using nlohmann::json;

void validate(const Td3Config& cfg) {
  if (cfg.state_dim < 1 || cfg.action_dim < 1 || cfg.hidden < 1) throw InvalidInput("policy dims must be positive");
  if (cfg.max_action <= 0.0) throw InvalidInput("policy.max_action must be > 0");
  if (cfg.discount < 0.0 || cfg.discount > 1.0) throw InvalidInput("policy.discount must be in [0, 1]");
  if (cfg.tau <= 0.0 || cfg.tau > 1.0) throw InvalidInput("policy.tau must be in (0, 1]");
  if (cfg.policy_noise < 0.0 || cfg.noise_clip < 0.0) throw InvalidInput("policy noise must be >= 0");
  if (cfg.batch_size < 1) throw InvalidInput("policy.batch_size must be >= 1");
  if (cfg.policy_delay < 1) throw InvalidInput("policy.policy_delay must be >= 1");
  if (cfg.lr_actor <= 0.0 || cfg.lr_critic <= 0.0) throw InvalidInput("policy learning rates must be > 0");
  if (cfg.epochs < 0 || cfg.steps_per_epoch < 0) throw InvalidInput("policy epochs/steps must be >= 0");
  if (cfg.q_weight < 0.0 || cfg.bc_weight < 0.0) throw InvalidInput("policy loss weights must be >= 0");
}

json to_json(const Td3Config& cfg) {
  return {{"state_dim", cfg.state_dim},
          {"action_dim", cfg.action_dim},
          {"hidden", cfg.hidden},
          {"max_action", cfg.max_action},
          {"discount", cfg.discount},
          {"tau", cfg.tau},
          {"policy_noise", cfg.policy_noise},
          {"noise_clip", cfg.noise_clip},
          {"batch_size", cfg.batch_size},
          {"policy_delay", cfg.policy_delay},
          {"lr_actor", cfg.lr_actor},
          {"lr_critic", cfg.lr_critic},
          {"epochs", cfg.epochs},
          {"steps_per_epoch", cfg.steps_per_epoch},
          {"q_weight", cfg.q_weight},
          {"bc_weight", cfg.bc_weight},
          {"relabel_each_epoch", cfg.relabel_each_epoch},
          {"seed", cfg.seed}};
}

Td3Config td3_config_from_json(const json& j) {
  Td3Config cfg;
  JsonFields f(j, "policy");
  f.get("state_dim", cfg.state_dim);
  f.get("action_dim", cfg.action_dim);
  f.get("hidden", cfg.hidden);
  f.get("max_action", cfg.max_action);
  f.get("discount", cfg.discount);
  f.get("tau", cfg.tau);
  f.get("policy_noise", cfg.policy_noise);
  f.get("noise_clip", cfg.noise_clip);
  f.get("batch_size", cfg.batch_size);
  f.get("policy_delay", cfg.policy_delay);
  f.get("lr_actor", cfg.lr_actor);
  f.get("lr_critic", cfg.lr_critic);
  f.get("epochs", cfg.epochs);
  f.get("steps_per_epoch", cfg.steps_per_epoch);
  f.get("q_weight", cfg.q_weight);
  f.get("bc_weight", cfg.bc_weight);
  f.get("relabel_each_epoch", cfg.relabel_each_epoch);
  f.get("seed", cfg.seed);
  f.finish();
  validate(cfg);
  return cfg;
}

namespace {

nn::Mlp copy_as(const nn::Mlp& src, const std::string& from, const std::string& to) {
  nn::Mlp out = src;
  for (auto& l : out.layers) {
    for (auto* p : {&l.weight, &l.bias}) p->name.replace(0, from.size(), to);
  }
  return out;
}

void soft_update(nn::Mlp& target, const nn::Mlp& source, double tau) {
  for (std::size_t i = 0; i < target.layers.size(); ++i) {
    auto& t = target.layers[i];
    const auto& s = source.layers[i];
    t.weight.value = tau * s.weight.value + (1.0 - tau) * t.weight.value;
    t.bias.value = tau * s.bias.value + (1.0 - tau) * t.bias.value;
  }
}

Matrix bounded(const Matrix& pre, double max_action) { return max_action * pre.array().tanh().matrix(); }

Matrix critic_input(const Matrix& s, const Matrix& a, double max_action) {
  Matrix in(s.rows() + a.rows(), s.cols());
  in << s, a / max_action;
  return in;
}

Matrix gather(const Matrix& m, const std::vector<Eigen::Index>& idx) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(idx[k]);
  return out;
}

Eigen::RowVectorXd gather(const Eigen::RowVectorXd& m, const std::vector<Eigen::Index>& idx) {
  Eigen::RowVectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Eigen::Index>(k)) = m(idx[k]);
  return out;
}

}  // namespace

Td3Agent::Td3Agent(const Td3Config& cfg) : config(cfg) {
  validate(cfg);
  nn::Rng rng(cfg.seed);
  const int h = cfg.hidden;
  actor = nn::Mlp("actor", {cfg.state_dim, h, h, cfg.action_dim}, nn::Activation::relu, rng);
  critic1 = nn::Mlp("critic1", {cfg.state_dim + cfg.action_dim, h, h, 1}, nn::Activation::relu, rng);
  critic2 = nn::Mlp("critic2", {cfg.state_dim + cfg.action_dim, h, h, 1}, nn::Activation::relu, rng);
  actor_target = copy_as(actor, "actor", "actor_target");
  critic1_target = copy_as(critic1, "critic1", "critic1_target");
  critic2_target = copy_as(critic2, "critic2", "critic2_target");
}

Matrix Td3Agent::act(const Matrix& states) const { return bounded(actor.evaluate(states), config.max_action); }

nn::ParamRefs Td3Agent::parameters() {
  nn::ParamRefs out;
  for (auto* m : {&actor, &critic1, &critic2, &actor_target, &critic1_target, &critic2_target}) m->collect(out);
  return out;
}

nn::ConstParamRefs Td3Agent::parameters() const {
  nn::ConstParamRefs out;
  for (const auto* m : {&actor, &critic1, &critic2, &actor_target, &critic1_target, &critic2_target}) m->collect(out);
  return out;
}

double label_reward(const AgentState& s, const Action& a, const irl::RewardNet& reward, const Td3Agent& agent) {
  const double r = reward.evaluate(irl::pair_features(s, a))(0, 0);
  const Eigen::Vector2d pi = agent.act(model::kinematic_features(s)).col(0);
  return r - (Eigen::Vector2d(a.dx, a.dy) - pi).squaredNorm();
}

ReplayBuffer build_replay(const std::vector<Trajectory>& demos, const irl::RewardNet& reward, const Td3Agent& agent) {
  if (agent.config.state_dim != model::kKinematicDim || agent.config.action_dim != model::kActionDim) {
    throw InvalidInput("trajectory replay needs a kinematic-state, 2-D action agent");
  }
  Eigen::Index n = 0;
  for (const auto& t : demos) n += std::max<Eigen::Index>(0, static_cast<Eigen::Index>(t.size()) - 1);
  if (n == 0) throw InvalidInput("no transitions in the demonstrations");

  ReplayBuffer b;
  b.states.resize(model::kKinematicDim, n);
  b.actions.resize(model::kActionDim, n);
  b.next_states.resize(model::kKinematicDim, n);
  b.done = Eigen::RowVectorXd::Zero(n);
  Matrix feats(irl::kRewardInputDim, n);
  Eigen::Index c = 0;
  for (const auto& t : demos) {
    for (std::size_t k = 0; k + 1 < t.size(); ++k, ++c) {
      const auto& s = t.states[k];
      const auto& s2 = t.states[k + 1];
      const Action a{s2.x - s.x, s2.y - s.y};
      b.states.col(c) = model::kinematic_features(s);
      b.next_states.col(c) = model::kinematic_features(s2);
      b.actions.col(c) << a.dx, a.dy;
      feats.col(c) = irl::pair_features(s, a);
      if (k + 2 == t.size()) b.done(c) = 1.0;
    }
  }
  b.base_rewards = reward.evaluate(feats).row(0);
  relabel_penalty(b, agent);
  return b;
}

void relabel_penalty(ReplayBuffer& buffer, const Td3Agent& agent) {
  const Matrix pi = agent.act(buffer.states);
  buffer.rewards = buffer.base_rewards - (buffer.actions - pi).colwise().squaredNorm();
}

Td3Stats td3_train(Td3Agent& agent, ReplayBuffer& buffer, const Relabel& relabel,
                   const std::function<void(int, const Td3Stats&)>& on_epoch) {
  const Td3Config& cfg = agent.config;
  validate(cfg);
  const Eigen::Index n = buffer.size();
  if (n < cfg.batch_size) {
    throw InvalidInput(fmt::format("replay buffer holds {} transitions, fewer than a batch of {}", n, cfg.batch_size));
  }
  const double amax = cfg.max_action;
  const int steps = cfg.steps_per_epoch > 0 ? cfg.steps_per_epoch
                                            : static_cast<int>((n + cfg.batch_size - 1) / cfg.batch_size);

  nn::ParamRefs critic_params;
  agent.critic1.collect(critic_params);
  agent.critic2.collect(critic_params);
  nn::ParamRefs actor_params;
  agent.actor.collect(actor_params);
  nn::Adam opt_critic(critic_params, {cfg.lr_critic, 0.9, 0.999, 1e-8, 0.0});
  nn::Adam opt_actor(actor_params, {cfg.lr_actor, 0.9, 0.999, 1e-8, 0.0});

  std::mt19937_64 rng(cfg.seed ^ 0x5DEECE66DULL);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(cfg.batch_size));

  Td3Stats stats;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (relabel && cfg.relabel_each_epoch) relabel(buffer, agent);
    double critic_sum = 0.0, actor_sum = 0.0;
    int actor_count = 0;
    for (int step = 0; step < steps; ++step) {
      for (auto& i : idx) i = pick(rng);
      const Matrix s = gather(buffer.states, idx);
      const Matrix a = gather(buffer.actions, idx);
      const Matrix s2 = gather(buffer.next_states, idx);
      const Eigen::RowVectorXd r = gather(buffer.rewards, idx);
      const Eigen::RowVectorXd d = gather(buffer.done, idx);

      Matrix a2 = bounded(agent.actor_target.evaluate(s2), amax);
      if (cfg.policy_noise > 0.0) {
        const double clip = cfg.noise_clip * amax;
        for (Eigen::Index k = 0; k < a2.size(); ++k) {
          const double eps = std::clamp(cfg.policy_noise * amax * gauss(rng), -clip, clip);
          a2(k) = std::clamp(a2(k) + eps, -amax, amax);
        }
      }
      const Matrix in2 = critic_input(s2, a2, amax);
      const Eigen::RowVectorXd q_next =
          agent.critic1_target.evaluate(in2).row(0).cwiseMin(agent.critic2_target.evaluate(in2).row(0));
      const Eigen::RowVectorXd y = r + cfg.discount * (1.0 - d.array()).matrix().cwiseProduct(q_next);

      nn::Tape ct;
      nn::Var in = ct.constant(critic_input(s, a, amax));
      nn::Var target = ct.constant(y);
      nn::Var q1 = agent.critic1.forward(ct, in);
      nn::Var q2 = agent.critic2.forward(ct, in);
      nn::Var critic_loss = ad::mean(ad::square(q1 - target)) + ad::mean(ad::square(q2 - target));
      if (!std::isfinite(critic_loss.scalar())) {
        throw TrainingFailure(fmt::format("non-finite critic loss at epoch {}, step {}", epoch, step + 1));
      }
      ct.backward(critic_loss);
      opt_critic.step(ct);
      critic_sum += critic_loss.scalar();
      ++stats.critic_updates;

      if (stats.critic_updates % cfg.policy_delay == 0) {
        nn::Tape at;
        nn::Var sv = at.constant(s);
        nn::Var pi = amax * ad::tanh(agent.actor.forward(at, sv));
        nn::Var q = agent.critic1.forward(at, ad::concat_rows({sv, (1.0 / amax) * pi}), false);
        const double lambda = cfg.q_weight / std::max(q.value().cwiseAbs().mean(), 1e-8);
        nn::Var loss = -lambda * ad::mean(q);
        if (cfg.bc_weight > 0.0) {
          nn::Var bc = ad::scale(ad::sum(ad::square(pi - at.constant(a))), 1.0 / static_cast<double>(s.cols()));
          loss = loss + cfg.bc_weight * bc;
        }
        if (!std::isfinite(loss.scalar())) {
          throw TrainingFailure(fmt::format("non-finite actor loss at epoch {}, step {}", epoch, step + 1));
        }
        at.backward(loss);
        opt_actor.step(at);
        actor_sum += loss.scalar();
        ++actor_count;
        ++stats.actor_updates;

        soft_update(agent.actor_target, agent.actor, cfg.tau);
        soft_update(agent.critic1_target, agent.critic1, cfg.tau);
        soft_update(agent.critic2_target, agent.critic2, cfg.tau);
      }
    }
    stats.epoch_critic_loss.push_back(critic_sum / steps);
    stats.epoch_actor_loss.push_back(actor_count > 0 ? actor_sum / actor_count : 0.0);
    if (on_epoch) on_epoch(epoch, stats);
  }
  return stats;
}

std::vector<Vec2> cumulative_coordinates(Vec2 last, const std::vector<Action>& actions) {
  std::vector<Vec2> out;
  out.reserve(actions.size());
  Vec2 delta;
  for (const auto& a : actions) {
    delta.x += a.dx;
    delta.y += a.dy;
    out.push_back({last.x + delta.x, last.y + delta.y});
  }
  return out;
}

std::vector<std::vector<Vec2>> ood_predict(const model::TrajectoryPredictor& predictor, const Td3Agent& agent,
                                           const std::vector<PredictionInstance>& instances, bool use_gnn) {
  if (agent.config.state_dim != model::kKinematicDim || agent.config.action_dim != model::kActionDim) {
    throw InvalidInput("ood prediction needs a kinematic-state, 2-D action agent");
  }
  const auto states = model::predict_states(predictor, instances, use_gnn);
  Eigen::Index total = 0;
  for (const auto& s : states) total += static_cast<Eigen::Index>(s.size());
  Matrix feats(model::kKinematicDim, total);
  Eigen::Index c = 0;
  for (const auto& traj : states) {
    for (const auto& s : traj) feats.col(c++) = model::kinematic_features(s);
  }
  const Matrix acts = agent.act(feats);

  std::vector<std::vector<Vec2>> out;
  out.reserve(instances.size());
  c = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& hist = instances[i].target_history.states.back();
    const Vec2 last = instances[i].local_frame ? Vec2{hist.x, hist.y}
                                               : Vec2{hist.x - instances[i].origin.x, hist.y - instances[i].origin.y};
    std::vector<Action> actions;
    actions.reserve(states[i].size());
    for (std::size_t t = 0; t < states[i].size(); ++t, ++c) actions.push_back({acts(0, c), acts(1, c)});
    out.push_back(cumulative_coordinates(last, actions));
  }
  return out;
}

void save_policy(const std::filesystem::path& path, const Td3Agent& agent) {
  json header = {{"kind", "policy"}, {"config", to_json(agent.config)}};
  train::save_param_file(path, std::move(header), agent.parameters());
}

Td3Agent load_policy(const std::filesystem::path& path) {
  train::ParamFile file = train::load_param_file(path);
  if (file.header.value("kind", "") != "policy") throw CheckpointError(path.string() + ": not a policy checkpoint");
  Td3Config cfg;
  try {
    cfg = td3_config_from_json(file.header.at("config"));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path.string() + ": bad header: " + e.what());
  } catch (const InvalidInput& e) {
    throw CheckpointError(path.string() + ": bad config echo: " + e.what());
  }
  Td3Agent agent(cfg);
  train::assign_params(file, agent.parameters());
  return agent;
}

}  // namespace trajpred::policy

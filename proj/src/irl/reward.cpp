#include "trajpred/irl/reward.hpp"

#include <cmath>
#include <string>

#include "trajpred/core/error.hpp"
#include "trajpred/model/features.hpp"

namespace trajpred::irl {

RewardNet::RewardNet(const RewardConfig& cfg, std::uint64_t seed) : config(cfg) {
  nn::Rng rng(seed);
  net = nn::Mlp("reward", {cfg.input_dim, cfg.hidden, cfg.hidden, 1}, nn::Activation::tanh, rng);
}

nn::Var RewardNet::forward(nn::Tape& tape, nn::Var inputs, bool trainable) const {
  return net.forward(tape, inputs, trainable);
}

Matrix RewardNet::evaluate(const Matrix& inputs) const { return net.evaluate(inputs); }

nn::ParamRefs RewardNet::parameters() {
  nn::ParamRefs out;
  net.collect(out);
  return out;
}

nn::ConstParamRefs RewardNet::parameters() const {
  nn::ConstParamRefs out;
  net.collect(out);
  return out;
}

Eigen::VectorXd pair_features(const AgentState& s, const Action& a) {
  Eigen::VectorXd v(kRewardInputDim);
  v << model::kinematic_features(s), model::action_features(a);
  return v;
}

PairSet demonstration_pairs(const std::vector<Trajectory>& trajs) {
  Eigen::Index total = 0;
  for (const auto& t : trajs) {
    if (t.size() < 2) throw InvalidInput("demonstration trajectory shorter than 2 states");
    total += static_cast<Eigen::Index>(t.size() - 1);
  }
  PairSet out;
  out.features.resize(kRewardInputDim, total);
  out.trajectory.reserve(static_cast<std::size_t>(total));
  out.n_trajectories = static_cast<int>(trajs.size());
  Eigen::Index col = 0;
  for (std::size_t k = 0; k < trajs.size(); ++k) {
    const auto actions = derive_actions(trajs[k]);
    for (std::size_t t = 0; t < actions.size(); ++t) {
      out.features.col(col++) = pair_features(trajs[k].states[t], actions[t]);
      out.trajectory.push_back(static_cast<int>(k));
    }
  }
  return out;
}

double trajectory_return(const RewardNet& r, const Trajectory& traj) {
  const PairSet pairs = demonstration_pairs({traj});
  return r.evaluate(pairs.features).sum();
}

double estimate_log_z(const Eigen::RowVectorXd& rewards, double log_proposal) {
  if (rewards.size() == 0) throw InvalidInput("partition estimate needs at least one sample");
  const double m = rewards.maxCoeff();
  const double lse = m + std::log((rewards.array() - m).exp().sum());
  return lse - std::log(static_cast<double>(rewards.size())) - log_proposal;
}

nn::Var estimate_log_z(nn::Var rewards, double log_proposal) {
  if (rewards.value().size() == 0) throw InvalidInput("partition estimate needs at least one sample");
  return ad::add_scalar(ad::logsumexp(rewards),
                        -std::log(static_cast<double>(rewards.value().size())) - log_proposal);
}

Matrix ZSampler::draw(const PairSet& pool, std::mt19937_64& rng) const {
  if (samples < 1) throw InvalidInput("partition estimate needs at least one sample");
  if (pool.size() == 0) throw InvalidInput("empty demonstration pool");
  std::uniform_int_distribution<Eigen::Index> pick(0, pool.size() - 1);
  std::uniform_real_distribution<double> act(-max_displacement, max_displacement);
  Matrix out(pool.features.rows(), samples);
  for (int j = 0; j < samples; ++j) {
    out.col(j) = pool.features.col(pick(rng));
    if (mode == ZSampling::uniform_action) {
      const double dx = act(rng);
      const double dy = act(rng);
      out.bottomRows(model::kActionDim).col(j) = model::action_features({dx, dy});
    }
  }
  return out;
}

double ZSampler::log_proposal(const PairSet& pool) { return -std::log(static_cast<double>(pool.size())); }

RfLoss loss_rf(nn::Tape& tape, const RewardNet& r, const PairSet& demos, const Matrix& samples, double log_proposal,
               bool trainable) {
  if (demos.size() == 0 || demos.n_trajectories == 0) throw InvalidInput("empty demonstration batch");
  nn::Var demo_r = r.forward(tape, tape.constant(demos.features), trainable);
  nn::Var sample_r = r.forward(tape, tape.constant(samples), trainable);
  nn::Var log_z = estimate_log_z(sample_r, log_proposal);
  const double k = demos.n_trajectories;
  const double pairs_per_traj = static_cast<double>(demos.size()) / k;
  // -mean_k(ret_k - n_k log Z) = -(sum R)/K + (P/K) log Z
  nn::Var data_term = ad::scale(ad::sum(demo_r), -1.0 / k) + ad::scale(log_z, pairs_per_traj);
  nn::Var reg = tape.constant(Matrix::Zero(1, 1));
  for (const auto* p : r.parameters()) reg = reg + ad::sum(ad::square(tape.param(*p, trainable)));
  RfLoss out;
  out.loss = data_term + ad::scale(reg, r.config.l2);
  out.log_z = log_z.scalar();
  out.mean_return = demo_r.value().sum() / k;
  return out;
}

ZSampling parse_z_sampling(std::string_view name) {
  if (name == "demo_pairs") return ZSampling::demo_pairs;
  if (name == "uniform_action") return ZSampling::uniform_action;
  throw InvalidInput("unknown partition sampling mode '" + std::string(name) + "'");
}

std::string_view to_string(ZSampling s) { return s == ZSampling::demo_pairs ? "demo_pairs" : "uniform_action"; }

}  // namespace trajpred::irl

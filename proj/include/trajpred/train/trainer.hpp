#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "trajpred/eval/metrics.hpp"
#include "trajpred/irl/reward.hpp"
#include "trajpred/model/predictor.hpp"

namespace trajpred::train {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 128;
  double lr_predictor = 1e-3;
  double lr_reward = 1e-4;
  double clip_norm = 1.0;
  /// Cosine decay of both learning rates to lr * lr_floor over the run (off: constant).
  bool cosine_decay = false;
  double lr_floor = 0.01;
  /// Weight of an auxiliary squared error on predicted velocity/acceleration
  /// (scaled features); 0 leaves L_TPM as the coordinate error alone.
  double kinematic_weight = 0.0;
  /// Weight of the reward log-likelihood term inside L_TPM.
  double gamma_reward = 0.01;
  int z_samples = 1024;
  irl::ZSampling z_sampling = irl::ZSampling::uniform_action;
  std::uint64_t seed = 0;
  bool use_irl = true;
  bool use_gnn = true;
  bool teacher_forcing = false;
  /// Validation every n epochs (the last epoch is always validated).
  int val_every = 1;
  model::PredictorConfig model;
  irl::RewardConfig reward;
};

/// Throws InvalidInput for values outside their domain.
void validate(const TrainConfig& cfg);

nlohmann::json to_json(const TrainConfig& cfg);
/// Starts from defaults and applies `j`; unknown keys raise InvalidInput.
TrainConfig train_config_from_json(const nlohmann::json& j);

struct TpmLoss {
  nn::Var loss;
  double mse = 0.0;
  double reward_term = 0.0;  // mean[return(pred) - n log Z] before weighting
};

/// L_TPM = mean_b (1/horizon) sum_t ||x_t - xhat_t||^2
///         - gamma * mean_b[ sum_t R(shat_t, ahat_t) - horizon * log Z ]
/// The reward network enters as constants. The reward term is skipped when
/// gamma == 0 or `samples` is null. Throws InvalidInput when the rollout and
/// the batch disagree on the horizon.
TpmLoss loss_tpm(nn::Tape& tape, const model::Rollout& rollout, const model::ModelBatch& batch,
                 const irl::RewardNet& reward, double gamma, const nn::Matrix* samples, double log_proposal);
TpmLoss loss_tpm(nn::Tape& tape, const model::TrajectoryPredictor& predictor, const model::ModelBatch& batch,
                 const irl::RewardNet& reward, const TrainConfig& cfg, const nn::Matrix* samples,
                 double log_proposal);

/// Target history followed by its future, as one trajectory.
Trajectory full_target_trajectory(const PredictionInstance& inst);

struct EpochLog {
  int epoch = 0;
  double loss_tpm = 0.0;
  double loss_rf = 0.0;
  double val_ade = 0.0;
  double val_fde = 0.0;
};

struct Checkpoint {
  TrainConfig config;
  model::TrajectoryPredictor predictor;
  irl::RewardNet reward;
  int epoch = 0;
  std::map<std::string, double> metrics;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> log;
};

/// Joint training: per batch one predictor step on L_TPM, then (with IRL) one
/// reward step on L_RF. Deterministic for a fixed seed. Non-finite losses or
/// rollouts raise TrainingFailure naming epoch and step.
TrainResult train(const std::vector<PredictionInstance>& train_set, const std::vector<PredictionInstance>& val_set,
                  const TrainConfig& cfg, const std::function<void(const EpochLog&)>& on_epoch = {});

/// Metrics of the predictor on instances (positions compared in the global frame).
eval::MetricReport evaluate(const model::TrajectoryPredictor& predictor, const std::vector<PredictionInstance>& set,
                            bool use_gnn, const eval::MetricOptions& opts = {});

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void write_log_csv(const std::filesystem::path& path, const std::vector<EpochLog>& log);

struct AblationRow {
  std::string index;  // H1..H4
  bool use_irl = false;
  bool use_gnn = false;
  eval::MetricReport metrics;
};

/// H1 (irl+gnn), H2 (irl), H3 (gnn), H4 (neither), each trained from the same
/// seed and evaluated on `eval_set`.
std::vector<AblationRow> ablation_grid(const std::vector<PredictionInstance>& train_set,
                                       const std::vector<PredictionInstance>& eval_set, const TrainConfig& cfg,
                                       const eval::MetricOptions& opts = {});

/// Columns: dataset,index,mamba,maxentirl,gnn,ADE,FDE,MR,APDE,CR.
void write_ablation_csv(const std::filesystem::path& path, const std::string& dataset,
                        const std::vector<AblationRow>& rows);

}  // namespace trajpred::train

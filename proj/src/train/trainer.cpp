#include "trajpred/train/trainer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include "trajpred/core/error.hpp"
#include "trajpred/core/json_fields.hpp"
#include "trajpred/model/features.hpp"
#include "trajpred/train/checkpoint_io.hpp"

namespace trajpred::train {

using nlohmann::json;

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw InvalidInput("train.epochs must be >= 0");
  if (cfg.batch_size < 1) throw InvalidInput("train.batch_size must be >= 1");
  if (cfg.kinematic_weight < 0.0) throw InvalidInput("train.kinematic_weight must be >= 0");
  if (cfg.gamma_reward < 0.0) throw InvalidInput("train.gamma_reward must be >= 0");
  if (cfg.lr_predictor <= 0.0 || cfg.lr_reward <= 0.0) throw InvalidInput("learning rates must be > 0");
  if (cfg.z_samples < 1) throw InvalidInput("train.z_samples must be >= 1");
  if (cfg.lr_floor < 0.0 || cfg.lr_floor > 1.0) throw InvalidInput("train.lr_floor must be in [0, 1]");
  if (cfg.val_every < 1) throw InvalidInput("train.val_every must be >= 1");
  if (cfg.reward.l2 < 0.0) throw InvalidInput("reward.l2 must be >= 0");
  if (cfg.model.encoder.hidden < 1 || cfg.model.encoder.attention_dim < 1) {
    throw InvalidInput("encoder dims must be positive");
  }
  if (cfg.model.decoder.channels < 1 || cfg.model.decoder.state_size < 1) {
    throw InvalidInput("decoder dims must be positive");
  }
  if (cfg.model.radius <= 0.0) throw InvalidInput("model.radius must be > 0");
}

json to_json(const TrainConfig& cfg) {
  return {
      {"epochs", cfg.epochs},
      {"batch_size", cfg.batch_size},
      {"lr_predictor", cfg.lr_predictor},
      {"lr_reward", cfg.lr_reward},
      {"clip_norm", cfg.clip_norm},
      {"cosine_decay", cfg.cosine_decay},
      {"lr_floor", cfg.lr_floor},
      {"gamma_reward", cfg.gamma_reward},
      {"kinematic_weight", cfg.kinematic_weight},
      {"z_samples", cfg.z_samples},
      {"z_sampling", std::string(irl::to_string(cfg.z_sampling))},
      {"seed", cfg.seed},
      {"use_irl", cfg.use_irl},
      {"use_gnn", cfg.use_gnn},
      {"teacher_forcing", cfg.teacher_forcing},
      {"val_every", cfg.val_every},
      {"model",
       {{"hidden", cfg.model.encoder.hidden},
        {"attention_dim", cfg.model.encoder.attention_dim},
        {"channels", cfg.model.decoder.channels},
        {"state_size", cfg.model.decoder.state_size},
        {"selective", cfg.model.decoder.selective},
        {"residual", cfg.model.decoder.residual},
        {"kinematic_prior", cfg.model.decoder.kinematic_prior},
        {"latent_every_step", cfg.model.decoder.latent_every_step},
        {"gated", cfg.model.decoder.gated},
        {"radius", cfg.model.radius}}},
      {"reward", {{"hidden", cfg.reward.hidden}, {"l2", cfg.reward.l2}}},
  };
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  JsonFields f(j, "train");
  f.get("epochs", cfg.epochs);
  f.get("batch_size", cfg.batch_size);
  f.get("lr_predictor", cfg.lr_predictor);
  f.get("lr_reward", cfg.lr_reward);
  f.get("clip_norm", cfg.clip_norm);
  f.get("cosine_decay", cfg.cosine_decay);
  f.get("lr_floor", cfg.lr_floor);
  f.get("gamma_reward", cfg.gamma_reward);
  f.get("kinematic_weight", cfg.kinematic_weight);
  f.get("z_samples", cfg.z_samples);
  std::string mode(irl::to_string(cfg.z_sampling));
  f.get("z_sampling", mode);
  cfg.z_sampling = irl::parse_z_sampling(mode);
  f.get("seed", cfg.seed);
  f.get("use_irl", cfg.use_irl);
  f.get("use_gnn", cfg.use_gnn);
  f.get("teacher_forcing", cfg.teacher_forcing);
  f.get("val_every", cfg.val_every);
  if (const auto* m = f.child("model")) {
    JsonFields g(*m, "train.model");
    g.get("hidden", cfg.model.encoder.hidden);
    g.get("attention_dim", cfg.model.encoder.attention_dim);
    g.get("channels", cfg.model.decoder.channels);
    g.get("state_size", cfg.model.decoder.state_size);
    g.get("selective", cfg.model.decoder.selective);
    g.get("residual", cfg.model.decoder.residual);
    g.get("kinematic_prior", cfg.model.decoder.kinematic_prior);
    g.get("latent_every_step", cfg.model.decoder.latent_every_step);
    g.get("gated", cfg.model.decoder.gated);
    g.get("radius", cfg.model.radius);
    g.finish();
  }
  if (const auto* r = f.child("reward")) {
    JsonFields g(*r, "train.reward");
    g.get("hidden", cfg.reward.hidden);
    g.get("l2", cfg.reward.l2);
    g.finish();
  }
  f.finish();
  validate(cfg);
  return cfg;
}

TpmLoss loss_tpm(nn::Tape& tape, const model::Rollout& rollout, const model::ModelBatch& batch,
                 const irl::RewardNet& reward, double gamma, const nn::Matrix* samples, double log_proposal) {
  const auto horizon = rollout.xy.size();
  if (horizon == 0 || horizon != batch.future_xy.size()) {
    throw InvalidInput("prediction horizon does not match the ground truth");
  }
  const double b = batch.batch_size;
  nn::Var sq = tape.constant(nn::Matrix::Zero(1, 1));
  for (std::size_t t = 0; t < horizon; ++t) {
    sq = sq + ad::sum(ad::square(rollout.xy[t] - tape.constant(batch.future_xy[t])));
  }
  TpmLoss out;
  nn::Var mse = ad::scale(sq, 1.0 / (b * static_cast<double>(horizon)));
  out.mse = mse.scalar();
  out.loss = mse;
  if (gamma == 0.0 || samples == nullptr) return out;

  const double log_z = irl::estimate_log_z(reward.evaluate(*samples).row(0), log_proposal);
  // Pairs (shat_k, xhat_{k+1} - xhat_k) for k = L .. T-1, with shat_L = s_L.
  std::vector<nn::Var> cols;
  cols.reserve(horizon);
  nn::Var prev_state = tape.constant(batch.last_state);
  nn::Var prev_xy = model::kPosScale * ad::slice_rows(prev_state, 0, 2);
  for (std::size_t t = 0; t < horizon; ++t) {
    nn::Var kin = ad::slice_rows(prev_state, 2, model::kKinematicDim);
    nn::Var act = (1.0 / model::kActionScale) * (rollout.xy[t] - prev_xy);
    cols.push_back(ad::concat_rows({kin, act}));
    prev_state = rollout.states[t];
    prev_xy = rollout.xy[t];
  }
  nn::Var r = reward.forward(tape, ad::concat_cols(cols), false);
  nn::Var term = ad::add_scalar(ad::scale(ad::sum(r), 1.0 / b), -static_cast<double>(horizon) * log_z);
  out.reward_term = term.scalar();
  out.loss = mse - gamma * term;
  return out;
}

TpmLoss loss_tpm(nn::Tape& tape, const model::TrajectoryPredictor& predictor, const model::ModelBatch& batch,
                 const irl::RewardNet& reward, const TrainConfig& cfg, const nn::Matrix* samples,
                 double log_proposal) {
  const auto rollout = predictor.forward(tape, batch, cfg.use_gnn, cfg.teacher_forcing);
  const double gamma = cfg.use_irl ? cfg.gamma_reward : 0.0;
  TpmLoss out = loss_tpm(tape, rollout, batch, reward, gamma, samples, log_proposal);
  if (cfg.kinematic_weight > 0.0) {
    nn::Var sq = tape.constant(nn::Matrix::Zero(1, 1));
    for (std::size_t t = 0; t < rollout.states.size(); ++t) {
      nn::Var pred = ad::slice_rows(rollout.states[t], 2, model::kKinematicDim);
      nn::Var truth = tape.constant(batch.future_states[t].middleRows(2, model::kKinematicDim));
      sq = sq + ad::sum(ad::square(pred - truth));
    }
    const double n = static_cast<double>(batch.batch_size) * static_cast<double>(rollout.states.size());
    out.loss = out.loss + ad::scale(sq, cfg.kinematic_weight / n);
  }
  return out;
}

Trajectory full_target_trajectory(const PredictionInstance& inst) {
  Trajectory t = inst.target_history;
  t.states.insert(t.states.end(), inst.target_future.states.begin(), inst.target_future.states.end());
  return t;
}

eval::MetricReport evaluate(const model::TrajectoryPredictor& predictor, const std::vector<PredictionInstance>& set,
                            bool use_gnn, const eval::MetricOptions& opts) {
  const auto preds = model::predict_positions(predictor, set, use_gnn);
  return eval::compute_metrics(eval::metric_inputs(set, preds), opts);
}

TrainResult train(const std::vector<PredictionInstance>& train_set, const std::vector<PredictionInstance>& val_set,
                  const TrainConfig& cfg, const std::function<void(const EpochLog&)>& on_epoch) {
  validate(cfg);
  if (train_set.empty()) throw InvalidInput("training split is empty");

  TrainResult result;
  Checkpoint& ck = result.checkpoint;
  ck.config = cfg;
  ck.predictor = model::TrajectoryPredictor(cfg.model, cfg.seed);
  ck.reward = irl::RewardNet(cfg.reward, cfg.seed + 0x9E3779B97F4A7C15ULL);

  nn::Adam opt_pred(ck.predictor.parameters(), {cfg.lr_predictor, 0.9, 0.999, 1e-8, cfg.clip_norm});
  nn::Adam opt_reward(ck.reward.parameters(), {cfg.lr_reward, 0.9, 0.999, 1e-8, cfg.clip_norm});

  std::vector<Trajectory> demos;
  demos.reserve(train_set.size());
  for (const auto& inst : train_set) demos.push_back(full_target_trajectory(inst));
  const irl::PairSet pool = cfg.use_irl ? irl::demonstration_pairs(demos) : irl::PairSet{};
  const irl::ZSampler sampler{cfg.z_sampling, cfg.z_samples, model::kMaxDisplacement};
  const double log_q = cfg.use_irl ? irl::ZSampler::log_proposal(pool) : 0.0;

  std::map<int, std::vector<std::size_t>> by_horizon;
  for (std::size_t i = 0; i < train_set.size(); ++i) by_horizon[train_set[i].horizon()].push_back(i);

  std::mt19937_64 rng(cfg.seed);
  const model::BatchOptions bopts{cfg.model.radius, cfg.use_gnn};
  int step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<std::vector<std::size_t>> batches;
    for (auto& [h, idx] : by_horizon) {
      std::shuffle(idx.begin(), idx.end(), rng);
      for (std::size_t s = 0; s < idx.size(); s += static_cast<std::size_t>(cfg.batch_size)) {
        const auto e = std::min(idx.size(), s + static_cast<std::size_t>(cfg.batch_size));
        batches.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(s), idx.begin() + static_cast<std::ptrdiff_t>(e));
      }
    }
    std::shuffle(batches.begin(), batches.end(), rng);
    if (cfg.cosine_decay) {
      const double progress = cfg.epochs > 1 ? static_cast<double>(epoch - 1) / (cfg.epochs - 1) : 1.0;
      const double f = cfg.lr_floor + (1.0 - cfg.lr_floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
      opt_pred.set_lr(cfg.lr_predictor * f);
      opt_reward.set_lr(cfg.lr_reward * f);
    }

    double sum_tpm = 0.0, sum_rf = 0.0;
    for (const auto& members : batches) {
      ++step;
      std::vector<const PredictionInstance*> ptrs;
      for (auto i : members) ptrs.push_back(&train_set[i]);
      const model::ModelBatch mb = model::make_batch(ptrs, bopts);

      nn::Matrix samples;
      if (cfg.use_irl) samples = sampler.draw(pool, rng);

      try {
        nn::Tape tape;
        TpmLoss tl = loss_tpm(tape, ck.predictor, mb, ck.reward, cfg, cfg.use_irl ? &samples : nullptr, log_q);
        if (!std::isfinite(tl.loss.scalar())) throw TrainingFailure("non-finite L_TPM");
        tape.backward(tl.loss);
        opt_pred.step(tape);
        sum_tpm += tl.loss.scalar();

        if (cfg.use_irl) {
          std::vector<Trajectory> batch_demos;
          for (auto i : members) batch_demos.push_back(demos[i]);
          const irl::PairSet demo_pairs = irl::demonstration_pairs(batch_demos);
          nn::Tape rtape;
          irl::RfLoss rl = irl::loss_rf(rtape, ck.reward, demo_pairs, samples, log_q);
          if (!std::isfinite(rl.loss.scalar())) throw TrainingFailure("non-finite L_RF");
          rtape.backward(rl.loss);
          opt_reward.step(rtape);
          sum_rf += rl.loss.scalar();
        }
      } catch (const TrainingFailure& e) {
        throw TrainingFailure(fmt::format("{} at epoch {}, step {}", e.what(), epoch, step));
      } catch (const NumericalDivergence& e) {
        throw TrainingFailure(fmt::format("{} at epoch {}, step {}", e.what(), epoch, step));
      }
    }

    EpochLog row;
    row.epoch = epoch;
    row.loss_tpm = sum_tpm / static_cast<double>(batches.size());
    row.loss_rf = cfg.use_irl ? sum_rf / static_cast<double>(batches.size()) : 0.0;
    row.val_ade = std::nan("");
    row.val_fde = std::nan("");
    if (!val_set.empty() && (epoch % cfg.val_every == 0 || epoch == cfg.epochs)) {
      const auto m = evaluate(ck.predictor, val_set, cfg.use_gnn);
      row.val_ade = m.ade;
      row.val_fde = m.fde;
    }
    result.log.push_back(row);
    if (on_epoch) on_epoch(row);
  }

  ck.epoch = cfg.epochs;
  if (!result.log.empty()) {
    const auto& last = result.log.back();
    ck.metrics["train_loss_tpm"] = last.loss_tpm;
    ck.metrics["train_loss_rf"] = last.loss_rf;
    if (!val_set.empty()) {
      ck.metrics["val_ade"] = last.val_ade;
      ck.metrics["val_fde"] = last.val_fde;
    }
  }
  return result;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  json header = {{"kind", "tpm"}, {"config", to_json(ckpt.config)}, {"epoch", ckpt.epoch}, {"metrics", ckpt.metrics}};
  nn::ConstParamRefs params = ckpt.predictor.parameters();
  for (const auto* p : ckpt.reward.parameters()) params.push_back(p);
  save_param_file(path, std::move(header), params);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  ParamFile file = load_param_file(path);
  if (file.header.value("kind", "") != "tpm") throw CheckpointError(path.string() + ": not a predictor checkpoint");
  Checkpoint ck;
  try {
    ck.config = train_config_from_json(file.header.at("config"));
    ck.epoch = file.header.at("epoch").get<int>();
    ck.metrics = file.header.at("metrics").get<std::map<std::string, double>>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path.string() + ": bad header: " + e.what());
  } catch (const InvalidInput& e) {
    throw CheckpointError(path.string() + ": bad config echo: " + e.what());
  }
  ck.predictor = model::TrajectoryPredictor(ck.config.model, ck.config.seed);
  ck.reward = irl::RewardNet(ck.config.reward, 0);
  nn::ParamRefs params = ck.predictor.parameters();
  for (auto* p : ck.reward.parameters()) params.push_back(p);
  assign_params(file, params);
  return ck;
}

namespace {

std::string num(double v) { return std::isnan(v) ? std::string() : fmt::format("{}", v); }

}  // namespace

void write_log_csv(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,L_TPM,L_RF,val_ADE,val_FDE\n";
  for (const auto& r : log) {
    out << fmt::format("{},{},{},{},{}\n", r.epoch, num(r.loss_tpm), num(r.loss_rf), num(r.val_ade), num(r.val_fde));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<AblationRow> ablation_grid(const std::vector<PredictionInstance>& train_set,
                                       const std::vector<PredictionInstance>& eval_set, const TrainConfig& cfg,
                                       const eval::MetricOptions& opts) {
  const std::vector<AblationRow> grid = {
      {"H1", true, true, {}}, {"H2", true, false, {}}, {"H3", false, true, {}}, {"H4", false, false, {}}};
  std::vector<AblationRow> out;
  for (auto row : grid) {
    TrainConfig c = cfg;
    c.use_irl = row.use_irl;
    c.use_gnn = row.use_gnn;
    const auto res = train(train_set, {}, c);
    row.metrics = evaluate(res.checkpoint.predictor, eval_set, c.use_gnn, opts);
    out.push_back(row);
  }
  return out;
}

void write_ablation_csv(const std::filesystem::path& path, const std::string& dataset,
                        const std::vector<AblationRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "dataset,index,mamba,maxentirl,gnn,ADE,FDE,MR,APDE,CR\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},1,{},{},{},{},{},{},{}\n", dataset, r.index, r.use_irl ? 1 : 0, r.use_gnn ? 1 : 0,
                       r.metrics.ade, r.metrics.fde, r.metrics.mr, r.metrics.apde, r.metrics.cr);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace trajpred::train

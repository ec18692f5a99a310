#include "trajpred/cli/app.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include "CLI11.hpp"
#include "trajpred/cli/run_config.hpp"
#include "trajpred/core/error.hpp"
#include "trajpred/data/synth.hpp"
#include "trajpred/eval/report.hpp"

namespace trajpred::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string run_dir;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--set", c.sets, "Override a config value, e.g. --set train.epochs=20 (repeatable)");
  sub->add_option("--run-dir", c.run_dir, "Output directory (default: <output_dir>/<command>-<timestamp>)");
}

fs::path make_run_dir(const RunConfig& cfg, const std::string& command, const std::string& requested) {
  fs::path dir = requested;
  if (dir.empty()) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    const fs::path base = fs::path(cfg.output_dir) / fmt::format("{}-{:%Y%m%d-%H%M%S}", command, fmt::localtime(now));
    dir = base;
    for (int k = 2; fs::exists(dir); ++k) dir = fs::path(base.string() + "-" + std::to_string(k));
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create run directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// Config echo plus whatever the command took from its flags.
void echo_config(const fs::path& dir, const RunConfig& cfg, const std::string& command, json args = json::object()) {
  write_json(dir / "config.json", {{"command", command}, {"args", std::move(args)}, {"config", to_json(cfg)}});
}

std::string dataset_label(const std::vector<data::DataSource>& srcs) {
  std::set<std::string> names;
  for (const auto& s : srcs) names.insert(std::string(to_string(s.scenario)));
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : "+") + n;
  return out;
}

std::vector<PredictionInstance> load_all(const std::vector<data::DataSource>& srcs, const data::WindowOptions& opts,
                                         const std::string& key) {
  if (srcs.empty()) throw InvalidInput(key + " is empty; set it in the config");
  std::vector<PredictionInstance> out;
  for (const auto& s : srcs) {
    if (!fs::is_directory(s.dir)) throw InvalidInput(key + ": data directory '" + s.dir.string() + "' does not exist");
    auto part = data::load_instances(s, opts);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  if (out.empty()) throw InvalidInput(key + ": no prediction windows in the recordings");
  return out;
}

data::Split load_split(const RunConfig& cfg) {
  return data::stratified_split(load_all(cfg.sources, cfg.window, "data.sources"), cfg.split);
}

void done(const fs::path& path) { std::cout << "wrote " << path.string() << "\n"; }

int cmd_synth(const std::string& kind, int count, int agents, std::uint64_t seed, const std::string& out_dir) {
  const Scenario s = parse_scenario(kind);
  const fs::path dir = out_dir.empty() ? fs::path(kind) : fs::path(out_dir);
  const auto paths = data::write_recordings(data::synth_scenario(s, count, agents, seed), dir);
  write_json(dir / "synth.json", {{"kind", kind}, {"count", count}, {"agents", agents}, {"seed", seed}});
  std::cout << "wrote " << paths.size() << " recordings to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_train(const Common& c, bool no_irl, bool no_gnn) {
  RunConfig cfg = load_run_config(c.config, c.sets);
  if (no_irl) cfg.train.use_irl = false;
  if (no_gnn) cfg.train.use_gnn = false;
  const data::Split split = load_split(cfg);
  if (split.train.empty()) throw InvalidInput("training split is empty");
  const fs::path dir = make_run_dir(cfg, "train", c.run_dir);
  echo_config(dir, cfg, "train");
  std::cout << fmt::format("train {} / val {} / test {} instances\n", split.train.size(), split.val.size(),
                           split.test.size());

  const auto res = train::train(split.train, split.val, cfg.train, [&](const train::EpochLog& r) {
    std::cout << fmt::format("epoch {:>4}/{}  L_TPM {:.4f}  L_RF {:.4f}", r.epoch, cfg.train.epochs, r.loss_tpm,
                             r.loss_rf);
    if (!std::isnan(r.val_ade)) std::cout << fmt::format("  val ADE {:.3f} FDE {:.3f}", r.val_ade, r.val_fde);
    std::cout << std::endl;
  });
  train::save_checkpoint(dir / "checkpoint.trjp", res.checkpoint);
  train::write_log_csv(dir / "train_log.csv", res.log);

  const std::string label = dataset_label(cfg.sources);
  std::vector<eval::ReportRow> rows;
  const auto& model = res.checkpoint.predictor;
  if (!split.val.empty()) {
    rows.push_back({"TPM", label + "/val", train::evaluate(model, split.val, cfg.train.use_gnn, cfg.metrics)});
  }
  if (!split.test.empty()) {
    rows.push_back({"TPM", label + "/test", train::evaluate(model, split.test, cfg.train.use_gnn, cfg.metrics)});
  }
  if (!rows.empty()) eval::write_report_csv(dir / "report.csv", rows);
  done(dir);
  return kExitOk;
}

int cmd_eval(const Common& c, const std::string& checkpoint, const std::string& which) {
  const RunConfig cfg = load_run_config(c.config, c.sets);
  const train::Checkpoint ck = train::load_checkpoint(checkpoint);
  std::vector<PredictionInstance> set;
  std::string label;
  if (which == "ood") {
    set = load_all(cfg.ood_sources, cfg.window, "data.ood_sources");
    label = dataset_label(cfg.ood_sources);
  } else {
    data::Split split = load_split(cfg);
    set = which == "train" ? std::move(split.train) : which == "val" ? std::move(split.val) : std::move(split.test);
    label = dataset_label(cfg.sources) + "/" + which;
  }
  if (set.empty()) throw InvalidInput("the " + which + " split is empty");
  const fs::path dir = make_run_dir(cfg, "eval", c.run_dir);
  echo_config(dir, cfg, "eval", {{"checkpoint", checkpoint}, {"split", which}});
  const auto m = train::evaluate(ck.predictor, set, ck.config.use_gnn, cfg.metrics);
  eval::write_report_csv(dir / "report.csv", {{"TPM", label, m}});
  std::cout << fmt::format("{}: ADE {:.3f} FDE {:.3f} MR {:.3f} APDE {:.3f} CR {:.3f} ({} instances)\n", label, m.ade,
                           m.fde, m.mr, m.apde, m.cr, m.n_instances);
  done(dir);
  return kExitOk;
}

int cmd_train_policy(const Common& c, const std::string& checkpoint) {
  const RunConfig cfg = load_run_config(c.config, c.sets);
  const train::Checkpoint ck = train::load_checkpoint(checkpoint);
  const data::Split split = load_split(cfg);
  const auto demos = data::demonstration_tracks(split.train);
  const fs::path dir = make_run_dir(cfg, "train-policy", c.run_dir);
  echo_config(dir, cfg, "train-policy", {{"checkpoint", checkpoint}});

  policy::Td3Agent agent(cfg.policy);
  policy::ReplayBuffer buffer = policy::build_replay(demos, ck.reward, agent);
  std::cout << fmt::format("replay buffer: {} transitions from {} tracks\n", buffer.size(), demos.size());
  const auto stats = policy::td3_train(agent, buffer, policy::relabel_penalty, [&](int epoch, const policy::Td3Stats& s) {
    std::cout << fmt::format("epoch {:>4}/{}  critic {:.5f}  actor {:.5f}", epoch, cfg.policy.epochs,
                             s.epoch_critic_loss.back(), s.epoch_actor_loss.back())
              << std::endl;
  });
  policy::save_policy(dir / "policy.trjp", agent);

  std::ofstream log(dir / "policy_log.csv", std::ios::binary);
  if (!log) throw IoError("cannot write policy log");
  log << "epoch,critic_loss,actor_loss\n";
  for (std::size_t e = 0; e < stats.epoch_critic_loss.size(); ++e) {
    log << fmt::format("{},{},{}\n", e + 1, stats.epoch_critic_loss[e], stats.epoch_actor_loss[e]);
  }
  std::cout << fmt::format("{} critic / {} actor updates\n", stats.critic_updates, stats.actor_updates);
  done(dir);
  return kExitOk;
}

int cmd_ood(const Common& c, const std::string& checkpoint, const std::string& policy_path) {
  const RunConfig cfg = load_run_config(c.config, c.sets);
  const train::Checkpoint ck = train::load_checkpoint(checkpoint);
  const policy::Td3Agent agent = policy::load_policy(policy_path);
  const auto set = load_all(cfg.ood_sources, cfg.window, "data.ood_sources");
  const fs::path dir = make_run_dir(cfg, "ood-eval", c.run_dir);
  echo_config(dir, cfg, "ood-eval", {{"checkpoint", checkpoint}, {"policy", policy_path}});

  const std::string label = dataset_label(cfg.ood_sources);
  const bool gnn = ck.config.use_gnn;
  const auto base = train::evaluate(ck.predictor, set, gnn, cfg.metrics);
  const auto coords = policy::ood_predict(ck.predictor, agent, set, gnn);
  const auto with_policy = eval::compute_metrics(eval::metric_inputs(set, coords), cfg.metrics);
  eval::write_report_csv(dir / "report.csv", {{"Baseline", label, base}, {"+Policy", label, with_policy}});
  std::cout << fmt::format("{}: Baseline ADE {:.3f} FDE {:.3f} | +Policy ADE {:.3f} FDE {:.3f}\n", label, base.ade,
                           base.fde, with_policy.ade, with_policy.fde);
  done(dir);
  return kExitOk;
}

int cmd_csa(const Common& c, const std::string& known, const std::string& unknown, std::optional<double> alpha,
            std::optional<double> beta) {
  RunConfig cfg = load_run_config(c.config, c.sets);
  if (alpha) cfg.csa_alpha = *alpha;
  if (beta) cfg.csa_beta = *beta;
  const std::vector<std::string> metrics(eval::kMetricNames.begin(), eval::kMetricNames.end());
  const auto input = eval::csa_input(eval::read_report_csv(known), eval::read_report_csv(unknown), metrics,
                                     cfg.csa_alpha, cfg.csa_beta);
  const auto rows = eval::csa_table(input);
  const fs::path dir = make_run_dir(cfg, "csa", c.run_dir);
  echo_config(dir, cfg, "csa", {{"known", known}, {"unknown", unknown}});
  eval::write_csa_csv(dir / "csa.csv", rows);
  eval::write_text(dir / "radar.svg", eval::radar_chart_svg(rows, metrics));
  for (const auto& r : rows) {
    if (r.metric == "all") std::cout << fmt::format("{:<16} CSA {:.4f}\n", r.method, r.score.csa);
  }
  done(dir);
  return kExitOk;
}

int cmd_ablate(const Common& c) {
  const RunConfig cfg = load_run_config(c.config, c.sets);
  const data::Split split = load_split(cfg);
  if (split.train.empty() || split.val.empty()) throw InvalidInput("ablation needs non-empty train and val splits");
  const fs::path dir = make_run_dir(cfg, "ablate", c.run_dir);
  echo_config(dir, cfg, "ablate");
  const auto rows = train::ablation_grid(split.train, split.val, cfg.train, cfg.metrics);
  train::write_ablation_csv(dir / "ablation.csv", dataset_label(cfg.sources), rows);
  for (const auto& r : rows) {
    std::cout << fmt::format("{} irl={} gnn={}  ADE {:.3f} FDE {:.3f}\n", r.index, r.use_irl, r.use_gnn,
                             r.metrics.ade, r.metrics.fde);
  }
  done(dir);
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Trajectory prediction toolkit: selective-SSM predictor with MaxEnt IRL reward and TD3 policy"};
  app.require_subcommand(1);

  std::string synth_kind, synth_out;
  int synth_count = 1, synth_agents = 8;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "Generate synthetic recordings");
  synth->add_option("kind", synth_kind, "intersection | roundabout | highway")->required();
  synth->add_option("count", synth_count, "Number of recordings")->required()->check(CLI::PositiveNumber);
  synth->add_option("--agents", synth_agents, "Agents per recording")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("-o,--out", synth_out, "Output directory (default: ./<kind>)");

  Common common;
  bool no_irl = false, no_gnn = false;
  auto* train = app.add_subcommand("train", "Train the predictor and reward jointly");
  add_common(train, common);
  train->add_flag("--no-irl", no_irl, "Disable the reward term and reward updates");
  train->add_flag("--no-gnn", no_gnn, "Disable neighbour attention");

  std::string checkpoint, policy_path, split = "test";
  auto* ev = app.add_subcommand("eval", "Evaluate a predictor checkpoint");
  add_common(ev, common);
  ev->add_option("--checkpoint", checkpoint, "Predictor checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--split", split, "train | val | test | ood")
      ->check(CLI::IsMember({"train", "val", "test", "ood"}));

  auto* tp = app.add_subcommand("train-policy", "Train the TD3 policy on source-domain demonstrations");
  add_common(tp, common);
  tp->add_option("--checkpoint", checkpoint, "Predictor checkpoint holding the reward")
      ->required()
      ->check(CLI::ExistingFile);

  auto* ood = app.add_subcommand("ood-eval", "Compare the predictor with and without the policy on OOD data");
  add_common(ood, common);
  ood->add_option("--checkpoint", checkpoint, "Predictor checkpoint")->required()->check(CLI::ExistingFile);
  ood->add_option("--policy", policy_path, "Policy checkpoint")->required()->check(CLI::ExistingFile);

  std::string known, unknown;
  std::optional<double> alpha, beta;
  auto* csa = app.add_subcommand("csa", "Cross-scenario adaptability table and radar chart");
  add_common(csa, common);
  csa->add_option("--known", known, "Report CSV on the known scenario")->required()->check(CLI::ExistingFile);
  csa->add_option("--unknown", unknown, "Report CSV on the unknown scenario")->required()->check(CLI::ExistingFile);
  csa->add_option("--alpha", alpha, "Weight of the known-scenario term (default: csa.alpha)");
  csa->add_option("--beta", beta, "Weight of the degradation penalty (default: csa.beta)");

  auto* ablate = app.add_subcommand("ablate", "Train and evaluate the H1-H4 ablation grid");
  add_common(ablate, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(synth_kind, synth_count, synth_agents, synth_seed, synth_out);
    if (*train) return cmd_train(common, no_irl, no_gnn);
    if (*ev) return cmd_eval(common, checkpoint, split);
    if (*tp) return cmd_train_policy(common, checkpoint);
    if (*ood) return cmd_ood(common, checkpoint, policy_path);
    if (*csa) return cmd_csa(common, known, unknown, alpha, beta);
    if (*ablate) return cmd_ablate(common);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace trajpred::cli

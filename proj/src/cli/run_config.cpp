#include "trajpred/cli/run_config.hpp"

#include <cmath>
#include <fstream>

#include "trajpred/core/error.hpp"
#include "trajpred/core/json_fields.hpp"

namespace trajpred::cli {

using nlohmann::json;

namespace {

json sources_json(const std::vector<data::DataSource>& srcs) {
  json arr = json::array();
  for (const auto& s : srcs) arr.push_back({{"dir", s.dir.string()}, {"scenario", std::string(to_string(s.scenario))}});
  return arr;
}

std::vector<data::DataSource> sources_from(const json& j, const std::string& context) {
  if (!j.is_array()) throw InvalidInput(context + ": expected an array");
  std::vector<data::DataSource> out;
  for (const auto& item : j) {
    JsonFields f(item, context + "[]");
    std::string dir, scenario;
    f.get("dir", dir);
    f.get("scenario", scenario);
    f.finish();
    if (dir.empty()) throw InvalidInput(context + "[].dir is required");
    out.push_back({dir, parse_scenario(scenario)});
  }
  return out;
}

// The run-level seed is the only one; nested configs must not carry their own.
json without_seed(json j) {
  j.erase("seed");
  return j;
}

json with_seed(const json& j, const std::string& context, std::uint64_t seed) {
  if (j.contains("seed")) throw InvalidInput("unknown config key '" + context + ".seed' (use the top-level seed)");
  json out = j;
  out["seed"] = seed;
  return out;
}

}  // namespace

json to_json(const RunConfig& cfg) {
  return {
      {"seed", cfg.seed},
      {"output_dir", cfg.output_dir},
      {"data",
       {{"sources", sources_json(cfg.sources)},
        {"ood_sources", sources_json(cfg.ood_sources)},
        {"history", cfg.window.history},
        {"horizon", cfg.window.horizon},
        {"stride", cfg.window.stride},
        {"downsample", cfg.window.downsample},
        {"split", {{"train", cfg.split.train_fraction}, {"val", cfg.split.val_fraction}, {"test", cfg.split.test_fraction}}}}},
      {"train", without_seed(train::to_json(cfg.train))},
      {"policy", without_seed(policy::to_json(cfg.policy))},
      {"metrics", {{"miss_threshold", cfg.metrics.miss_threshold}, {"crash_distance", cfg.metrics.crash_distance}}},
      {"csa", {{"alpha", cfg.csa_alpha}, {"beta", cfg.csa_beta}}},
  };
}

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  JsonFields f(j, "config");
  f.get("seed", cfg.seed);
  f.get("output_dir", cfg.output_dir);
  if (const auto* d = f.child("data")) {
    JsonFields g(*d, "data");
    if (const auto* s = g.child("sources")) cfg.sources = sources_from(*s, "data.sources");
    if (const auto* s = g.child("ood_sources")) cfg.ood_sources = sources_from(*s, "data.ood_sources");
    g.get("history", cfg.window.history);
    g.get("horizon", cfg.window.horizon);
    g.get("stride", cfg.window.stride);
    g.get("downsample", cfg.window.downsample);
    if (const auto* s = g.child("split")) {
      JsonFields h(*s, "data.split");
      h.get("train", cfg.split.train_fraction);
      h.get("val", cfg.split.val_fraction);
      h.get("test", cfg.split.test_fraction);
      h.finish();
    }
    g.finish();
  }
  const auto* t = f.child("train");
  cfg.train = train::train_config_from_json(with_seed(t ? *t : json::object(), "train", cfg.seed));
  const auto* p = f.child("policy");
  cfg.policy = policy::td3_config_from_json(with_seed(p ? *p : json::object(), "policy", cfg.seed));
  if (const auto* m = f.child("metrics")) {
    JsonFields g(*m, "metrics");
    g.get("miss_threshold", cfg.metrics.miss_threshold);
    g.get("crash_distance", cfg.metrics.crash_distance);
    g.finish();
  }
  if (const auto* c = f.child("csa")) {
    JsonFields g(*c, "csa");
    g.get("alpha", cfg.csa_alpha);
    g.get("beta", cfg.csa_beta);
    g.finish();
  }
  f.finish();

  cfg.split.seed = cfg.seed;
  if (cfg.window.history < 0 || cfg.window.horizon < 0) throw InvalidInput("data.history/horizon must be >= 0");
  if (cfg.window.stride < 1) throw InvalidInput("data.stride must be >= 1");
  if (cfg.window.downsample < 1) throw InvalidInput("data.downsample must be >= 1");
  const auto& sp = cfg.split;
  if (sp.train_fraction < 0 || sp.val_fraction < 0 || sp.test_fraction < 0 ||
      std::abs(sp.train_fraction + sp.val_fraction + sp.test_fraction - 1.0) > 1e-9) {
    throw InvalidInput("data.split fractions must be >= 0 and sum to 1");
  }
  if (cfg.metrics.miss_threshold < 0 || cfg.metrics.crash_distance < 0) {
    throw InvalidInput("metric thresholds must be >= 0");
  }
  return cfg;
}

void apply_override(json& tree, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw InvalidInput("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &tree;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw InvalidInput("override key '" + key + "' has an empty component");
    if (!node->is_object()) throw InvalidInput("override key '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  json tree = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config file '" + path.string() + "'");
    tree = json::parse(in, nullptr, false);
    if (tree.is_discarded()) throw InvalidInput("config file '" + path.string() + "' is not valid JSON");
  }
  for (const auto& o : overrides) apply_override(tree, o);
  return run_config_from_json(tree);
}

}  // namespace trajpred::cli

#include "igb/bench/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "igb/errors.hpp"

namespace igb::bench {

using nlohmann::json;

std::string MethodSpec::label() const {
  std::string out;
  const bool bare_aggregator = strategy == lossbal::StrategyKind::EW && aggregator && !objective;
  if (!bare_aggregator) out = lossbal::to_string(strategy);
  if (objective && *objective != lossbal::default_objective(strategy) && strategy != lossbal::StrategyKind::SI) {
    out += *objective == lossbal::Objective::ScaleInvariant ? "+SI" : "+WS";
  }
  if (aggregator) out += (out.empty() ? "" : "+") + gradbal::to_string(*aggregator);
  return out;
}

lossbal::Objective MethodSpec::effective_objective() const {
  if (strategy == lossbal::StrategyKind::SI) return lossbal::Objective::ScaleInvariant;
  return objective.value_or(lossbal::default_objective(strategy));
}

MethodSpec parse_method(const std::string& label) {
  std::vector<std::string> parts;
  std::stringstream ss(label);
  for (std::string tok; std::getline(ss, tok, '+');) parts.push_back(tok);
  if (parts.empty() || parts.front().empty()) throw ConfigError("empty method label");

  MethodSpec spec;
  std::size_t i = 0;
  const auto& aggs = gradbal::aggregator_names();
  if (std::find(aggs.begin(), aggs.end(), parts[0]) != aggs.end()) {
    spec.strategy = lossbal::StrategyKind::EW;
  } else {
    spec.strategy = lossbal::parse_strategy(parts[0]);
    i = 1;
  }
  for (; i < parts.size(); ++i) {
    if (parts[i] == "SI") {
      spec.objective = lossbal::Objective::ScaleInvariant;
    } else if (parts[i] == "WS") {
      spec.objective = lossbal::Objective::WeightedSum;
    } else {
      if (spec.aggregator) throw ConfigError("method '" + label + "' names two aggregators");
      spec.aggregator = gradbal::parse_aggregator(parts[i]);
    }
  }
  if (spec.objective && *spec.objective == lossbal::default_objective(spec.strategy)) spec.objective.reset();
  return spec;
}

void ExperimentConfig::validate() const {
  suite.validate();
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (jobs == 0) throw ConfigError("jobs must be positive");
  lr.validate();
  igbv2.validate();
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  std::set<std::string> allowed(known.begin(), known.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown config key '" + it.key() + "' in " + where);
  }
}

mtl::TaskSpec parse_task(const json& j) {
  reject_unknown(j, {"scale", "degree", "noise", "kind", "classes"}, "suite.tasks");
  mtl::TaskSpec t;
  read(j, "scale", t.scale);
  read(j, "degree", t.degree);
  read(j, "noise", t.noise);
  read(j, "classes", t.classes);
  std::string kind = "regression";
  read(j, "kind", kind);
  if (kind == "regression") {
    t.kind = mtl::TaskKind::Regression;
  } else if (kind == "classification") {
    t.kind = mtl::TaskKind::Classification;
  } else {
    throw ConfigError("task kind '" + kind + "'; valid kinds: regression, classification");
  }
  return t;
}

std::vector<MethodSpec> parse_methods(const json& j) {
  std::vector<MethodSpec> out;
  for (const auto& item : j) out.push_back(parse_method(item.get<std::string>()));
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(root, {"name", "suite", "strategy", "objective", "aggregator", "sweep", "epochs", "seeds", "lr",
                        "igbv2", "output_dir", "jobs"},
                 "config");

  ExperimentConfig cfg;
  read(root, "name", cfg.name);
  read(root, "epochs", cfg.epochs);
  read(root, "seeds", cfg.seeds);
  read(root, "jobs", cfg.jobs);
  std::string out_dir;
  read(root, "output_dir", out_dir);
  cfg.output_dir = out_dir;

  if (root.contains("suite")) {
    const auto& s = root["suite"];
    reject_unknown(s, {"tasks", "input_dim", "feature_dim", "components", "shared_directions", "samples", "batch_size", "model"},
                   "suite");
    read(s, "input_dim", cfg.suite.input_dim);
    read(s, "feature_dim", cfg.suite.feature_dim);
    read(s, "components", cfg.suite.components);
    read(s, "shared_directions", cfg.suite.shared_directions);
    read(s, "samples", cfg.suite.samples);
    read(s, "batch_size", cfg.suite.batch_size);
    if (s.contains("tasks")) {
      cfg.suite.tasks.clear();
      for (const auto& t : s["tasks"]) cfg.suite.tasks.push_back(parse_task(t));
    }
    if (s.contains("model")) {
      const auto& m = s["model"];
      reject_unknown(m, {"trunk", "head"}, "suite.model");
      read(m, "trunk", cfg.suite.model.trunk_widths);
      read(m, "head", cfg.suite.model.head_width);
    }
  }

  std::string strategy = "EW";
  read(root, "strategy", strategy);
  cfg.method = parse_method(strategy);
  if (root.contains("objective") && !root["objective"].is_null()) {
    cfg.method.objective = lossbal::parse_objective(root["objective"].get<std::string>());
    if (*cfg.method.objective == lossbal::default_objective(cfg.method.strategy)) cfg.method.objective.reset();
  }
  if (root.contains("aggregator") && !root["aggregator"].is_null()) {
    cfg.method.aggregator = gradbal::parse_aggregator(root["aggregator"].get<std::string>());
  }
  if (root.contains("sweep")) cfg.sweep = parse_methods(root["sweep"]);

  if (root.contains("lr")) {
    const auto& l = root["lr"];
    reject_unknown(l, {"initial", "decay_factor", "decay_every"}, "lr");
    read(l, "initial", cfg.lr.initial_lr);
    read(l, "decay_factor", cfg.lr.decay_factor);
    read(l, "decay_every", cfg.lr.decay_every_epochs);
  }

  if (root.contains("igbv2")) {
    const auto& g = root["igbv2"];
    reject_unknown(g, {"update_e", "use_e", "update_every", "buffer_capacity", "deterministic_actions", "reward_min",
                       "reward_alpha", "sac"},
                   "igbv2");
    auto& c = cfg.igbv2;
    read(g, "update_e", c.update_e);
    read(g, "use_e", c.use_e);
    read(g, "update_every", c.update_every);
    read(g, "buffer_capacity", c.buffer_capacity);
    read(g, "deterministic_actions", c.deterministic_actions);
    read(g, "reward_min", c.reward.use_min);
    read(g, "reward_alpha", c.reward.use_alpha);
    if (g.contains("sac")) {
      const auto& s = g["sac"];
      reject_unknown(s, {"hidden", "update_batch", "gamma", "tau", "alpha", "auto_entropy", "lr", "updates_per_round"},
                     "igbv2.sac");
      read(s, "hidden", c.sac.hidden);
      read(s, "update_batch", c.sac.update_batch);
      read(s, "gamma", c.sac.gamma);
      read(s, "tau", c.sac.tau);
      read(s, "alpha", c.sac.entropy_temperature);
      read(s, "auto_entropy", c.sac.auto_entropy);
      read(s, "lr", c.sac.lr);
      read(s, "updates_per_round", c.sac.updates_per_round);
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json tasks = json::array();
  for (const auto& t : cfg.suite.tasks) {
    json jt{{"scale", t.scale}, {"degree", t.degree}, {"noise", t.noise},
            {"kind", t.kind == mtl::TaskKind::Regression ? "regression" : "classification"}};
    if (t.kind == mtl::TaskKind::Classification) jt["classes"] = t.classes;
    tasks.push_back(jt);
  }
  json sweep = json::array();
  for (const auto& m : cfg.sweep) sweep.push_back(m.label());
  const auto& g = cfg.igbv2;
  json root{
      {"name", cfg.name},
      {"suite",
       {{"tasks", tasks},
        {"input_dim", cfg.suite.input_dim},
        {"feature_dim", cfg.suite.feature_dim},
        {"components", cfg.suite.components},
        {"shared_directions", cfg.suite.shared_directions},
        {"samples", cfg.suite.samples},
        {"batch_size", cfg.suite.batch_size},
        {"model", {{"trunk", cfg.suite.model.trunk_widths}, {"head", cfg.suite.model.head_width}}}}},
      {"strategy", cfg.method.label()},
      {"sweep", sweep},
      {"epochs", cfg.epochs},
      {"seeds", cfg.seeds},
      {"lr",
       {{"initial", cfg.lr.initial_lr}, {"decay_factor", cfg.lr.decay_factor}, {"decay_every", cfg.lr.decay_every_epochs}}},
      {"igbv2",
       {{"update_e", g.update_e},
        {"use_e", g.use_e},
        {"update_every", g.update_every},
        {"buffer_capacity", g.buffer_capacity},
        {"deterministic_actions", g.deterministic_actions},
        {"reward_min", g.reward.use_min},
        {"reward_alpha", g.reward.use_alpha},
        {"sac",
         {{"hidden", g.sac.hidden},
          {"update_batch", g.sac.update_batch},
          {"gamma", g.sac.gamma},
          {"tau", g.sac.tau},
          {"alpha", g.sac.entropy_temperature},
          {"auto_entropy", g.sac.auto_entropy},
          {"lr", g.sac.lr},
          {"updates_per_round", g.sac.updates_per_round}}}}},
      {"output_dir", cfg.output_dir.string()},
      {"jobs", cfg.jobs},
  };
  return root.dump(2);
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& config) {
  if (!config.output_dir.empty()) return config.output_dir;
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) return std::filesystem::path(root) / config.name;
  return std::filesystem::path("runs") / config.name;
}

}  // namespace igb::bench

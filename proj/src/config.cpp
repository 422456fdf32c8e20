// Copyright 2026 The safenav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "safenav/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace safenav {

namespace {

using nlohmann::json;

void reject_unknown(const json& section, const std::string& name,
                    std::initializer_list<const char*> known) {
  if (!section.is_object()) {
    throw ConfigError("section '" + name + "' must be an object");
  }
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : section.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in section '" + name + "'");
    }
  }
}

template <typename T>
void read(const json& section, const char* key, T& out) {
  if (section.contains(key)) {
    out = section.at(key).get<T>();
  }
}

void read_interval(const json& section, const char* key, Interval& out) {
  if (section.contains(key)) {
    const auto v = section.at(key).get<std::vector<double>>();
    if (v.size() != 2) {
      throw ConfigError(std::string("'") + key + "' must be [low, high]");
    }
    out = {v[0], v[1]};
  }
}

void read_vec2(const json& section, const char* key, Vector2d& out) {
  if (section.contains(key)) {
    const auto v = section.at(key).get<std::vector<double>>();
    if (v.size() != 2) {
      throw ConfigError(std::string("'") + key + "' must have two entries");
    }
    out = {v[0], v[1]};
  }
}

ScenarioSpec scenario_for(ScenarioKind kind, int humans) {
  switch (kind) {
    case ScenarioKind::position_swap:
      return ScenarioSpec::position_swap();
    case ScenarioKind::circle_crossing:
      return ScenarioSpec::circle_crossing(humans);
    case ScenarioKind::circle_interaction:
      return ScenarioSpec::circle_interaction(humans);
    case ScenarioKind::random:
      return ScenarioSpec::random(humans);
  }
  return ScenarioSpec::position_swap();
}

void read_train(const json& j, TrainConfig& t) {
  reject_unknown(j, "train",
                 {"total_timesteps", "lambda_sigma", "target_variance", "learning_rate", "clip_epsilon",
                  "gae_lambda", "gamma", "epochs_per_update", "num_steps", "batch_size", "num_envs",
                  "sequence_length", "entropy_coef", "value_coef", "max_grad_norm", "adam_epsilon",
                  "dropout_train", "variance_loss", "seed", "env_seed", "checkpoint_interval",
                  "hidden_size", "actor_hidden", "critic_hidden"});
  read(j, "total_timesteps", t.total_timesteps);
  read(j, "lambda_sigma", t.lambda_sigma);
  read_vec2(j, "target_variance", t.target_variance);
  read(j, "learning_rate", t.learning_rate);
  read(j, "clip_epsilon", t.clip_epsilon);
  read(j, "gae_lambda", t.gae_lambda);
  read(j, "gamma", t.gamma);
  read(j, "epochs_per_update", t.epochs_per_update);
  read(j, "num_steps", t.num_steps);
  read(j, "batch_size", t.batch_size);
  read(j, "num_envs", t.num_envs);
  read(j, "sequence_length", t.sequence_length);
  read(j, "entropy_coef", t.entropy_coef);
  read(j, "value_coef", t.value_coef);
  read(j, "max_grad_norm", t.max_grad_norm);
  read(j, "adam_epsilon", t.adam_epsilon);
  read(j, "dropout_train", t.dropout_train);
  read(j, "variance_loss", t.variance_loss);
  read(j, "seed", t.seed);
  if (j.contains("env_seed")) {
    t.env_seed = j.at("env_seed").get<std::uint64_t>();
  }
  read(j, "checkpoint_interval", t.checkpoint_interval);
  read(j, "hidden_size", t.architecture.hidden_size);
  read(j, "actor_hidden", t.architecture.actor_hidden);
  read(j, "critic_hidden", t.architecture.critic_hidden);
}

void read_scenario(const json& j, ScenarioSpec& s) {
  reject_unknown(j, "scenario",
                 {"kind", "humans", "circle_radius", "speed_range", "proxemic_range", "time_limit"});
  if (j.contains("kind") || j.contains("humans")) {
    const ScenarioKind kind =
        j.contains("kind") ? scenario_kind_from_string(j.at("kind").get<std::string>()) : s.kind;
    int humans = s.human_count;
    read(j, "humans", humans);
    s = scenario_for(kind, humans);
  }
  read(j, "circle_radius", s.circle_radius);
  read_interval(j, "speed_range", s.speed_range);
  read_interval(j, "proxemic_range", s.proxemic_range);
  read(j, "time_limit", s.time_limit);
}

void read_perturbation(const json& j, PerturbationSpec& p) {
  reject_unknown(j, "perturbation", {"sigma_obs", "sigma_head", "sigma_vel", "vel_scale", "extra_humans"});
  read(j, "sigma_obs", p.sigma_obs);
  read(j, "sigma_head", p.sigma_head);
  read(j, "sigma_vel", p.sigma_vel);
  read(j, "vel_scale", p.vel_scale);
  read(j, "extra_humans", p.extra_humans);
}

void read_poc(const json& j, PocThresholds& p) {
  reject_unknown(j, "poc", {"preset", "lambda_ep", "lambda_f", "lambda_prox", "beta_1", "window"});
  if (j.contains("preset")) {
    const auto preset = j.at("preset").get<std::string>();
    if (preset == "dropout") {
      p = PocThresholds::dropout();
    } else if (preset == "ensemble") {
      p = PocThresholds::ensemble();
    } else {
      throw ConfigError("unknown threshold preset '" + preset + "'");
    }
  }
  read(j, "lambda_ep", p.lambda_ep);
  read(j, "lambda_f", p.lambda_f);
  read(j, "lambda_prox", p.lambda_prox);
  read(j, "beta_1", p.beta_1);
  read(j, "window", p.window);
}

void read_env(const json& j, EnvConfig& e) {
  reject_unknown(j, "env",
                 {"dt", "robot_radius", "human_radius", "robot_max_speed", "robot_preferred_speed",
                  "max_delta_heading", "max_humans", "orca_time_horizon", "spawn_clearance",
                  "spawn_attempts", "goal_bonus", "collision_penalty", "time_penalty",
                  "progress_gain", "proxemic_gain", "speed_gain"});
  read(j, "dt", e.dt);
  read(j, "robot_radius", e.robot_radius);
  read(j, "human_radius", e.human_radius);
  read(j, "robot_max_speed", e.robot_max_speed);
  read(j, "robot_preferred_speed", e.robot_preferred_speed);
  read(j, "max_delta_heading", e.max_delta_heading);
  read(j, "max_humans", e.max_humans);
  read(j, "orca_time_horizon", e.orca_time_horizon);
  read(j, "spawn_clearance", e.spawn_clearance);
  read(j, "spawn_attempts", e.spawn_attempts);
  read(j, "goal_bonus", e.reward.goal_bonus);
  read(j, "collision_penalty", e.reward.collision_penalty);
  read(j, "time_penalty", e.reward.time_penalty);
  read(j, "progress_gain", e.reward.progress_gain);
  read(j, "proxemic_gain", e.reward.proxemic_gain);
  read(j, "speed_gain", e.reward.speed_gain);
}

void read_eval(const json& j, EvalConfig& e) {
  reject_unknown(j, "eval",
                 {"episodes", "seeds", "ensemble_members", "mc_samples", "rate_test", "approach_rule",
                  "fallback_uses_true_state"});
  read(j, "episodes", e.episodes);
  read(j, "seeds", e.seeds);
  read(j, "ensemble_members", e.ensemble_members);
  read(j, "mc_samples", e.mc_samples);
  read(j, "rate_test", e.rate_test);
  if (j.contains("approach_rule")) {
    const auto rule = j.at("approach_rule").get<std::string>();
    if (rule == "closing") {
      e.approach_rule = ApproachRule::closing;
    } else if (rule == "literal") {
      e.approach_rule = ApproachRule::literal;
    } else {
      throw ConfigError("approach_rule must be 'closing' or 'literal'");
    }
  }
  read(j, "fallback_uses_true_state", e.fallback_uses_true_state);
}

}  // namespace

void HarnessConfig::apply_paper_scale() {
  eval.seeds.clear();
  for (std::uint64_t s = 1; s <= 15; ++s) {
    eval.seeds.push_back(s);
  }
  eval.episodes = 200;
  eval.ensemble_members = 20;
}

void HarnessConfig::validate() const {
  train.validate();
  scenario.validate();
  perturbation.validate();
  poc.validate();
  if (eval.episodes < 1) {
    throw ConfigError("eval.episodes must be positive");
  }
  if (eval.seeds.empty()) {
    throw ConfigError("eval.seeds must not be empty");
  }
  if (eval.ensemble_members < 2) {
    throw ConfigError("eval.ensemble_members must be at least 2");
  }
  if (eval.mc_samples < 2) {
    throw ConfigError("eval.mc_samples must be at least 2");
  }
  if (!(eval.rate_test >= 0.0 && eval.rate_test < 1.0)) {
    throw ConfigError("eval.rate_test must lie in [0, 1)");
  }
  if (env.max_humans < 1 || !(env.dt > 0.0)) {
    throw ConfigError("env.max_humans and env.dt must be positive");
  }
}

HarnessConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  HarnessConfig config;
  try {
    reject_unknown(j, "root", {"train", "scenario", "perturbation", "poc", "env", "eval"});
    if (j.contains("train")) read_train(j["train"], config.train);
    if (j.contains("scenario")) read_scenario(j["scenario"], config.scenario);
    if (j.contains("perturbation")) read_perturbation(j["perturbation"], config.perturbation);
    if (j.contains("poc")) read_poc(j["poc"], config.poc);
    if (j.contains("env")) read_env(j["env"], config.env);
    if (j.contains("eval")) read_eval(j["eval"], config.eval);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return config;
}

HarnessConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string config_to_json(const HarnessConfig& c) {
  const TrainConfig& t = c.train;
  json j;
  j["train"] = {{"total_timesteps", t.total_timesteps},
                {"lambda_sigma", t.lambda_sigma},
                {"target_variance", {t.target_variance[0], t.target_variance[1]}},
                {"learning_rate", t.learning_rate},
                {"clip_epsilon", t.clip_epsilon},
                {"gae_lambda", t.gae_lambda},
                {"gamma", t.gamma},
                {"epochs_per_update", t.epochs_per_update},
                {"num_steps", t.num_steps},
                {"batch_size", t.batch_size},
                {"num_envs", t.num_envs},
                {"sequence_length", t.sequence_length},
                {"entropy_coef", t.entropy_coef},
                {"value_coef", t.value_coef},
                {"max_grad_norm", t.max_grad_norm},
                {"adam_epsilon", t.adam_epsilon},
                {"dropout_train", t.dropout_train},
                {"variance_loss", t.variance_loss},
                {"seed", t.seed},
                {"checkpoint_interval", t.checkpoint_interval},
                {"hidden_size", t.architecture.hidden_size},
                {"actor_hidden", t.architecture.actor_hidden},
                {"critic_hidden", t.architecture.critic_hidden}};
  if (t.env_seed) {
    j["train"]["env_seed"] = *t.env_seed;
  }
  const ScenarioSpec& s = c.scenario;
  j["scenario"] = {{"kind", std::string(to_string(s.kind))},
                   {"humans", s.human_count},
                   {"circle_radius", s.circle_radius},
                   {"speed_range", {s.speed_range.low, s.speed_range.high}},
                   {"proxemic_range", {s.proxemic_range.low, s.proxemic_range.high}},
                   {"time_limit", s.time_limit}};
  const PerturbationSpec& p = c.perturbation;
  j["perturbation"] = {{"sigma_obs", p.sigma_obs},
                       {"sigma_head", p.sigma_head},
                       {"sigma_vel", p.sigma_vel},
                       {"vel_scale", p.vel_scale},
                       {"extra_humans", p.extra_humans}};
  j["poc"] = {{"lambda_ep", c.poc.lambda_ep},
              {"lambda_f", c.poc.lambda_f},
              {"lambda_prox", c.poc.lambda_prox},
              {"beta_1", c.poc.beta_1},
              {"window", c.poc.window}};
  const EnvConfig& e = c.env;
  j["env"] = {{"dt", e.dt},
              {"robot_radius", e.robot_radius},
              {"human_radius", e.human_radius},
              {"robot_max_speed", e.robot_max_speed},
              {"robot_preferred_speed", e.robot_preferred_speed},
              {"max_delta_heading", e.max_delta_heading},
              {"max_humans", e.max_humans},
              {"orca_time_horizon", e.orca_time_horizon},
              {"spawn_clearance", e.spawn_clearance},
              {"spawn_attempts", e.spawn_attempts},
              {"goal_bonus", e.reward.goal_bonus},
              {"collision_penalty", e.reward.collision_penalty},
              {"time_penalty", e.reward.time_penalty},
              {"progress_gain", e.reward.progress_gain},
              {"proxemic_gain", e.reward.proxemic_gain},
              {"speed_gain", e.reward.speed_gain}};
  j["eval"] = {{"episodes", c.eval.episodes},
               {"seeds", c.eval.seeds},
               {"ensemble_members", c.eval.ensemble_members},
               {"mc_samples", c.eval.mc_samples},
               {"rate_test", c.eval.rate_test},
               {"approach_rule", c.eval.approach_rule == ApproachRule::closing ? "closing" : "literal"},
               {"fallback_uses_true_state", c.eval.fallback_uses_true_state}};
  return j.dump(2);
}

std::string config_hash(const HarnessConfig& config) {
  const std::string text = config_to_json(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace safenav

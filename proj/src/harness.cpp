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


#include "safenav/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "safenav/trainer.hpp"

namespace safenav {

namespace {

constexpr std::uint64_t kMaskStream = 4;
constexpr int kEvaluationStream = 1 << 10;

// Humans as the robot perceives them through a (possibly noisy) observation.
std::vector<HumanView> observed_humans(const Observation& obs, const WorldState& world,
                                       const EnvConfig& config) {
  const AgentState& robot = world.robot();
  const std::size_t visible =
      std::min<std::size_t>(world.human_count(), static_cast<std::size_t>(config.max_humans));
  std::vector<HumanView> humans;
  humans.reserve(visible);
  for (std::size_t slot = 0; slot < visible; ++slot) {
    const Eigen::Index base = kRobotObservationSize + static_cast<Eigen::Index>(slot) * kHumanObservationSize;
    const Vec2 rel_pos(obs.features[base], obs.features[base + 1]);
    const Vec2 rel_vel(obs.features[base + 2], obs.features[base + 3]);
    HumanView h;
    h.position = robot.position + rotate(rel_pos, robot.heading);
    h.velocity = robot.velocity + rotate(rel_vel, robot.heading);
    h.radius = std::max(0.0, obs.features[base + 4]);
    humans.push_back(h);
  }
  return humans;
}

void check_architectures(std::span<const Policy> members) {
  for (const Policy& p : members) {
    if (!(p.architecture() == members.front().architecture())) {
      throw std::invalid_argument("ensemble members have different architectures");
    }
  }
}

}  // namespace

std::string_view to_string(UncertaintyMode mode) {
  switch (mode) {
    case UncertaintyMode::none:
      return "none";
    case UncertaintyMode::dropout:
      return "dropout";
    case UncertaintyMode::ensemble:
      return "ensemble";
  }
  return "none";
}

UncertaintyMode uncertainty_mode_from_string(std::string_view name) {
  if (name == "none") return UncertaintyMode::none;
  if (name == "dropout") return UncertaintyMode::dropout;
  if (name == "ensemble") return UncertaintyMode::ensemble;
  throw std::invalid_argument("unknown uncertainty mode '" + std::string(name) + "'");
}

PolicyBundle PolicyBundle::single(const Checkpoint& checkpoint) {
  PolicyBundle bundle;
  bundle.members.push_back(checkpoint.policy);
  bundle.bounds = checkpoint.feature_bounds;
  return bundle;
}

PolicyBundle PolicyBundle::ensemble(std::span<const Checkpoint> checkpoints) {
  if (checkpoints.size() < 2) {
    throw std::invalid_argument("an ensemble needs at least two checkpoints");
  }
  PolicyBundle bundle;
  for (const auto& c : checkpoints) {
    bundle.members.push_back(c.policy);
  }
  check_architectures(bundle.members);
  bundle.bounds = checkpoints.front().feature_bounds;
  return bundle;
}

void EpisodeOptions::validate() const {
  if (uncertainty == UncertaintyMode::dropout && mc_samples < 2) {
    throw std::invalid_argument("MC-Dropout needs at least two samples");
  }
  if (!(rate_test >= 0.0 && rate_test < 1.0)) {
    throw std::invalid_argument("rate_test must lie in [0, 1)");
  }
  if (gate && uncertainty == UncertaintyMode::none) {
    throw std::invalid_argument("the safety gate needs an uncertainty estimator");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("gamma must lie in [0, 1]");
  }
  thresholds.validate();
}

EpisodeMetrics run_episode(const PolicyBundle& bundle, const ScenarioSpec& scenario,
                           const PerturbationSpec& perturbation, const EnvConfig& env_config,
                           std::uint64_t seed, const EpisodeOptions& options) {
  options.validate();
  if (bundle.members.empty()) {
    throw std::invalid_argument("no policy to evaluate");
  }
  if (options.uncertainty == UncertaintyMode::ensemble && bundle.members.size() < 2) {
    throw std::invalid_argument("ensemble uncertainty needs at least two members");
  }
  const Policy& control = bundle.control();
  if (control.architecture().input_size != observation_size(env_config)) {
    throw std::invalid_argument("checkpoint input size does not match the environment");
  }

  CrowdEnv env(env_config);
  Observation obs = env.reset(scenario, perturbation, seed);
  Rng mask_rng = make_rng(seed, kMaskStream);
  Rng unused = make_rng(0);

  const bool ensemble = options.uncertainty == UncertaintyMode::ensemble;
  std::vector<RecurrentState> member_states;
  RecurrentState state = control.initial_state();
  if (ensemble) {
    for (const auto& m : bundle.members) {
      member_states.push_back(m.initial_state());
    }
  }

  FallbackConfig fallback;
  fallback.dt = env_config.dt;
  fallback.max_delta_heading = env_config.max_delta_heading;
  fallback.time_horizon = env_config.orca_time_horizon;

  UncertaintyWindow window(options.thresholds.window);
  GeometryTracker tracker;

  EpisodeMetrics m;
  m.seed = seed;
  double discount = 1.0;
  m.min_human_distance = std::numeric_limits<double>::infinity();

  while (!env.done()) {
    StepRecord record;
    record.t = env.world().time_step;
    ActionCommand policy_action;

    if (ensemble) {
      const UncertaintySampleSet samples = ensemble_samples(bundle.members, obs, member_states);
      record.estimate = estimate(samples, bundle.bounds);
      policy_action = {samples.means(0, 0), samples.means(0, 1)};
    } else {
      PolicyOutput out = control.forward(obs, state, DropoutMode::off(), unused);
      policy_action = {out.action_mean[0], out.action_mean[1]};
      if (options.uncertainty == UncertaintyMode::dropout) {
        const UncertaintySampleSet samples =
            mc_dropout_samples(control, obs, state, options.mc_samples, options.rate_test, mask_rng);
        record.estimate = estimate(samples, bundle.bounds);
      }
      state = std::move(out.recurrent_state);
    }

    ActionCommand action = policy_action;
    if (options.uncertainty != UncertaintyMode::none) {
      window.push(record.estimate);
      record.windowed = window.mean();
      m.uncertainty_sum.epistemic += record.estimate.epistemic;
      m.uncertainty_sum.aleatoric += record.estimate.aleatoric;
      m.uncertainty_sum.feature_uncertainty += record.estimate.feature_uncertainty;
      m.uncertainty_steps += 1;
    }
    const auto ctx = tracker.update(env.world());
    if (ctx) {
      record.nearest_distance = ctx->nearest_distance;
    }
    if (options.gate && ctx) {
      record.conditions = poc_conditions(record.windowed.epistemic[1], record.windowed.feature_uncertainty,
                                         *ctx, options.thresholds, options.approach_rule);
      ActionCommand fallback_action;
      if (record.conditions.poc) {
        const auto humans = options.fallback_uses_true_state ? human_views(env.world())
                                                             : observed_humans(obs, env.world(), env_config);
        fallback_action = cautious_policy(robot_view(env.world(), env_config), humans, fallback);
      }
      const auto [chosen, mode] = select_action(policy_action, record.conditions.poc, fallback_action);
      action = chosen;
      record.mode = mode;
    }
    if (record.mode == ControlMode::cautious) {
      m.cautious_steps += 1;
    }

    StepResult result = env.step(action);
    record.reward = result.reward;
    record.action = action;
    record.time = env.world().elapsed_time;
    m.episode_return += discount * result.reward;
    discount *= options.gamma;
    m.steps += 1;
    m.proxemic_violations += result.info.proxemic_violation ? 1 : 0;
    m.min_human_distance = std::min(m.min_human_distance, result.info.min_human_distance);
    if (options.record_trace) {
      for (const auto& a : env.world().agents) {
        record.agents.push_back({a.position, a.velocity, a.radius});
      }
      m.trace.push_back(record);
    }
    if (result.done) {
      m.outcome = result.info.outcome;
    }
    obs = std::move(result.observation);
  }
  return m;
}

std::vector<EpisodeMetrics> run_episodes(const PolicyBundle& bundle, const ScenarioSpec& scenario,
                                         const PerturbationSpec& perturbation, const EnvConfig& env,
                                         std::span<const std::uint64_t> seeds,
                                         const EpisodeOptions& options, Execution execution) {
  const int n = static_cast<int>(seeds.size());
  std::vector<EpisodeMetrics> results(n);
  if (execution == Execution::serial) {
    for (int i = 0; i < n; ++i) {
      results[i] = run_episode(bundle, scenario, perturbation, env, seeds[i], options);
    }
    return results;
  }
  std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      results[i] = run_episode(bundle, scenario, perturbation, env, seeds[i], options);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      throw std::runtime_error("episode with seed " + std::to_string(seeds[i]) + " failed: " + errors[i]);
    }
  }
  return results;
}

std::vector<std::uint64_t> evaluation_seeds(std::uint64_t base_seed, int episodes) {
  if (episodes < 1) {
    throw std::invalid_argument("at least one episode is required");
  }
  std::vector<std::uint64_t> seeds(episodes);
  for (int i = 0; i < episodes; ++i) {
    seeds[i] = episode_seed(base_seed, kEvaluationStream, i);
  }
  return seeds;
}

EvaluationSummary summarize(std::span<const EpisodeMetrics> episodes) {
  EvaluationSummary s;
  s.episodes = static_cast<int>(episodes.size());
  if (episodes.empty()) {
    return s;
  }
  const double n = static_cast<double>(episodes.size());
  int goals = 0;
  int collisions = 0;
  int timeouts = 0;
  for (const auto& e : episodes) {
    goals += e.outcome == Outcome::goal;
    collisions += e.outcome == Outcome::collision;
    timeouts += e.outcome == Outcome::timeout;
    s.proxemic_violations_total += e.proxemic_violations;
    s.return_mean += e.episode_return;
    s.min_distance_mean += e.min_human_distance;
  }
  s.goal_pct = 100.0 * goals / n;
  s.collision_pct = 100.0 * collisions / n;
  s.timeout_pct = 100.0 * timeouts / n;
  s.proxemic_violations_mean = s.proxemic_violations_total / n;
  s.return_mean /= n;
  s.min_distance_mean /= n;
  double sq = 0.0;
  for (const auto& e : episodes) {
    sq += (e.episode_return - s.return_mean) * (e.episode_return - s.return_mean);
  }
  s.return_std = std::sqrt(sq / n);
  return s;
}

EvaluationSummary run_evaluation(const PolicyBundle& bundle, const ScenarioSpec& scenario,
                                 const EnvConfig& env, int episodes,
                                 std::span<const std::uint64_t> seeds,
                                 std::vector<EpisodeMetrics>* records) {
  if (seeds.empty()) {
    throw std::invalid_argument("at least one evaluation seed is required");
  }
  std::vector<std::uint64_t> all;
  for (const auto s : seeds) {
    const auto group = evaluation_seeds(s, episodes);
    all.insert(all.end(), group.begin(), group.end());
  }
  const auto results = run_episodes(bundle, scenario, {}, env, all, EpisodeOptions{});
  const EvaluationSummary summary = summarize(results);
  if (records) {
    *records = results;
  }
  return summary;
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::obs_noise:
      return "obs_noise";
    case SweepAxis::action_noise:
      return "action_noise";
    case SweepAxis::velocity_scale:
      return "velocity_scale";
    case SweepAxis::human_count:
      return "human_count";
  }
  return "obs_noise";
}

SweepAxis sweep_axis_from_string(std::string_view name) {
  for (SweepAxis a : {SweepAxis::obs_noise, SweepAxis::action_noise, SweepAxis::velocity_scale,
                      SweepAxis::human_count}) {
    if (to_string(a) == name) {
      return a;
    }
  }
  throw std::invalid_argument("unknown perturbation axis '" + std::string(name) + "'");
}

std::vector<double> default_grid(SweepAxis axis) {
  std::vector<double> grid;
  switch (axis) {
    case SweepAxis::obs_noise:
    case SweepAxis::action_noise:
      for (int i = 0; i <= 10; ++i) grid.push_back(0.2 * i);
      break;
    case SweepAxis::velocity_scale:
      for (int i = 1; i <= 8; ++i) grid.push_back(i);
      break;
    case SweepAxis::human_count:
      for (int i = 2; i <= 7; ++i) grid.push_back(i);
      break;
  }
  return grid;
}

PerturbationSpec perturbation_at(SweepAxis axis, double strength, const PerturbationSpec& base) {
  PerturbationSpec p = base;
  switch (axis) {
    case SweepAxis::obs_noise:
      p.sigma_obs = strength;
      break;
    case SweepAxis::action_noise:
      // Speed noise saturates at the robot's speed range.
      p.sigma_head = strength;
      p.sigma_vel = std::min(strength, 1.0);
      break;
    case SweepAxis::velocity_scale:
      p.vel_scale = strength;
      break;
    case SweepAxis::human_count: {
      const int agents = static_cast<int>(std::lround(strength));
      if (agents < 2 || std::abs(strength - agents) > 1e-9) {
        throw std::invalid_argument("agent count must be an integer >= 2");
      }
      p.extra_humans = agents - 2;
      break;
    }
  }
  p.validate();
  return p;
}

std::string_view uncertainty_kind_name(int kind) {
  static constexpr std::array<std::string_view, kUncertaintyKinds> names{
      "epistemic_speed", "epistemic_heading", "aleatoric_speed", "aleatoric_heading",
      "predictive_feature"};
  return names.at(kind);
}

double uncertainty_kind_value(const UncertaintyEstimate& e, int kind) {
  switch (kind) {
    case 0:
      return e.epistemic[0];
    case 1:
      return e.epistemic[1];
    case 2:
      return e.aleatoric[0];
    case 3:
      return e.aleatoric[1];
    case 4:
      return e.feature_uncertainty;
  }
  throw std::out_of_range("unknown uncertainty kind");
}

SweepResult perturbation_sweep(const PolicyBundle& bundle, const ScenarioSpec& base_scenario,
                               const EnvConfig& env, SweepAxis axis, std::span<const double> grid,
                               std::span<const std::uint64_t> seeds, const EpisodeOptions& options,
                               std::vector<std::vector<EpisodeMetrics>>* records) {
  if (options.uncertainty == UncertaintyMode::none) {
    throw std::invalid_argument("a sweep needs an uncertainty estimator");
  }
  if (options.uncertainty == UncertaintyMode::ensemble && bundle.members.size() < 2) {
    throw std::invalid_argument("ensemble sweeps need at least two checkpoints");
  }
  if (grid.empty()) {
    throw std::invalid_argument("empty sweep grid");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("sweep grid must be strictly increasing");
    }
  }
  SweepResult sweep;
  sweep.axis = axis;
  sweep.uncertainty = options.uncertainty;
  if (records) {
    records->clear();
  }
  for (const double strength : grid) {
    const PerturbationSpec p = perturbation_at(axis, strength);
    const auto episodes = run_episodes(bundle, base_scenario, p, env, seeds, options);
    SweepPoint point;
    point.strength = strength;
    point.episodes = static_cast<int>(episodes.size());
    UncertaintyEstimate sum;
    for (const auto& e : episodes) {
      sum.epistemic += e.uncertainty_sum.epistemic;
      sum.aleatoric += e.uncertainty_sum.aleatoric;
      sum.feature_uncertainty += e.uncertainty_sum.feature_uncertainty;
      point.steps += e.uncertainty_steps;
      point.collisions += e.outcome == Outcome::collision;
      point.goals += e.outcome == Outcome::goal;
    }
    for (int k = 0; k < kUncertaintyKinds; ++k) {
      point.mean_uncertainty[k] = point.steps > 0 ? uncertainty_kind_value(sum, k) / point.steps : 0.0;
    }
    sweep.points.push_back(point);
    if (records) {
      records->push_back(episodes);
    }
  }
  return sweep;
}

SweepResult merge_sweeps(std::span<const SweepResult> sweeps) {
  if (sweeps.empty()) {
    throw std::invalid_argument("nothing to merge");
  }
  SweepResult merged = sweeps.front();
  for (auto& p : merged.points) {
    p = SweepPoint{p.strength};
  }
  for (const auto& s : sweeps) {
    if (s.axis != merged.axis || s.points.size() != merged.points.size()) {
      throw std::invalid_argument("sweeps differ in axis or grid");
    }
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      const SweepPoint& src = s.points[i];
      SweepPoint& dst = merged.points[i];
      if (src.strength != dst.strength) {
        throw std::invalid_argument("sweeps differ in grid");
      }
      for (int k = 0; k < kUncertaintyKinds; ++k) {
        dst.mean_uncertainty[k] += src.mean_uncertainty[k] * src.steps;
      }
      dst.collisions += src.collisions;
      dst.goals += src.goals;
      dst.episodes += src.episodes;
      dst.steps += src.steps;
    }
  }
  for (auto& p : merged.points) {
    for (auto& u : p.mean_uncertainty) {
      u = p.steps > 0 ? u / p.steps : 0.0;
    }
  }
  return merged;
}

std::optional<double> normalized_rate_of_change(double u_at_zero, double u_at_max,
                                                double strength_zero, double strength_max) {
  if (!(strength_max > strength_zero)) {
    throw std::invalid_argument("strength range must be increasing");
  }
  if (u_at_zero == 0.0) {
    return std::nullopt;
  }
  return (u_at_max - u_at_zero) / u_at_zero / (strength_max - strength_zero);
}

std::array<std::optional<double>, kUncertaintyKinds> sweep_rates(const SweepResult& sweep) {
  if (sweep.points.size() < 2) {
    throw std::invalid_argument("a rate of change needs at least two sweep points");
  }
  const SweepPoint& first = sweep.points.front();
  const SweepPoint& last = sweep.points.back();
  std::array<std::optional<double>, kUncertaintyKinds> rates;
  for (int k = 0; k < kUncertaintyKinds; ++k) {
    rates[k] = normalized_rate_of_change(first.mean_uncertainty[k], last.mean_uncertainty[k],
                                         first.strength, last.strength);
  }
  return rates;
}

SafeActionComparison safe_action_comparison(const PolicyBundle& bundle, const ScenarioSpec& scenario,
                                            const PerturbationSpec& perturbation,
                                            const EnvConfig& env, int episodes,
                                            std::span<const std::uint64_t> seeds,
                                            const EpisodeOptions& gated_options) {
  if (seeds.empty()) {
    throw std::invalid_argument("at least one seed group is required");
  }
  EpisodeOptions ungated = gated_options;
  ungated.gate = false;
  ungated.uncertainty = UncertaintyMode::none;

  SafeActionComparison cmp;
  std::vector<double> prevented;
  for (const auto base : seeds) {
    const auto group_seeds = evaluation_seeds(base, episodes);
    const auto off = run_episodes(bundle, scenario, perturbation, env, group_seeds, ungated);
    const auto on = run_episodes(bundle, scenario, perturbation, env, group_seeds, gated_options);
    SafeActionGroup g;
    g.seed = base;
    g.episodes = episodes;
    for (const auto& e : off) g.collisions_off += e.outcome == Outcome::collision;
    for (const auto& e : on) {
      g.collisions_on += e.outcome == Outcome::collision;
      g.cautious_steps += e.cautious_steps;
    }
    if (g.collisions_off > 0) {
      g.prevented_pct = 100.0 * (g.collisions_off - g.collisions_on) / g.collisions_off;
      prevented.push_back(*g.prevented_pct);
    }
    cmp.collisions_off += g.collisions_off;
    cmp.collisions_on += g.collisions_on;
    cmp.groups.push_back(g);
  }
  if (!prevented.empty()) {
    const double mean = std::accumulate(prevented.begin(), prevented.end(), 0.0) / prevented.size();
    double sq = 0.0;
    for (double p : prevented) sq += (p - mean) * (p - mean);
    cmp.prevented_mean = mean;
    cmp.prevented_std = std::sqrt(sq / prevented.size());
  }
  return cmp;
}

}  // namespace safenav

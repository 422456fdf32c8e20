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

#include "safenav/crowd_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace safenav {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr std::uint64_t kSpawnStream = 1;
constexpr std::uint64_t kObservationStream = 2;
constexpr std::uint64_t kActionStream = 3;

double sample(const Interval& interval, Rng& rng) {
  if (interval.high == interval.low) {
    return interval.low;
  }
  return std::uniform_real_distribution<double>(interval.low, interval.high)(rng);
}

Vec2 on_circle(double radius, double angle) { return radius * heading_vector(angle); }

class Spawner {
 public:
  Spawner(const EnvConfig& config, std::vector<AgentState>& agents)
      : config_(config), agents_(agents) {}

  bool clear(const Vec2& position, double radius) const {
    return std::all_of(agents_.begin(), agents_.end(), [&](const AgentState& other) {
      return (other.position - position).norm() - other.radius - radius >= config_.spawn_clearance;
    });
  }

  // Draws candidate start/goal pairs until the start is clear of every placed agent.
  template <typename Draw>
  std::pair<Vec2, Vec2> place(double radius, Draw&& draw) const {
    for (int attempt = 0; attempt < config_.spawn_attempts; ++attempt) {
      auto [start, goal] = draw();
      if (clear(start, radius)) {
        return {start, goal};
      }
    }
    throw ScenarioInfeasible("no clear spawn position after " +
                             std::to_string(config_.spawn_attempts) + " attempts");
  }

 private:
  const EnvConfig& config_;
  std::vector<AgentState>& agents_;
};

AgentState make_agent(const Vec2& start, const Vec2& goal, double radius) {
  AgentState agent;
  agent.position = start;
  agent.goal_position = goal;
  agent.radius = radius;
  const Vec2 to_goal = goal - start;
  agent.preferred_heading = std::atan2(to_goal.y(), to_goal.x());
  agent.heading = agent.preferred_heading;
  return agent;
}

}  // namespace

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::position_swap:
      return "position_swap";
    case ScenarioKind::circle_interaction:
      return "circle_interaction";
    case ScenarioKind::circle_crossing:
      return "circle_crossing";
    case ScenarioKind::random:
      return "random";
  }
  return "unknown";
}

ScenarioKind scenario_kind_from_string(std::string_view name) {
  for (auto kind : {ScenarioKind::position_swap, ScenarioKind::circle_interaction,
                    ScenarioKind::circle_crossing, ScenarioKind::random}) {
    if (to_string(kind) == name) {
      return kind;
    }
  }
  throw std::invalid_argument("unknown scenario kind: " + std::string(name));
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::running:
      return "running";
    case Outcome::goal:
      return "goal";
    case Outcome::collision:
      return "collision";
    case Outcome::timeout:
      return "timeout";
  }
  return "unknown";
}

ScenarioSpec ScenarioSpec::position_swap() { return ScenarioSpec{}; }

ScenarioSpec ScenarioSpec::circle_crossing(int humans) {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::circle_crossing;
  spec.human_count = humans;
  spec.proxemic_range = {0.3, 0.7};
  spec.time_limit = 50.0;
  return spec;
}

ScenarioSpec ScenarioSpec::circle_interaction(int humans) {
  ScenarioSpec spec = circle_crossing(humans);
  spec.kind = ScenarioKind::circle_interaction;
  return spec;
}

ScenarioSpec ScenarioSpec::random(int humans) {
  ScenarioSpec spec = circle_crossing(humans);
  spec.kind = ScenarioKind::random;
  return spec;
}

void ScenarioSpec::validate() const {
  if (human_count < 1) {
    throw std::invalid_argument("scenario needs at least one human");
  }
  if (!(circle_radius > 0.0)) {
    throw std::invalid_argument("circle radius must be positive");
  }
  if (!(speed_range.low > 0.0) || speed_range.high < speed_range.low) {
    throw std::invalid_argument("speed range must be a non-empty positive interval");
  }
  if (proxemic_range.low < 0.0 || proxemic_range.high < proxemic_range.low) {
    throw std::invalid_argument("proxemic range must be a non-empty non-negative interval");
  }
  if (!(time_limit > 0.0)) {
    throw std::invalid_argument("time limit must be positive");
  }
}

void PerturbationSpec::validate() const {
  if (!(sigma_obs >= 0.0) || !(sigma_head >= 0.0)) {
    throw std::invalid_argument("noise strengths must be non-negative");
  }
  if (!(sigma_vel >= 0.0 && sigma_vel <= 1.0)) {
    throw std::invalid_argument("sigma_vel must lie in [0, 1]");
  }
  if (!(vel_scale >= 1.0)) {
    throw std::invalid_argument("velocity scale must be >= 1");
  }
  if (extra_humans < 0) {
    throw std::invalid_argument("extra_humans must be non-negative");
  }
}

WorldState sample_initial_world(const ScenarioSpec& spec, const PerturbationSpec& perturbation,
                                const EnvConfig& config, std::uint64_t seed) {
  spec.validate();
  perturbation.validate();
  Rng rng = make_rng(seed, kSpawnStream);
  std::uniform_real_distribution<double> angle_dist(0.0, kTwoPi);
  const double radius = spec.circle_radius;

  WorldState world;
  auto& agents = world.agents;
  Spawner spawner(config, agents);

  auto antipodal = [&](double angle) {
    return std::make_pair(on_circle(radius, angle), on_circle(radius, angle + std::numbers::pi));
  };

  // Robot and the scenario's own humans.
  switch (spec.kind) {
    case ScenarioKind::position_swap: {
      const double angle = angle_dist(rng);
      const Vec2 human_start = on_circle(radius, angle);
      const Vec2 robot_start = -human_start;
      agents.push_back(make_agent(robot_start, human_start, config.robot_radius));
      agents.push_back(make_agent(human_start, robot_start, config.human_radius));
      for (int i = 1; i < spec.human_count; ++i) {
        auto [start, goal] = spawner.place(config.human_radius, [&] { return antipodal(angle_dist(rng)); });
        agents.push_back(make_agent(start, goal, config.human_radius));
      }
      break;
    }
    case ScenarioKind::circle_crossing: {
      auto [start, goal] = antipodal(angle_dist(rng));
      agents.push_back(make_agent(start, goal, config.robot_radius));
      for (int i = 0; i < spec.human_count; ++i) {
        auto [h_start, h_goal] =
            spawner.place(config.human_radius, [&] { return antipodal(angle_dist(rng)); });
        agents.push_back(make_agent(h_start, h_goal, config.human_radius));
      }
      break;
    }
    case ScenarioKind::circle_interaction: {
      // Robot on one of four fixed start-goal pairs; humans start around the robot's goal so
      // that every human has to cross the robot's path.
      const int pair = std::uniform_int_distribution<int>(0, 3)(rng);
      const double robot_angle = pair * std::numbers::pi / 2.0;
      auto [start, goal] = antipodal(robot_angle);
      agents.push_back(make_agent(start, goal, config.robot_radius));
      std::uniform_real_distribution<double> arc(-std::numbers::pi / 4.0, std::numbers::pi / 4.0);
      for (int i = 0; i < spec.human_count; ++i) {
        auto [h_start, h_goal] = spawner.place(
            config.human_radius, [&] { return antipodal(robot_angle + std::numbers::pi + arc(rng)); });
        agents.push_back(make_agent(h_start, h_goal, config.human_radius));
      }
      break;
    }
    case ScenarioKind::random: {
      std::uniform_real_distribution<double> coord(-radius, radius);
      auto draw = [&] {
        for (;;) {
          Vec2 start(coord(rng), coord(rng));
          Vec2 goal(coord(rng), coord(rng));
          if ((goal - start).norm() >= radius) {
            return std::make_pair(start, goal);
          }
        }
      };
      auto [start, goal] = draw();
      agents.push_back(make_agent(start, goal, config.robot_radius));
      for (int i = 0; i < spec.human_count; ++i) {
        auto [h_start, h_goal] = spawner.place(config.human_radius, draw);
        agents.push_back(make_agent(h_start, h_goal, config.human_radius));
      }
      break;
    }
  }

  // Additional humans turn any scenario into a crossing around the same circle.
  for (int i = 0; i < perturbation.extra_humans; ++i) {
    auto [start, goal] = spawner.place(config.human_radius, [&] { return antipodal(angle_dist(rng)); });
    agents.push_back(make_agent(start, goal, config.human_radius));
  }

  AgentState& robot = agents.front();
  robot.preferred_speed = config.robot_preferred_speed;
  robot.proxemic_radius = 0.0;
  for (std::size_t i = 1; i < agents.size(); ++i) {
    agents[i].preferred_speed = sample(spec.speed_range, rng) * perturbation.vel_scale;
    agents[i].proxemic_radius = sample(spec.proxemic_range, rng);
  }
  return world;
}

Observation make_observation(const WorldState& world, const EnvConfig& config) {
  Observation obs;
  obs.features = Eigen::VectorXd::Zero(observation_size(config));
  const AgentState& robot = world.robot();
  const Vec2 to_goal = robot.goal_position - robot.position;
  obs.features[0] = to_goal.norm();
  obs.features[1] = wrap_angle(std::atan2(to_goal.y(), to_goal.x()) - robot.heading);
  obs.features[2] = robot.velocity.norm();
  obs.features[3] = wrap_angle(robot.heading);
  obs.features[4] = robot.radius;

  std::vector<std::size_t> order(world.human_count());
  std::iota(order.begin(), order.end(), std::size_t{1});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return (world.agents[a].position - robot.position).squaredNorm() <
           (world.agents[b].position - robot.position).squaredNorm();
  });
  const std::size_t visible = std::min<std::size_t>(order.size(), config.max_humans);
  for (std::size_t slot = 0; slot < visible; ++slot) {
    const AgentState& human = world.agents[order[slot]];
    const Vec2 rel_pos = to_frame(human.position - robot.position, robot.heading);
    const Vec2 rel_vel = to_frame(human.velocity - robot.velocity, robot.heading);
    const Eigen::Index base = kRobotObservationSize + static_cast<Eigen::Index>(slot) * kHumanObservationSize;
    obs.features[base + 0] = rel_pos.x();
    obs.features[base + 1] = rel_pos.y();
    obs.features[base + 2] = rel_vel.x();
    obs.features[base + 3] = rel_vel.y();
    obs.features[base + 4] = human.radius;
  }
  return obs;
}

Observation apply_observation_noise(const Observation& obs, double sigma_obs, Rng& rng) {
  if (sigma_obs == 0.0) {
    return obs;
  }
  Observation noisy = obs;
  std::normal_distribution<double> noise(0.0, sigma_obs);
  for (Eigen::Index i = 0; i < noisy.features.size(); ++i) {
    noisy.features[i] += noise(rng);
  }
  return noisy;
}

ActionCommand apply_action_noise(const ActionCommand& action, double sigma_head, double sigma_vel,
                                 Rng& rng) {
  ActionCommand noisy = action;
  noisy.speed = std::max(0.0, noisy.speed);
  if (sigma_head > 0.0) {
    noisy.delta_heading += std::normal_distribution<double>(0.0, sigma_head)(rng);
  }
  if (sigma_vel > 0.0) {
    noisy.speed *= std::uniform_real_distribution<double>(1.0 - sigma_vel, 1.0)(rng);
  }
  return noisy;
}

ActionCommand project_action(const ActionCommand& action, const EnvConfig& config) {
  return {std::clamp(action.speed, 0.0, config.robot_max_speed),
          std::clamp(action.delta_heading, -config.max_delta_heading, config.max_delta_heading)};
}

double compute_reward(const WorldState& world, const ActionCommand& action, const StepInfo& info,
                      const RewardConfig& reward) {
  switch (info.outcome) {
    case Outcome::goal:
      return reward.goal_bonus;
    case Outcome::collision:
      return -reward.collision_penalty;
    default:
      break;
  }
  double r = -reward.time_penalty;
  r += reward.progress_gain * (info.previous_goal_distance - info.goal_distance);

  const AgentState& robot = world.robot();
  double mean_preferred_speed = 0.0;
  for (std::size_t i = 1; i < world.agents.size(); ++i) {
    const AgentState& human = world.agents[i];
    mean_preferred_speed += human.preferred_speed;
    const double d = std::max(0.0, gap_distance(robot, human));
    if (human.proxemic_radius > 0.0 && d < human.proxemic_radius) {
      r -= reward.proxemic_gain * (1.0 - d / human.proxemic_radius);
    }
  }
  if (world.human_count() > 0) {
    mean_preferred_speed /= static_cast<double>(world.human_count());
    r -= reward.speed_gain * std::max(0.0, action.speed - mean_preferred_speed);
  }
  return r;
}

RobotView robot_view(const WorldState& world, const EnvConfig& config) {
  const AgentState& robot = world.robot();
  RobotView view;
  view.position = robot.position;
  view.velocity = robot.velocity;
  view.heading = robot.heading;
  view.radius = robot.radius;
  view.goal = robot.goal_position;
  view.preferred_speed = robot.preferred_speed;
  view.max_speed = config.robot_max_speed;
  return view;
}

std::vector<HumanView> human_views(const WorldState& world) {
  std::vector<HumanView> humans;
  humans.reserve(world.human_count());
  for (std::size_t i = 1; i < world.agents.size(); ++i) {
    const AgentState& a = world.agents[i];
    humans.push_back({a.position, a.velocity, a.radius});
  }
  return humans;
}

CrowdEnv::CrowdEnv(EnvConfig config) : config_(std::move(config)) {}

Observation CrowdEnv::reset(const ScenarioSpec& spec, const PerturbationSpec& perturbation,
                            std::uint64_t seed) {
  spec_ = spec;
  perturbation_ = perturbation;
  world_ = sample_initial_world(spec, perturbation, config_, seed);
  obs_rng_ = make_rng(seed, kObservationStream);
  action_rng_ = make_rng(seed, kActionStream);
  done_ = false;
  return observe();
}

Observation CrowdEnv::observe() {
  return apply_observation_noise(make_observation(world_, config_), perturbation_.sigma_obs,
                                 obs_rng_);
}

StepResult CrowdEnv::step(const ActionCommand& action) {
  if (done_) {
    throw std::logic_error("step() called on a terminated episode; call reset() first");
  }
  if (!std::isfinite(action.speed) || !std::isfinite(action.delta_heading)) {
    throw std::invalid_argument("action contains non-finite entries");
  }

  StepInfo info;
  const ActionCommand executed = apply_action_noise(project_action(action, config_),
                                                    perturbation_.sigma_head,
                                                    perturbation_.sigma_vel, action_rng_);
  info.applied_action = executed;
  info.previous_goal_distance = (world_.robot().goal_position - world_.robot().position).norm();

  // Humans plan on the observable state at time t.
  const std::size_t n = world_.agents.size();
  std::vector<OrcaAgentView> views(n);
  for (std::size_t i = 0; i < n; ++i) {
    const AgentState& a = world_.agents[i];
    views[i].position = a.position;
    views[i].velocity = a.velocity;
    views[i].radius = a.radius;
  }
  std::vector<Vec2> human_velocities(n, Vec2::Zero());
  std::vector<OrcaAgentView> neighbors;
  neighbors.reserve(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    const AgentState& human = world_.agents[i];
    OrcaAgentView self = views[i];
    self.max_speed = human.preferred_speed;
    self.preferred_velocity =
        goal_directed_velocity(human.position, human.goal_position, human.preferred_speed, config_.dt);
    neighbors.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) {
        neighbors.push_back(views[j]);
      }
    }
    human_velocities[i] = compute_orca_velocity(self, neighbors, config_.orca_time_horizon, config_.dt);
  }

  AgentState& robot = world_.agents.front();
  robot.heading = wrap_angle(robot.heading + executed.delta_heading);
  robot.velocity = executed.speed * heading_vector(robot.heading);
  robot.position += robot.velocity * config_.dt;
  for (std::size_t i = 1; i < n; ++i) {
    AgentState& human = world_.agents[i];
    human.velocity = human_velocities[i];
    human.position += human.velocity * config_.dt;
    const Vec2 to_goal = human.goal_position - human.position;
    if (to_goal.squaredNorm() > 0.0) {
      human.preferred_heading = std::atan2(to_goal.y(), to_goal.x());
    }
  }
  world_.time_step += 1;
  world_.elapsed_time = world_.time_step * config_.dt;

  info.goal_distance = (robot.goal_position - robot.position).norm();
  info.min_human_distance = std::numeric_limits<double>::infinity();
  bool collided = false;
  for (std::size_t i = 1; i < n; ++i) {
    const AgentState& human = world_.agents[i];
    const double d = gap_distance(robot, human);
    info.min_human_distance = std::min(info.min_human_distance, d);
    if (d < 0.0) {
      collided = true;
    }
    if (d < human.proxemic_radius) {
      info.proxemic_violation = true;
    }
  }

  if (collided) {
    info.outcome = Outcome::collision;
  } else if (info.goal_distance < robot.radius) {
    info.outcome = Outcome::goal;
  } else if (world_.elapsed_time >= spec_.time_limit - 1e-9) {
    info.outcome = Outcome::timeout;
  }

  StepResult result;
  result.info = info;
  result.reward = compute_reward(world_, executed, info, config_.reward);
  result.done = info.outcome != Outcome::running;
  done_ = result.done;
  result.observation = observe();
  return result;
}

}  // namespace safenav

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

#ifndef SAFENAV_CROWD_SIM_HPP
#define SAFENAV_CROWD_SIM_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "safenav/geometry.hpp"
#include "safenav/orca.hpp"

namespace safenav {

using Rng = std::mt19937_64;

/// Derives an independent generator for `stream` from a base seed.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Full state of one agent. Only position, velocity and radius are ever observable by others.
struct AgentState {
  Vec2 position{Vec2::Zero()};
  Vec2 velocity{Vec2::Zero()};
  double radius{0.3};
  Vec2 goal_position{Vec2::Zero()};
  double preferred_speed{1.0};
  double preferred_heading{0.0};
  double proxemic_radius{0.0};
  // Body orientation. Only integrated for the robot; humans are holonomic.
  double heading{0.0};
};

struct WorldState {
  std::vector<AgentState> agents;  // index 0 is the robot
  int time_step{0};
  double elapsed_time{0.0};

  const AgentState& robot() const { return agents.front(); }
  std::size_t human_count() const { return agents.size() - 1; }
};

struct Observation {
  Eigen::VectorXd features;
};

struct ActionCommand {
  double speed{0.0};
  double delta_heading{0.0};
};

enum class ScenarioKind { position_swap, circle_interaction, circle_crossing, random };

std::string_view to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(std::string_view name);

struct Interval {
  double low{0.0};
  double high{0.0};
};

struct ScenarioSpec {
  ScenarioKind kind{ScenarioKind::position_swap};
  int human_count{1};
  double circle_radius{7.0};
  Interval speed_range{0.5, 1.0};
  Interval proxemic_range{0.3, 0.4};
  double time_limit{30.0};

  /// One human swapping places with the robot across a 7 m circle.
  static ScenarioSpec position_swap();
  static ScenarioSpec circle_crossing(int humans);
  static ScenarioSpec circle_interaction(int humans);
  static ScenarioSpec random(int humans);

  void validate() const;
};

struct PerturbationSpec {
  double sigma_obs{0.0};
  double sigma_head{0.0};
  double sigma_vel{0.0};
  double vel_scale{1.0};
  int extra_humans{0};

  bool is_identity() const {
    return sigma_obs == 0.0 && sigma_head == 0.0 && sigma_vel == 0.0 && vel_scale == 1.0 &&
           extra_humans == 0;
  }
  void validate() const;
};

struct RewardConfig {
  double goal_bonus{5.0};
  double collision_penalty{5.0};
  double time_penalty{0.01};
  double progress_gain{1.0};
  double proxemic_gain{0.25};
  double speed_gain{0.05};
};

struct EnvConfig {
  double dt{0.25};
  double robot_radius{0.3};
  double human_radius{0.3};
  double robot_max_speed{1.0};
  double robot_preferred_speed{1.0};
  double max_delta_heading{0.7853981633974483};
  int max_humans{6};
  double orca_time_horizon{kDefaultOrcaTimeHorizon};
  double spawn_clearance{0.2};
  int spawn_attempts{100};
  RewardConfig reward{};
};

/// Size of the robot block at the front of every observation.
inline constexpr int kRobotObservationSize = 5;
/// Size of each per-human block.
inline constexpr int kHumanObservationSize = 5;

inline int observation_size(const EnvConfig& config) {
  return kRobotObservationSize + kHumanObservationSize * config.max_humans;
}

enum class Outcome { running, goal, collision, timeout };

std::string_view to_string(Outcome outcome);

struct StepInfo {
  Outcome outcome{Outcome::running};
  bool proxemic_violation{false};
  // Surface-to-surface distance to the closest human after the step.
  double min_human_distance{0.0};
  double previous_goal_distance{0.0};
  double goal_distance{0.0};
  // Command actually executed after projection and noise.
  ActionCommand applied_action{};
};

struct StepResult {
  Observation observation;
  double reward{0.0};
  bool done{false};
  StepInfo info;
};

class ScenarioInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Surface-to-surface distance between two agents (negative when overlapping).
inline double gap_distance(const AgentState& a, const AgentState& b) {
  return (a.position - b.position).norm() - a.radius - b.radius;
}

/// Samples the initial world for a scenario. Deterministic in (spec, perturbation, seed).
WorldState sample_initial_world(const ScenarioSpec& spec, const PerturbationSpec& perturbation,
                                const EnvConfig& config, std::uint64_t seed);

/// Noise-free ego-centric observation of the robot.
Observation make_observation(const WorldState& world, const EnvConfig& config);

Observation apply_observation_noise(const Observation& obs, double sigma_obs, Rng& rng);

ActionCommand apply_action_noise(const ActionCommand& action, double sigma_head, double sigma_vel,
                                 Rng& rng);

/// Clips a raw command to the robot's actuation limits.
ActionCommand project_action(const ActionCommand& action, const EnvConfig& config);

double compute_reward(const WorldState& world, const ActionCommand& action, const StepInfo& info,
                      const RewardConfig& reward);

/// Observable inputs of the cautious fallback, taken from the world state.
RobotView robot_view(const WorldState& world, const EnvConfig& config);
std::vector<HumanView> human_views(const WorldState& world);

/// Episodic crowd environment: one robot driven by external commands, humans driven by ORCA.
/// Not thread-safe; use one instance per worker.
class CrowdEnv {
 public:
  explicit CrowdEnv(EnvConfig config = {});

  Observation reset(const ScenarioSpec& spec, const PerturbationSpec& perturbation,
                    std::uint64_t seed);
  StepResult step(const ActionCommand& action);

  const WorldState& world() const { return world_; }
  const EnvConfig& config() const { return config_; }
  const ScenarioSpec& scenario() const { return spec_; }
  const PerturbationSpec& perturbation() const { return perturbation_; }
  bool done() const { return done_; }

 private:
  Observation observe();

  EnvConfig config_;
  ScenarioSpec spec_{};
  PerturbationSpec perturbation_{};
  WorldState world_{};
  Rng obs_rng_{};
  Rng action_rng_{};
  bool done_{true};
};

}  // namespace safenav

#endif  // SAFENAV_CROWD_SIM_HPP

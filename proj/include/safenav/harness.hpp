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


#ifndef SAFENAV_HARNESS_HPP
#define SAFENAV_HARNESS_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "safenav/checkpoint.hpp"
#include "safenav/crowd_sim.hpp"
#include "safenav/orca.hpp"
#include "safenav/safe_action.hpp"
#include "safenav/uncertainty.hpp"

namespace safenav {

enum class UncertaintyMode { none, dropout, ensemble };

std::string_view to_string(UncertaintyMode mode);
UncertaintyMode uncertainty_mode_from_string(std::string_view name);

/// The policies an evaluation runs with. Control always comes from `members[0]`.
struct PolicyBundle {
  std::vector<Policy> members;
  FeatureBounds bounds;

  static PolicyBundle single(const Checkpoint& checkpoint);
  /// Throws std::invalid_argument for fewer than two members or mismatched architectures.
  static PolicyBundle ensemble(std::span<const Checkpoint> checkpoints);

  const Policy& control() const { return members.front(); }
};

struct EpisodeOptions {
  UncertaintyMode uncertainty{UncertaintyMode::none};
  int mc_samples{20};
  double rate_test{0.5};
  bool gate{false};
  PocThresholds thresholds{};
  ApproachRule approach_rule{ApproachRule::closing};
  bool record_trace{false};
  // The fallback reads exact human states; set to false to feed it the noisy observation instead.
  bool fallback_uses_true_state{true};
  double gamma{0.99};  // discount of the reported return

  void validate() const;
};

struct AgentSnapshot {
  Vec2 position{Vec2::Zero()};
  Vec2 velocity{Vec2::Zero()};
  double radius{0.0};
};

struct StepRecord {
  int t{0};
  double time{0.0};
  ActionCommand action;  // command sent to the environment
  std::vector<AgentSnapshot> agents;  // observable states after the step
  UncertaintyEstimate estimate;
  UncertaintyEstimate windowed;
  PocConditions conditions;
  ControlMode mode{ControlMode::learned};
  double reward{0.0};
  double nearest_distance{0.0};
};

struct EpisodeMetrics {
  std::uint64_t seed{0};
  Outcome outcome{Outcome::timeout};
  double episode_return{0.0};  // sum of gamma^t r_t
  int proxemic_violations{0};
  double min_human_distance{0.0};
  int steps{0};
  int cautious_steps{0};
  // Sums of the per-step estimates, for pooled means.
  UncertaintyEstimate uncertainty_sum;
  int uncertainty_steps{0};
  std::vector<StepRecord> trace;
};

/// One evaluation episode with deterministic (mean) control actions.
EpisodeMetrics run_episode(const PolicyBundle& bundle, const ScenarioSpec& scenario,
                           const PerturbationSpec& perturbation, const EnvConfig& env,
                           std::uint64_t seed, const EpisodeOptions& options);

enum class Execution { serial, parallel };

/// Runs one episode per seed. Both execution modes return identical results in seed order.
std::vector<EpisodeMetrics> run_episodes(const PolicyBundle& bundle, const ScenarioSpec& scenario,
                                         const PerturbationSpec& perturbation, const EnvConfig& env,
                                         std::span<const std::uint64_t> seeds,
                                         const EpisodeOptions& options,
                                         Execution execution = Execution::parallel);

/// Seeds of `episodes` evaluation episodes derived from one base seed.
std::vector<std::uint64_t> evaluation_seeds(std::uint64_t base_seed, int episodes);

struct EvaluationSummary {
  int episodes{0};
  double goal_pct{0.0};
  double collision_pct{0.0};
  double timeout_pct{0.0};
  double proxemic_violations_mean{0.0};
  int proxemic_violations_total{0};
  double return_mean{0.0};
  double return_std{0.0};
  double min_distance_mean{0.0};
};

EvaluationSummary summarize(std::span<const EpisodeMetrics> episodes);

/// Evaluates `episodes` episodes for every base seed and aggregates over all of them.
EvaluationSummary run_evaluation(const PolicyBundle& bundle, const ScenarioSpec& scenario,
                                 const EnvConfig& env, int episodes,
                                 std::span<const std::uint64_t> seeds,
                                 std::vector<EpisodeMetrics>* records = nullptr);

enum class SweepAxis { obs_noise, action_noise, velocity_scale, human_count };

std::string_view to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(std::string_view name);

/// Default grid of an axis: noise 0..2 in steps of 0.2, speed scale 1..8, agent count 2..7.
std::vector<double> default_grid(SweepAxis axis);

/// Perturbation applied at a given strength. Agent counts include the robot, so 2 is the
/// unperturbed one-human scenario.
PerturbationSpec perturbation_at(SweepAxis axis, double strength, const PerturbationSpec& base = {});

/// Tracked uncertainty kinds in output order.
inline constexpr int kUncertaintyKinds = 5;
std::string_view uncertainty_kind_name(int kind);
double uncertainty_kind_value(const UncertaintyEstimate& estimate, int kind);

struct SweepPoint {
  double strength{0.0};
  std::array<double, kUncertaintyKinds> mean_uncertainty{};
  int collisions{0};
  int goals{0};
  int episodes{0};
  int steps{0};
};

struct SweepResult {
  SweepAxis axis{SweepAxis::obs_noise};
  UncertaintyMode uncertainty{UncertaintyMode::dropout};
  std::vector<SweepPoint> points;
};

/// Runs `episodes` episodes per grid point under matching seeds and pools step-wise uncertainty
/// over all steps of all episodes.
SweepResult perturbation_sweep(const PolicyBundle& bundle, const ScenarioSpec& base_scenario,
                               const EnvConfig& env, SweepAxis axis, std::span<const double> grid,
                               std::span<const std::uint64_t> seeds, const EpisodeOptions& options,
                               std::vector<std::vector<EpisodeMetrics>>* records = nullptr);

/// Pools sweeps over the same grid (one per policy seed), weighting each point by its step count.
SweepResult merge_sweeps(std::span<const SweepResult> sweeps);

/// (1/u0) * (u_max - u0) / (s_max - s0). Returns nullopt when u0 is zero.
std::optional<double> normalized_rate_of_change(double u_at_zero, double u_at_max,
                                                double strength_zero, double strength_max);

/// Rate of change per uncertainty kind between the first and last sweep points.
std::array<std::optional<double>, kUncertaintyKinds> sweep_rates(const SweepResult& sweep);

struct SafeActionGroup {
  std::uint64_t seed{0};
  int episodes{0};
  int collisions_off{0};
  int collisions_on{0};
  int cautious_steps{0};
  std::optional<double> prevented_pct;  // nullopt when the ungated arm had no collisions
};

struct SafeActionComparison {
  std::vector<SafeActionGroup> groups;
  int collisions_off{0};
  int collisions_on{0};
  std::optional<double> prevented_mean;
  double prevented_std{0.0};
};

/// Matched-seed gated and ungated arms. Each base seed forms one group.
SafeActionComparison safe_action_comparison(const PolicyBundle& bundle, const ScenarioSpec& scenario,
                                            const PerturbationSpec& perturbation,
                                            const EnvConfig& env, int episodes,
                                            std::span<const std::uint64_t> seeds,
                                            const EpisodeOptions& gated_options);

}  // namespace safenav

#endif  // SAFENAV_HARNESS_HPP

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

#ifndef SAFENAV_TRAINER_HPP
#define SAFENAV_TRAINER_HPP

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "safenav/checkpoint.hpp"
#include "safenav/crowd_sim.hpp"
#include "safenav/feature_bounds.hpp"
#include "safenav/policy.hpp"

namespace safenav {

/// PPO settings. Defaults follow the ODV-PPO hyperparameter table where it is explicit and common
/// PPO defaults elsewhere.
struct TrainConfig {
  std::int64_t total_timesteps{300'000};
  double lambda_sigma{0.3};
  Vector2d target_variance{Vector2d::Zero()};
  double learning_rate{2.5e-4};
  double clip_epsilon{0.2};
  double gae_lambda{0.95};
  double gamma{0.99};
  int epochs_per_update{4};
  int num_steps{128};
  int batch_size{128};
  int num_envs{8};
  int sequence_length{16};
  double entropy_coef{0.0};
  double value_coef{0.5};
  double max_grad_norm{0.5};
  double adam_epsilon{1e-5};
  double dropout_train{0.1};
  bool variance_loss{true};
  std::uint64_t seed{1};
  std::optional<std::uint64_t> env_seed;
  int checkpoint_interval{0};  // updates between checkpoints; 0 disables
  PolicyArchitecture architecture{};
  PolicyInit init{};

  std::uint64_t resolved_env_seed() const { return env_seed.value_or(seed * 7919 + 104729); }
  void validate() const;
};

/// One rollout of `num_steps` steps for each of `num_envs` environments. Entry (step, env) lives
/// at column `step * num_envs + env`.
struct RolloutBuffer {
  int num_steps{0};
  int num_envs{0};
  Eigen::MatrixXd observations;
  Eigen::MatrixXd actions;
  Eigen::VectorXd log_probs;
  Eigen::VectorXd rewards;
  Eigen::VectorXd values;
  Eigen::VectorXd dones;           // episode ended at this step
  Eigen::VectorXd episode_starts;  // recurrent state was reset before this step
  RecurrentState states;           // snapshot before each step, one column per entry
  Eigen::MatrixXd features;
  Eigen::VectorXd last_values;     // bootstrap value per env
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
  bool advantages_ready{false};

  RolloutBuffer() = default;
  RolloutBuffer(int steps, int envs, int obs_size, int hidden);

  Eigen::Index size() const { return static_cast<Eigen::Index>(num_steps) * num_envs; }
  Eigen::Index index(int step, int env) const { return static_cast<Eigen::Index>(step) * num_envs + env; }
  void clear();
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Generalized advantage estimation for one stream. `dones[t]` marks an episode ending at step t.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const double> dones, double last_value, double gamma,
                      double gae_lambda);

void compute_gae(RolloutBuffer& buffer, double gamma, double gae_lambda);

/// Annealed action-variance loss (t/T) * lambda * mean_i 0.5 * ||sigma_i^2 - target||^2.
/// `sigma_sq_batch` is B x 2.
double variance_loss(const Eigen::MatrixX2d& sigma_sq_batch, const Vector2d& sigma_sq_target,
                     double lambda_sigma, double t, double total);

/// Sequences of the rollout used for one gradient step.
struct Minibatch {
  SequenceBatch sequences;
  std::vector<Eigen::MatrixXd> actions;         // L x (2 x B)
  std::vector<Eigen::RowVectorXd> old_log_probs;
  std::vector<Eigen::RowVectorXd> advantages;
  std::vector<Eigen::RowVectorXd> returns;
};

struct LossSettings {
  double clip_epsilon{0.2};
  double value_coef{0.5};
  double entropy_coef{0.0};
  double lambda_sigma{0.3};
  Vector2d target_variance{Vector2d::Zero()};
  double progress{1.0};  // t / T
  double dropout_rate{0.1};
  bool normalize_advantages{true};
};

struct LossBreakdown {
  double total{0.0};
  double policy{0.0};
  double variance{0.0};
  double value{0.0};
  double entropy{0.0};
  double clip_fraction{0.0};
  double approx_kl{0.0};
};

/// Clipped surrogate + variance loss + value loss - entropy bonus. When `gradient` is non-null
/// it receives d total / d parameters. Dropout masks come from `mask_rng`.
LossBreakdown ppo_loss(const Policy& policy, const Minibatch& batch, const LossSettings& settings,
                       Rng& mask_rng, Eigen::VectorXd* gradient);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t steps{0};
};

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient, AdamState& state,
               double learning_rate, double epsilon);

/// Rescales `gradient` so its Euclidean norm is at most `max_norm`. Returns the original norm.
double clip_gradient_norm(Eigen::VectorXd& gradient, double max_norm);

struct UpdateStats {
  double policy_loss{0.0};
  double variance_loss{0.0};
  double value_loss{0.0};
  double entropy{0.0};
  double clip_fraction{0.0};
  double approx_kl{0.0};
  double grad_norm{0.0};
  double mean_action_variance{0.0};
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CurvePoint {
  std::int64_t timestep{0};
  double mean_return{0.0};
  double goal_rate{0.0};
  double collision_rate{0.0};
  double timeout_rate{0.0};
  int episodes{0};
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<CurvePoint> curve;
  std::vector<UpdateStats> updates;
};

/// On-policy ODV-PPO trainer owning its environments, policy and optimizer state.
class Trainer {
 public:
  Trainer(TrainConfig config, ScenarioSpec scenario, PerturbationSpec perturbation = {},
          EnvConfig env_config = {});

  /// Fills a fresh buffer with `n_steps` steps per environment at the training dropout rate.
  RolloutBuffer collect_rollouts(int n_steps);

  /// Gradient epochs over a buffer whose advantages have been computed. Clears the buffer.
  UpdateStats update(RolloutBuffer& buffer);

  /// Runs collect/update cycles until the configured number of timesteps is reached.
  TrainResult train(const std::optional<std::filesystem::path>& checkpoint_dir = std::nullopt,
                    const std::function<void(const CurvePoint&)>& on_progress = {});

  Policy& policy() { return policy_; }
  const Policy& policy() const { return policy_; }
  const FeatureBounds& feature_bounds() const { return bounds_; }
  std::int64_t timesteps() const { return timesteps_; }
  const TrainConfig& config() const { return config_; }
  Checkpoint checkpoint() const;

 private:
  struct EpisodeRecord {
    Outcome outcome;
    double discounted_return;
  };

  void reset_env(int env);
  Minibatch make_minibatch(const RolloutBuffer& buffer, std::span<const int> chunks) const;
  CurvePoint curve_point() const;

  TrainConfig config_;
  ScenarioSpec scenario_;
  PerturbationSpec perturbation_;
  EnvConfig env_config_;
  Policy policy_;
  FeatureBounds bounds_;
  AdamState adam_;
  Rng rng_;
  std::vector<CrowdEnv> envs_;
  std::vector<Observation> last_obs_;
  std::vector<std::int64_t> episode_counters_;
  std::vector<double> running_return_;
  std::vector<int> running_length_;
  RecurrentState states_;
  Eigen::VectorXd start_flags_;
  std::deque<EpisodeRecord> recent_episodes_;
  std::int64_t timesteps_{0};
};

/// Seed for episode `episode` of environment `env`.
std::uint64_t episode_seed(std::uint64_t base, int env, std::int64_t episode);

TrainResult train(const TrainConfig& config, const ScenarioSpec& scenario,
                  const std::optional<std::filesystem::path>& checkpoint_dir = std::nullopt);

struct SeedPair {
  std::uint64_t init_seed{0};
  std::uint64_t env_seed{0};
  bool operator==(const SeedPair&) const = default;
};

/// Throws std::invalid_argument if any (init, env) pair repeats or fewer than two are given.
void validate_ensemble_seeds(std::span<const SeedPair> seeds);

/// Seed pairs derived from `config` for K members.
std::vector<SeedPair> ensemble_seed_pairs(const TrainConfig& config, int members);

struct EnsembleResult {
  std::vector<TrainResult> members;
  std::vector<std::string> failures;
  bool usable() const { return failures.empty() && members.size() >= 2; }
};

/// Trains K members that differ only in weight-initialization and environment seeds.
EnsembleResult train_ensemble(const TrainConfig& config, const ScenarioSpec& scenario,
                              std::span<const SeedPair> seeds,
                              const std::optional<std::filesystem::path>& checkpoint_dir = std::nullopt,
                              const EnvConfig& env = {});

}  // namespace safenav

#endif  // SAFENAV_TRAINER_HPP

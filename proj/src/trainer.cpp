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

#include "safenav/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace safenav {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr std::size_t kCurveWindow = 50;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::filesystem::path dump_minibatch(const Minibatch& batch, const LossBreakdown& loss,
                                     const std::filesystem::path& dir) {
  nlohmann::json j;
  j["loss"] = {{"total", loss.total},     {"policy", loss.policy}, {"variance", loss.variance},
               {"value", loss.value},     {"entropy", loss.entropy}};
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t t = 0; t < batch.sequences.observations.size(); ++t) {
    const auto& obs = batch.sequences.observations[t];
    steps.push_back({{"obs_max_abs", obs.cwiseAbs().maxCoeff()},
                     {"obs_finite", obs.allFinite()},
                     {"actions", std::vector<double>(batch.actions[t].data(),
                                                     batch.actions[t].data() + batch.actions[t].size())},
                     {"old_log_probs", std::vector<double>(batch.old_log_probs[t].data(),
                                                           batch.old_log_probs[t].data() +
                                                               batch.old_log_probs[t].size())},
                     {"advantages", std::vector<double>(batch.advantages[t].data(),
                                                        batch.advantages[t].data() +
                                                            batch.advantages[t].size())},
                     {"returns", std::vector<double>(batch.returns[t].data(),
                                                     batch.returns[t].data() + batch.returns[t].size())}});
  }
  j["steps"] = std::move(steps);
  std::filesystem::create_directories(dir);
  const auto path = dir / "diverged_minibatch.json";
  std::ofstream(path) << j.dump(2);
  return path;
}

}  // namespace

void TrainConfig::validate() const {
  if (total_timesteps <= 0) {
    throw std::invalid_argument("total_timesteps must be positive");
  }
  if (lambda_sigma < 0.0) {
    throw std::invalid_argument("lambda_sigma must be non-negative");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("gamma must lie in [0, 1)");
  }
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
    throw std::invalid_argument("gae_lambda must lie in [0, 1]");
  }
  if (num_steps <= 0 || num_envs <= 0 || epochs_per_update <= 0 || sequence_length <= 0) {
    throw std::invalid_argument("rollout sizes must be positive");
  }
  if (num_steps % sequence_length != 0) {
    throw std::invalid_argument("num_steps must be a multiple of sequence_length");
  }
  if (batch_size % sequence_length != 0 || batch_size <= 0) {
    throw std::invalid_argument("batch_size must be a positive multiple of sequence_length");
  }
  if (batch_size > num_steps * num_envs) {
    throw std::invalid_argument("batch_size exceeds the rollout size");
  }
  if (!(dropout_train >= 0.0 && dropout_train < 1.0)) {
    throw std::invalid_argument("dropout_train must lie in [0, 1)");
  }
  if (!(learning_rate > 0.0) || !(clip_epsilon > 0.0) || !(max_grad_norm > 0.0)) {
    throw std::invalid_argument("learning rate, clip range and gradient clip must be positive");
  }
}

RolloutBuffer::RolloutBuffer(int steps, int envs, int obs_size, int hidden)
    : num_steps(steps), num_envs(envs) {
  const Index n = static_cast<Index>(steps) * envs;
  observations = MatrixXd::Zero(obs_size, n);
  actions = MatrixXd::Zero(kActionSize, n);
  log_probs = VectorXd::Zero(n);
  rewards = VectorXd::Zero(n);
  values = VectorXd::Zero(n);
  dones = VectorXd::Zero(n);
  episode_starts = VectorXd::Zero(n);
  states = RecurrentState::zeros(hidden, static_cast<int>(n));
  features = MatrixXd::Zero(hidden, n);
  last_values = VectorXd::Zero(envs);
}

void RolloutBuffer::clear() {
  *this = RolloutBuffer();
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const double> dones, double last_value, double gamma,
                      double gae_lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw std::invalid_argument("rewards, values and dones must have equal length");
  }
  GaeResult result;
  result.advantages.assign(n, 0.0);
  result.returns.assign(n, 0.0);
  double last_gae = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double next_value = k + 1 < n ? values[k + 1] : last_value;
    const double not_done = 1.0 - dones[k];
    const double delta = rewards[k] + gamma * next_value * not_done - values[k];
    last_gae = delta + gamma * gae_lambda * not_done * last_gae;
    result.advantages[k] = last_gae;
    result.returns[k] = last_gae + values[k];
  }
  return result;
}

void compute_gae(RolloutBuffer& buffer, double gamma, double gae_lambda) {
  const Index n = buffer.size();
  buffer.advantages = VectorXd::Zero(n);
  buffer.returns = VectorXd::Zero(n);
  std::vector<double> rewards(buffer.num_steps), values(buffer.num_steps), dones(buffer.num_steps);
  for (int e = 0; e < buffer.num_envs; ++e) {
    for (int s = 0; s < buffer.num_steps; ++s) {
      const Index i = buffer.index(s, e);
      rewards[s] = buffer.rewards[i];
      values[s] = buffer.values[i];
      dones[s] = buffer.dones[i];
    }
    const GaeResult gae = compute_gae(rewards, values, dones, buffer.last_values[e], gamma, gae_lambda);
    for (int s = 0; s < buffer.num_steps; ++s) {
      const Index i = buffer.index(s, e);
      buffer.advantages[i] = gae.advantages[s];
      buffer.returns[i] = gae.returns[s];
    }
  }
  buffer.advantages_ready = true;
}

double variance_loss(const Eigen::MatrixX2d& sigma_sq_batch, const Vector2d& sigma_sq_target,
                     double lambda_sigma, double t, double total) {
  if (sigma_sq_batch.rows() < 1) {
    throw std::invalid_argument("variance loss needs a non-empty batch");
  }
  if (!(total > 0.0) || t > total) {
    throw std::invalid_argument("variance loss needs 0 < T and t <= T");
  }
  double sum = 0.0;
  for (Index i = 0; i < sigma_sq_batch.rows(); ++i) {
    sum += 0.5 * (sigma_sq_batch.row(i).transpose() - sigma_sq_target).squaredNorm();
  }
  return (t / total) * lambda_sigma * sum / static_cast<double>(sigma_sq_batch.rows());
}

LossBreakdown ppo_loss(const Policy& policy, const Minibatch& batch, const LossSettings& settings,
                       Rng& mask_rng, Eigen::VectorXd* gradient) {
  const SequenceForward fwd =
      policy.forward_sequence(batch.sequences, settings.dropout_rate, mask_rng, gradient != nullptr);
  const Index L = static_cast<Index>(fwd.action_mean.size());
  const Index B = fwd.action_mean.front().cols();
  const double n = static_cast<double>(L * B);

  double adv_mean = 0.0;
  double adv_std = 1.0;
  if (settings.normalize_advantages) {
    double sum = 0.0;
    double sq = 0.0;
    for (const auto& a : batch.advantages) {
      sum += a.sum();
      sq += a.squaredNorm();
    }
    adv_mean = sum / n;
    const double var = n > 1.0 ? std::max(0.0, (sq - n * adv_mean * adv_mean) / (n - 1.0)) : 0.0;
    adv_std = std::sqrt(var) + 1e-8;
  }

  const double variance_coef = settings.progress * settings.lambda_sigma / n;
  const double half_log_2pi_e = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);

  LossBreakdown loss;
  OutputGradients grads;
  if (gradient) {
    grads.action_mean.resize(L);
    grads.log_std.resize(L);
    grads.value.resize(L);
  }
  for (Index t = 0; t < L; ++t) {
    const MatrixXd& mean = fwd.action_mean[t];
    const MatrixXd& log_std = fwd.log_std[t];
    const Eigen::RowVectorXd& value = fwd.value[t];
    if (gradient) {
      grads.action_mean[t] = MatrixXd::Zero(kActionSize, B);
      grads.log_std[t] = MatrixXd::Zero(kActionSize, B);
      grads.value[t] = Eigen::RowVectorXd::Zero(B);
    }
    for (Index b = 0; b < B; ++b) {
      const Vector2d mu = mean.col(b);
      const Vector2d ls = log_std.col(b);
      const Vector2d var = (2.0 * ls.array()).exp().matrix();
      const Vector2d action = batch.actions[t].col(b);
      const double log_prob = gaussian_log_prob(action, mu, var);
      const double ratio = std::exp(log_prob - batch.old_log_probs[t][b]);
      const double adv = (batch.advantages[t][b] - adv_mean) / adv_std;
      const double clipped =
          std::clamp(ratio, 1.0 - settings.clip_epsilon, 1.0 + settings.clip_epsilon);
      const double surr1 = ratio * adv;
      const double surr2 = clipped * adv;
      const bool unclipped = surr1 <= surr2;
      loss.policy -= std::min(surr1, surr2) / n;
      if (std::abs(ratio - 1.0) > settings.clip_epsilon) {
        loss.clip_fraction += 1.0 / n;
      }
      loss.approx_kl += ((ratio - 1.0) - (log_prob - batch.old_log_probs[t][b])) / n;

      double var_term = 0.0;
      for (int j = 0; j < kActionSize; ++j) {
        const double diff = var[j] - settings.target_variance[j];
        var_term += 0.5 * diff * diff;
      }
      loss.variance += variance_coef * var_term;

      const double entropy = ls.sum() + kActionSize * half_log_2pi_e;
      loss.entropy += entropy / n;

      const double value_error = value[b] - batch.returns[t][b];
      loss.value += value_error * value_error / n;

      if (gradient) {
        const double d_log_prob = unclipped ? -adv * ratio / n : 0.0;
        for (int j = 0; j < kActionSize; ++j) {
          const double diff = action[j] - mu[j];
          grads.action_mean[t](j, b) = d_log_prob * diff / var[j];
          grads.log_std[t](j, b) = d_log_prob * (diff * diff / var[j] - 1.0) +
                                   variance_coef * (var[j] - settings.target_variance[j]) * 2.0 * var[j] -
                                   settings.entropy_coef / n;
        }
        grads.value[t][b] = settings.value_coef * 2.0 * value_error / n;
      }
    }
  }
  loss.total = loss.policy + loss.variance + settings.value_coef * loss.value -
               settings.entropy_coef * loss.entropy;
  if (gradient) {
    *gradient = policy.backward_sequence(fwd, grads);
  }
  return loss;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient, AdamState& state,
               double learning_rate, double epsilon) {
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  if (state.m.size() != params.size()) {
    state.m = VectorXd::Zero(params.size());
    state.v = VectorXd::Zero(params.size());
    state.steps = 0;
  }
  state.steps += 1;
  state.m = beta1 * state.m + (1.0 - beta1) * gradient;
  state.v = beta2 * state.v + (1.0 - beta2) * gradient.cwiseProduct(gradient);
  const double correction1 = 1.0 - std::pow(beta1, static_cast<double>(state.steps));
  const double correction2 = 1.0 - std::pow(beta2, static_cast<double>(state.steps));
  const double step = learning_rate * std::sqrt(correction2) / correction1;
  params.array() -= step * state.m.array() / (state.v.array().sqrt() + epsilon);
}

double clip_gradient_norm(Eigen::VectorXd& gradient, double max_norm) {
  const double norm = gradient.norm();
  if (norm > max_norm) {
    gradient *= max_norm / (norm + 1e-6);
  }
  return norm;
}

std::uint64_t episode_seed(std::uint64_t base, int env, std::int64_t episode) {
  return splitmix64(splitmix64(base ^ (static_cast<std::uint64_t>(env) << 40)) +
                    static_cast<std::uint64_t>(episode));
}

Trainer::Trainer(TrainConfig config, ScenarioSpec scenario, PerturbationSpec perturbation,
                 EnvConfig env_config)
    : config_(std::move(config)),
      scenario_(std::move(scenario)),
      perturbation_(std::move(perturbation)),
      env_config_(std::move(env_config)) {
  config_.validate();
  scenario_.validate();
  perturbation_.validate();
  config_.architecture.input_size = observation_size(env_config_);
  policy_ = Policy(config_.architecture, config_.seed, config_.init);
  policy_.set_input_scale(default_input_scale(env_config_));
  rng_ = make_rng(config_.seed, 0x7a11);

  const int E = config_.num_envs;
  envs_.assign(E, CrowdEnv(env_config_));
  last_obs_.resize(E);
  episode_counters_.assign(E, 0);
  running_return_.assign(E, 0.0);
  running_length_.assign(E, 0);
  states_ = policy_.initial_state(E);
  start_flags_ = VectorXd::Ones(E);
  for (int e = 0; e < E; ++e) {
    reset_env(e);
  }
}

void Trainer::reset_env(int env) {
  const std::uint64_t seed =
      episode_seed(config_.resolved_env_seed(), env, episode_counters_[env]++);
  last_obs_[env] = envs_[env].reset(scenario_, perturbation_, seed);
  running_return_[env] = 0.0;
  running_length_[env] = 0;
  states_.reset_column(env);
  start_flags_[env] = 1.0;
}

RolloutBuffer Trainer::collect_rollouts(int n_steps) {
  const int E = config_.num_envs;
  const int I = policy_.architecture().input_size;
  const int H = policy_.architecture().hidden_size;
  RolloutBuffer buffer(n_steps, E, I, H);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd obs(I, E);

  for (int s = 0; s < n_steps; ++s) {
    for (int e = 0; e < E; ++e) {
      obs.col(e) = last_obs_[e].features;
    }
    const BatchOutput out = policy_.forward_batch(obs, states_, config_.dropout_train, rng_);
    bounds_.update_columns(out.features);

    for (int e = 0; e < E; ++e) {
      const Index i = buffer.index(s, e);
      buffer.observations.col(i) = obs.col(e);
      buffer.episode_starts[i] = start_flags_[e];
      buffer.states.h1.col(i) = states_.h1.col(e);
      buffer.states.c1.col(i) = states_.c1.col(e);
      buffer.states.h2.col(i) = states_.h2.col(e);
      buffer.states.c2.col(i) = states_.c2.col(e);
      buffer.features.col(i) = out.features.col(e);
      buffer.values[i] = out.value[e];

      const Vector2d mean = out.action_mean.col(e);
      const Vector2d var = (2.0 * out.log_std.col(e).array()).exp().matrix();
      Vector2d action;
      for (int j = 0; j < kActionSize; ++j) {
        action[j] = mean[j] + std::sqrt(var[j]) * normal(rng_);
      }
      buffer.actions.col(i) = action;
      buffer.log_probs[i] = gaussian_log_prob(action, mean, var);
    }
    states_ = out.next_state;
    start_flags_.setZero();

    for (int e = 0; e < E; ++e) {
      const Index i = buffer.index(s, e);
      StepResult result;
      try {
        result = envs_[e].step({buffer.actions(0, i), buffer.actions(1, i)});
      } catch (const std::exception& ex) {
        std::ostringstream msg;
        msg << "environment " << e << " failed in episode " << episode_counters_[e] - 1
            << " at step " << envs_[e].world().time_step << ": " << ex.what();
        throw std::runtime_error(msg.str());
      }
      buffer.rewards[i] = result.reward;
      buffer.dones[i] = result.done ? 1.0 : 0.0;
      running_return_[e] += std::pow(config_.gamma, running_length_[e]) * result.reward;
      running_length_[e] += 1;
      if (result.done) {
        recent_episodes_.push_back({result.info.outcome, running_return_[e]});
        if (recent_episodes_.size() > kCurveWindow) {
          recent_episodes_.pop_front();
        }
        reset_env(e);
      } else {
        last_obs_[e] = std::move(result.observation);
      }
    }
    timesteps_ += E;
  }

  for (int e = 0; e < E; ++e) {
    obs.col(e) = last_obs_[e].features;
  }
  Rng value_rng = make_rng(0);
  const BatchOutput tail = policy_.forward_batch(obs, states_, 0.0, value_rng);
  buffer.last_values = tail.value.transpose();
  return buffer;
}

Minibatch Trainer::make_minibatch(const RolloutBuffer& buffer, std::span<const int> chunks) const {
  const int L = config_.sequence_length;
  const int chunks_per_env = buffer.num_steps / L;
  const Index B = static_cast<Index>(chunks.size());
  const Index I = buffer.observations.rows();
  Minibatch mb;
  mb.sequences.observations.assign(L, MatrixXd(I, B));
  mb.sequences.episode_start = MatrixXd::Zero(L, B);
  mb.sequences.initial_state = policy_.initial_state(static_cast<int>(B));
  mb.actions.assign(L, MatrixXd(kActionSize, B));
  mb.old_log_probs.assign(L, Eigen::RowVectorXd(B));
  mb.advantages.assign(L, Eigen::RowVectorXd(B));
  mb.returns.assign(L, Eigen::RowVectorXd(B));
  for (Index b = 0; b < B; ++b) {
    const int env = chunks[b] / chunks_per_env;
    const int first = (chunks[b] % chunks_per_env) * L;
    const Index i0 = buffer.index(first, env);
    mb.sequences.initial_state.h1.col(b) = buffer.states.h1.col(i0);
    mb.sequences.initial_state.c1.col(b) = buffer.states.c1.col(i0);
    mb.sequences.initial_state.h2.col(b) = buffer.states.h2.col(i0);
    mb.sequences.initial_state.c2.col(b) = buffer.states.c2.col(i0);
    for (int t = 0; t < L; ++t) {
      const Index i = buffer.index(first + t, env);
      mb.sequences.observations[t].col(b) = buffer.observations.col(i);
      mb.sequences.episode_start(t, b) = buffer.episode_starts[i];
      mb.actions[t].col(b) = buffer.actions.col(i);
      mb.old_log_probs[t][b] = buffer.log_probs[i];
      mb.advantages[t][b] = buffer.advantages[i];
      mb.returns[t][b] = buffer.returns[i];
    }
  }
  return mb;
}

UpdateStats Trainer::update(RolloutBuffer& buffer) {
  if (!buffer.advantages_ready) {
    throw std::logic_error("advantages must be computed before update()");
  }
  const int L = config_.sequence_length;
  const int total_chunks = buffer.num_envs * (buffer.num_steps / L);
  const int chunks_per_batch = std::min(config_.batch_size / L, total_chunks);

  LossSettings settings;
  settings.clip_epsilon = config_.clip_epsilon;
  settings.value_coef = config_.value_coef;
  settings.entropy_coef = config_.entropy_coef;
  settings.lambda_sigma = config_.variance_loss ? config_.lambda_sigma : 0.0;
  settings.target_variance = config_.target_variance;
  settings.progress = std::min(1.0, static_cast<double>(timesteps_) /
                                        static_cast<double>(config_.total_timesteps));
  settings.dropout_rate = config_.dropout_train;

  std::vector<int> order(total_chunks);
  std::iota(order.begin(), order.end(), 0);
  UpdateStats stats;
  int steps = 0;
  for (int epoch = 0; epoch < config_.epochs_per_update; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng_);
    for (int begin = 0; begin + chunks_per_batch <= total_chunks; begin += chunks_per_batch) {
      const Minibatch mb = make_minibatch(buffer, std::span<const int>(order).subspan(begin, chunks_per_batch));
      VectorXd gradient;
      const LossBreakdown loss = ppo_loss(policy_, mb, settings, rng_, &gradient);
      if (!std::isfinite(loss.total) || !gradient.allFinite()) {
        const auto dir = std::filesystem::temp_directory_path() / "safenav";
        const auto path = dump_minibatch(mb, loss, dir);
        throw TrainingDiverged("non-finite loss at timestep " + std::to_string(timesteps_) +
                               "; minibatch dumped to " + path.string());
      }
      stats.grad_norm += clip_gradient_norm(gradient, config_.max_grad_norm);
      adam_step(policy_.parameters(), gradient, adam_, config_.learning_rate, config_.adam_epsilon);
      stats.policy_loss += loss.policy;
      stats.variance_loss += loss.variance;
      stats.value_loss += loss.value;
      stats.entropy += loss.entropy;
      stats.clip_fraction += loss.clip_fraction;
      stats.approx_kl += loss.approx_kl;
      ++steps;
    }
  }
  if (steps > 0) {
    const double inv = 1.0 / steps;
    stats.policy_loss *= inv;
    stats.variance_loss *= inv;
    stats.value_loss *= inv;
    stats.entropy *= inv;
    stats.clip_fraction *= inv;
    stats.approx_kl *= inv;
    stats.grad_norm *= inv;
  }
  stats.mean_action_variance = 0.0;
  buffer.clear();
  return stats;
}

CurvePoint Trainer::curve_point() const {
  CurvePoint point;
  point.timestep = timesteps_;
  point.episodes = static_cast<int>(recent_episodes_.size());
  if (recent_episodes_.empty()) {
    return point;
  }
  for (const auto& ep : recent_episodes_) {
    point.mean_return += ep.discounted_return;
    point.goal_rate += ep.outcome == Outcome::goal ? 1.0 : 0.0;
    point.collision_rate += ep.outcome == Outcome::collision ? 1.0 : 0.0;
    point.timeout_rate += ep.outcome == Outcome::timeout ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(recent_episodes_.size());
  point.mean_return /= n;
  point.goal_rate /= n;
  point.collision_rate /= n;
  point.timeout_rate /= n;
  return point;
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint checkpoint;
  checkpoint.policy = policy_;
  checkpoint.feature_bounds = bounds_;
  checkpoint.timesteps = timesteps_;
  checkpoint.init_seed = config_.seed;
  checkpoint.env_seed = config_.resolved_env_seed();
  return checkpoint;
}

TrainResult Trainer::train(const std::optional<std::filesystem::path>& checkpoint_dir,
                           const std::function<void(const CurvePoint&)>& on_progress) {
  TrainResult result;
  int update_index = 0;
  while (timesteps_ < config_.total_timesteps) {
    RolloutBuffer buffer = collect_rollouts(config_.num_steps);
    compute_gae(buffer, config_.gamma, config_.gae_lambda);
    UpdateStats stats = update(buffer);
    stats.mean_action_variance = 0.0;
    result.updates.push_back(stats);
    const CurvePoint point = curve_point();
    result.curve.push_back(point);
    if (on_progress) {
      on_progress(point);
    }
    ++update_index;
    if (checkpoint_dir && config_.checkpoint_interval > 0 &&
        update_index % config_.checkpoint_interval == 0) {
      save_checkpoint(checkpoint(), *checkpoint_dir / ("step_" + std::to_string(timesteps_) + ".json"));
    }
  }
  result.checkpoint = checkpoint();
  if (checkpoint_dir) {
    save_checkpoint(result.checkpoint, *checkpoint_dir / "final.json");
  }
  return result;
}

TrainResult train(const TrainConfig& config, const ScenarioSpec& scenario,
                  const std::optional<std::filesystem::path>& checkpoint_dir) {
  Trainer trainer(config, scenario);
  return trainer.train(checkpoint_dir);
}

void validate_ensemble_seeds(std::span<const SeedPair> seeds) {
  if (seeds.size() < 2) {
    throw std::invalid_argument("an ensemble needs at least two members");
  }
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (std::size_t j = i + 1; j < seeds.size(); ++j) {
      if (seeds[i] == seeds[j]) {
        throw std::invalid_argument("ensemble members " + std::to_string(i) + " and " +
                                    std::to_string(j) + " share the same seed pair");
      }
    }
  }
}

std::vector<SeedPair> ensemble_seed_pairs(const TrainConfig& config, int members) {
  std::vector<SeedPair> seeds;
  for (int k = 0; k < members; ++k) {
    const std::uint64_t init = config.seed + static_cast<std::uint64_t>(k);
    seeds.push_back({init, splitmix64(config.resolved_env_seed() + 1000003ULL * k)});
  }
  return seeds;
}

EnsembleResult train_ensemble(const TrainConfig& config, const ScenarioSpec& scenario,
                              std::span<const SeedPair> seeds,
                              const std::optional<std::filesystem::path>& checkpoint_dir,
                              const EnvConfig& env) {
  validate_ensemble_seeds(seeds);
  const int K = static_cast<int>(seeds.size());
  std::vector<std::optional<TrainResult>> runs(K);
  std::vector<std::string> errors(K);

#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < K; ++k) {
    TrainConfig member = config;
    member.seed = seeds[k].init_seed;
    member.env_seed = seeds[k].env_seed;
    std::optional<std::filesystem::path> dir;
    if (checkpoint_dir) {
      dir = *checkpoint_dir / ("member_" + std::to_string(k));
    }
    try {
      runs[k] = Trainer(member, scenario, {}, env).train(dir);
    } catch (const std::exception& e) {
      errors[k] = "member " + std::to_string(k) + ": " + e.what();
    }
  }

  EnsembleResult result;
  for (int k = 0; k < K; ++k) {
    if (runs[k]) {
      result.members.push_back(std::move(*runs[k]));
    } else {
      result.failures.push_back(errors[k]);
    }
  }
  return result;
}

}  // namespace safenav

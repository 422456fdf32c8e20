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

#ifndef SAFENAV_POLICY_HPP
#define SAFENAV_POLICY_HPP

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "safenav/crowd_sim.hpp"

namespace safenav {

inline constexpr int kActionSize = 2;

using Vector2d = Eigen::Vector2d;

/// Network topology. The extractor is a two-layer LSTM with `hidden_size` units per layer; its
/// output is the feature vector of dimension `hidden_size`.
struct PolicyArchitecture {
  int input_size{0};
  int hidden_size{64};
  int actor_hidden{64};
  int critic_hidden{64};

  bool operator==(const PolicyArchitecture&) const = default;
};

/// Initial output biases. The speed mean starts mid-range so early exploration moves the robot.
struct PolicyInit {
  double speed_bias{0.5};
  double log_std_bias{-0.5};
};

/// Bounds on the actor's log standard deviation output.
struct ClampBounds {
  double min{-20.0};
  double max{0.25};
};

Vector2d clamp_log_variance(const Vector2d& raw_log_sigma, const ClampBounds& bounds = {});

enum class DropoutKind { off, train_rate, test_rate };

struct DropoutMode {
  DropoutKind mode{DropoutKind::off};
  double rate_train{0.1};
  double rate_test{0.5};

  double rate() const;
  void validate() const;

  static DropoutMode off() { return {}; }
  static DropoutMode train(double rate_train = 0.1) {
    return {DropoutKind::train_rate, rate_train, rate_train > 0.5 ? rate_train : 0.5};
  }
  static DropoutMode test(double rate_test = 0.5, double rate_train = 0.1) {
    return {DropoutKind::test_rate, rate_train, rate_test};
  }
};

/// Hidden and cell state of both LSTM layers for a batch (one column per stream).
struct RecurrentState {
  Eigen::MatrixXd h1, c1, h2, c2;

  static RecurrentState zeros(int hidden_size, int batch = 1);
  int batch() const { return static_cast<int>(h1.cols()); }
  RecurrentState column(int index) const;
  void set_column(int index, const RecurrentState& single);
  void reset_column(int index);
};

struct PolicyOutput {
  Vector2d action_mean{Vector2d::Zero()};
  Vector2d action_variance{Vector2d::Ones()};
  Vector2d log_std{Vector2d::Zero()};
  double state_value{0.0};
  Eigen::VectorXd features;
  RecurrentState recurrent_state;
};

/// Column-batched outputs of a single step.
struct BatchOutput {
  Eigen::MatrixXd action_mean;  // 2 x B
  Eigen::MatrixXd log_std;      // 2 x B, clamped
  Eigen::RowVectorXd value;     // 1 x B
  Eigen::MatrixXd features;     // D x B, features seen by the actor
  RecurrentState next_state;    // mask-free recurrent stream
};

/// A batch of equal-length sequences. `episode_start(t, b)` = 1 resets stream b before step t.
struct SequenceBatch {
  std::vector<Eigen::MatrixXd> observations;  // length L, each I x B
  Eigen::MatrixXd episode_start;              // L x B
  RecurrentState initial_state;
};

struct SequenceCache;

struct SequenceForward {
  std::vector<Eigen::MatrixXd> action_mean;  // L x (2 x B)
  std::vector<Eigen::MatrixXd> raw_log_std;
  std::vector<Eigen::MatrixXd> log_std;
  std::vector<Eigen::RowVectorXd> value;
  std::vector<Eigen::MatrixXd> features;
  RecurrentState final_state;
  std::shared_ptr<const SequenceCache> cache;
};

/// Loss gradients with respect to the per-step network outputs.
struct OutputGradients {
  std::vector<Eigen::MatrixXd> action_mean;  // d loss / d mean
  std::vector<Eigen::MatrixXd> log_std;      // d loss / d clamped log std
  std::vector<Eigen::RowVectorXd> value;
};

/// Actor-critic with a shared recurrent extractor.
///
/// Dropout is applied to the first LSTM layer's output before it enters the second layer and
/// after each actor hidden layer. The critic and the recurrent stream carried between steps
/// always come from the mask-free pass, so dropout only perturbs what the actor sees.
class Policy {
 public:
  Policy() = default;
  Policy(const PolicyArchitecture& architecture, std::uint64_t init_seed,
         const PolicyInit& init = {});

  const PolicyArchitecture& architecture() const { return arch_; }
  const ClampBounds& clamp_bounds() const { return clamp_; }
  void set_clamp_bounds(const ClampBounds& bounds) { clamp_ = bounds; }

  /// Per-entry multiplier applied to observations before the extractor.
  const Eigen::VectorXd& input_scale() const { return input_scale_; }
  void set_input_scale(const Eigen::VectorXd& scale);

  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }
  Eigen::Index parameter_count() const { return params_.size(); }

  RecurrentState initial_state(int batch = 1) const {
    return RecurrentState::zeros(arch_.hidden_size, batch);
  }

  PolicyOutput forward(const Observation& obs, const RecurrentState& state,
                       const DropoutMode& mode, Rng& rng) const;

  /// One step for B streams at a given dropout rate (0 disables masking).
  BatchOutput forward_batch(const Eigen::MatrixXd& observations, const RecurrentState& state,
                            double dropout_rate, Rng& rng) const;

  SequenceForward forward_sequence(const SequenceBatch& batch, double dropout_rate, Rng& rng,
                                   bool keep_cache) const;

  /// Backpropagates through a cached sequence. Returns d loss / d parameters.
  Eigen::VectorXd backward_sequence(const SequenceForward& forward,
                                    const OutputGradients& grads) const;

  /// Indices of the parameters feeding the action mean head (for diagnostics and tests).
  std::pair<Eigen::Index, Eigen::Index> mean_head_range() const;

 private:
  PolicyArchitecture arch_{};
  ClampBounds clamp_{};
  Eigen::VectorXd input_scale_;
  Eigen::VectorXd params_;
};

/// Default observation scaling for the crowd environment's feature layout.
Eigen::VectorXd default_input_scale(const EnvConfig& config);

/// Log-density of a diagonal Gaussian.
double gaussian_log_prob(const Vector2d& action, const Vector2d& mean, const Vector2d& variance);

struct SampledAction {
  ActionCommand command;
  Vector2d raw{Vector2d::Zero()};
  double log_probability{0.0};
};

SampledAction sample_action(const PolicyOutput& out, Rng& rng, bool deterministic);

}  // namespace safenav

#endif  // SAFENAV_POLICY_HPP

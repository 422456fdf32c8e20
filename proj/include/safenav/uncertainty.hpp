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


#ifndef SAFENAV_UNCERTAINTY_HPP
#define SAFENAV_UNCERTAINTY_HPP

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "safenav/feature_bounds.hpp"
#include "safenav/policy.hpp"

namespace safenav {

enum class UncertaintySource { mc_dropout, ensemble };

/// K stochastic predictions for one observation. Row k holds sample k.
struct UncertaintySampleSet {
  Eigen::MatrixX2d means;
  Eigen::MatrixX2d variances;
  Eigen::MatrixXd features;
  UncertaintySource source{UncertaintySource::mc_dropout};

  Eigen::Index size() const { return means.rows(); }
  /// Throws std::invalid_argument unless K >= 2, shapes agree and every variance is positive.
  void validate() const;
};

struct UncertaintyEstimate {
  Vector2d epistemic{Vector2d::Zero()};  // (speed, heading)
  Vector2d aleatoric{Vector2d::Zero()};
  double feature_uncertainty{0.0};
};

/// K forward passes with independent masks at `rate_test` on the same input and state. The
/// caller's recurrent state is not touched.
UncertaintySampleSet mc_dropout_samples(const Policy& policy, const Observation& obs,
                                        const RecurrentState& state, int samples, double rate_test,
                                        Rng& rng);

/// One mask-free pass per member. `states[k]` is advanced in place to member k's next state.
UncertaintySampleSet ensemble_samples(std::span<const Policy> models, const Observation& obs,
                                      std::span<RecurrentState> states);

/// Population variance of the sampled means per action dimension.
Vector2d epistemic(const UncertaintySampleSet& samples);
/// Mean of the sampled variances per action dimension.
Vector2d aleatoric(const UncertaintySampleSet& samples);
/// Population variance of every feature element across the samples.
Eigen::VectorXd feature_variance(const UncertaintySampleSet& samples);

/// Variance-weighted ratio of each element's variance to its uniform-distribution bound, each
/// ratio clamped to 1. Elements whose training range is degenerate are skipped. Result in [0, 1].
double feature_uncertainty_dropout(const Eigen::VectorXd& variance, const FeatureBounds& bounds);
/// Mean feature variance.
double feature_uncertainty_ensemble(const Eigen::VectorXd& variance);

/// All three estimates; the feature mapping follows the sample source.
UncertaintyEstimate estimate(const UncertaintySampleSet& samples, const FeatureBounds& bounds);

/// Mean of the last min(w, size) values. Throws on empty history or w < 1.
double windowed_mean(std::span<const double> history, int w);

/// The last `w` step estimates. Readouts are window means; empty windows throw.
class UncertaintyWindow {
 public:
  explicit UncertaintyWindow(int w = 4);

  void push(const UncertaintyEstimate& estimate);
  void clear();
  bool empty() const { return history_.empty(); }
  int width() const { return w_; }

  double epistemic_heading() const;
  double feature() const;
  UncertaintyEstimate mean() const;

 private:
  int w_;
  std::deque<UncertaintyEstimate> history_;
};

}  // namespace safenav

#endif  // SAFENAV_UNCERTAINTY_HPP

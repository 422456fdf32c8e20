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


#include "safenav/uncertainty.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace safenav {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

constexpr int kHeading = 1;

// Population variance of each column. Shifting by the first row first keeps duplicate rows at
// exactly zero.
VectorXd column_variance(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd shifted = m.rowwise() - m.row(0);
  const Eigen::RowVectorXd mean = shifted.colwise().mean();
  return (shifted.rowwise() - mean).array().square().colwise().mean().transpose();
}

}  // namespace

void UncertaintySampleSet::validate() const {
  const Index k = means.rows();
  if (k < 2) {
    throw std::invalid_argument("an uncertainty sample set needs K >= 2, got " + std::to_string(k));
  }
  if (variances.rows() != k || features.rows() != k) {
    throw std::invalid_argument("sample set rows disagree");
  }
  if (!(variances.array() > 0.0).all()) {
    throw std::invalid_argument("sampled variances must be positive");
  }
}

UncertaintySampleSet mc_dropout_samples(const Policy& policy, const Observation& obs,
                                        const RecurrentState& state, int samples, double rate_test,
                                        Rng& rng) {
  if (samples < 2) {
    throw std::invalid_argument("MC-Dropout needs at least two samples");
  }
  UncertaintySampleSet set;
  set.source = UncertaintySource::mc_dropout;
  set.means.resize(samples, 2);
  set.variances.resize(samples, 2);
  set.features.resize(samples, policy.architecture().hidden_size);
  // Replicating the input lets one batched pass draw K independent masks.
  const Eigen::MatrixXd inputs = obs.features.replicate(1, samples);
  RecurrentState batch_state = policy.initial_state(samples);
  for (int k = 0; k < samples; ++k) {
    batch_state.set_column(k, state);
  }
  const BatchOutput out = policy.forward_batch(inputs, batch_state, rate_test, rng);
  set.means = out.action_mean.transpose();
  set.variances = (2.0 * out.log_std.array()).exp().matrix().transpose();
  set.features = out.features.transpose();
  return set;
}

UncertaintySampleSet ensemble_samples(std::span<const Policy> models, const Observation& obs,
                                      std::span<RecurrentState> states) {
  const Index k = static_cast<Index>(models.size());
  if (k < 2) {
    throw std::invalid_argument("an ensemble needs at least two members");
  }
  if (states.size() != models.size()) {
    throw std::invalid_argument("one recurrent state per ensemble member is required");
  }
  for (const Policy& m : models) {
    if (!(m.architecture() == models.front().architecture())) {
      throw std::invalid_argument("ensemble members have different architectures");
    }
  }
  UncertaintySampleSet set;
  set.source = UncertaintySource::ensemble;
  set.means.resize(k, 2);
  set.variances.resize(k, 2);
  set.features.resize(k, models.front().architecture().hidden_size);
  Rng unused = make_rng(0);
  for (Index i = 0; i < k; ++i) {
    PolicyOutput out = models[i].forward(obs, states[i], DropoutMode::off(), unused);
    set.means.row(i) = out.action_mean.transpose();
    set.variances.row(i) = out.action_variance.transpose();
    set.features.row(i) = out.features.transpose();
    states[i] = std::move(out.recurrent_state);
  }
  return set;
}

Vector2d epistemic(const UncertaintySampleSet& samples) {
  samples.validate();
  return column_variance(samples.means);
}

Vector2d aleatoric(const UncertaintySampleSet& samples) {
  samples.validate();
  return samples.variances.colwise().mean().transpose();
}

VectorXd feature_variance(const UncertaintySampleSet& samples) {
  samples.validate();
  return column_variance(samples.features);
}

double feature_uncertainty_dropout(const VectorXd& variance, const FeatureBounds& bounds) {
  if (bounds.empty()) {
    throw std::invalid_argument("feature bounds are empty; load them from a trained checkpoint");
  }
  if (bounds.size() != variance.size()) {
    throw std::invalid_argument("feature variance and bounds differ in size");
  }
  const VectorXd limit = bounds.variance_bound();
  double total = 0.0;
  for (Index d = 0; d < variance.size(); ++d) {
    if (limit[d] > 0.0) {
      total += variance[d];
    }
  }
  if (!(total > 0.0)) {
    return 0.0;
  }
  double u = 0.0;
  for (Index d = 0; d < variance.size(); ++d) {
    if (limit[d] > 0.0) {
      u += (variance[d] / total) * std::min(1.0, variance[d] / limit[d]);
    }
  }
  return std::clamp(u, 0.0, 1.0);
}

double feature_uncertainty_ensemble(const VectorXd& variance) {
  if (variance.size() == 0) {
    throw std::invalid_argument("feature variance is empty");
  }
  return variance.mean();
}

UncertaintyEstimate estimate(const UncertaintySampleSet& samples, const FeatureBounds& bounds) {
  UncertaintyEstimate e;
  e.epistemic = epistemic(samples);
  e.aleatoric = aleatoric(samples);
  const VectorXd var = feature_variance(samples);
  e.feature_uncertainty = samples.source == UncertaintySource::mc_dropout
                              ? feature_uncertainty_dropout(var, bounds)
                              : feature_uncertainty_ensemble(var);
  return e;
}

double windowed_mean(std::span<const double> history, int w) {
  if (w < 1) {
    throw std::invalid_argument("window must be at least 1");
  }
  if (history.empty()) {
    throw std::invalid_argument("windowed mean of an empty history");
  }
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(w), history.size());
  double sum = 0.0;
  for (std::size_t i = history.size() - n; i < history.size(); ++i) {
    sum += history[i];
  }
  return sum / static_cast<double>(n);
}

UncertaintyWindow::UncertaintyWindow(int w) : w_(w) {
  if (w < 1) {
    throw std::invalid_argument("window must be at least 1");
  }
}

void UncertaintyWindow::push(const UncertaintyEstimate& estimate) {
  history_.push_back(estimate);
  if (static_cast<int>(history_.size()) > w_) {
    history_.pop_front();
  }
}

void UncertaintyWindow::clear() { history_.clear(); }

UncertaintyEstimate UncertaintyWindow::mean() const {
  if (history_.empty()) {
    throw std::logic_error("uncertainty window is empty");
  }
  UncertaintyEstimate m;
  for (const auto& e : history_) {
    m.epistemic += e.epistemic;
    m.aleatoric += e.aleatoric;
    m.feature_uncertainty += e.feature_uncertainty;
  }
  const double n = static_cast<double>(history_.size());
  m.epistemic /= n;
  m.aleatoric /= n;
  m.feature_uncertainty /= n;
  return m;
}

double UncertaintyWindow::epistemic_heading() const { return mean().epistemic[kHeading]; }

double UncertaintyWindow::feature() const { return mean().feature_uncertainty; }

}  // namespace safenav

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


#ifndef SAFENAV_SAFE_ACTION_HPP
#define SAFENAV_SAFE_ACTION_HPP

#include <optional>
#include <utility>
#include <vector>

#include "safenav/crowd_sim.hpp"

namespace safenav {

struct PocThresholds {
  double lambda_ep{0.03};
  double lambda_f{0.3};
  double lambda_prox{0.9};
  double beta_1{0.5};
  int window{4};

  static PocThresholds dropout() { return {}; }
  static PocThresholds ensemble() { return {0.08, 0.0033, 0.9, 0.5, 4}; }

  void validate() const;
};

/// Which direction of distance change counts as approaching.
enum class ApproachRule {
  closing,  // d_t <= d_{t-1}
  literal,  // d_{t-1} <= d_t
};

struct GeometricContext {
  double nearest_distance{0.0};
  double previous_distance{0.0};
  double relative_speed{0.0};
};

struct PocConditions {
  bool epistemic{false};
  bool feature{false};
  bool proximity{false};
  bool approach{false};
  bool poc{false};
};

PocConditions poc_conditions(double windowed_ep_heading, double windowed_feat,
                             const GeometricContext& ctx, const PocThresholds& th,
                             ApproachRule rule = ApproachRule::closing);

/// Collision-risk indicator: (c_ep or c_feat) and c_prox and c_ap.
bool poc(double windowed_ep_heading, double windowed_feat, const GeometricContext& ctx,
         const PocThresholds& th, ApproachRule rule = ApproachRule::closing);

/// The same conjunction evaluated on precomputed condition bits.
constexpr bool poc_from_bits(bool c_ep, bool c_feat, bool c_prox, bool c_ap) {
  return (c_ep || c_feat) && c_prox && c_ap;
}

enum class ControlMode { learned, cautious };

std::pair<ActionCommand, ControlMode> select_action(const ActionCommand& policy_action, bool poc,
                                                    const ActionCommand& fallback_action);

/// Nearest human by surface distance and the magnitude of its velocity relative to the robot.
/// Returns nullopt when no humans are present.
struct NearestHuman {
  double distance{0.0};
  double relative_speed{0.0};
  std::size_t index{0};  // agent index in the world
};
std::optional<NearestHuman> nearest_human(const WorldState& world);

/// Keeps each human's distance from the previous step. On the first step the previous distance
/// equals the current one.
class GeometryTracker {
 public:
  std::optional<GeometricContext> update(const WorldState& world);
  void reset() { previous_.clear(); }

 private:
  std::vector<double> previous_;
};

}  // namespace safenav

#endif  // SAFENAV_SAFE_ACTION_HPP

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


#include "safenav/safe_action.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace safenav {

void PocThresholds::validate() const {
  if (lambda_ep < 0.0 || lambda_f < 0.0 || lambda_prox < 0.0 || beta_1 < 0.0) {
    throw std::invalid_argument("thresholds must be non-negative");
  }
  if (window < 1) {
    throw std::invalid_argument("window must be at least 1");
  }
}

PocConditions poc_conditions(double windowed_ep_heading, double windowed_feat,
                             const GeometricContext& ctx, const PocThresholds& th,
                             ApproachRule rule) {
  PocConditions c;
  c.epistemic = windowed_ep_heading > th.lambda_ep;
  c.feature = windowed_feat > th.lambda_f;
  c.proximity = ctx.nearest_distance + th.beta_1 * std::abs(ctx.relative_speed) < th.lambda_prox;
  c.approach = rule == ApproachRule::closing ? ctx.nearest_distance <= ctx.previous_distance
                                             : ctx.previous_distance <= ctx.nearest_distance;
  c.poc = poc_from_bits(c.epistemic, c.feature, c.proximity, c.approach);
  return c;
}

bool poc(double windowed_ep_heading, double windowed_feat, const GeometricContext& ctx,
         const PocThresholds& th, ApproachRule rule) {
  return poc_conditions(windowed_ep_heading, windowed_feat, ctx, th, rule).poc;
}

std::pair<ActionCommand, ControlMode> select_action(const ActionCommand& policy_action, bool poc,
                                                    const ActionCommand& fallback_action) {
  if (poc) {
    return {fallback_action, ControlMode::cautious};
  }
  return {policy_action, ControlMode::learned};
}

std::optional<NearestHuman> nearest_human(const WorldState& world) {
  if (world.human_count() == 0) {
    return std::nullopt;
  }
  const AgentState& robot = world.robot();
  NearestHuman best{std::numeric_limits<double>::infinity(), 0.0, 0};
  for (std::size_t i = 1; i < world.agents.size(); ++i) {
    const double d = gap_distance(robot, world.agents[i]);
    if (d < best.distance) {
      best.distance = d;
      best.relative_speed = (robot.velocity - world.agents[i].velocity).norm();
      best.index = i;
    }
  }
  best.distance = std::max(0.0, best.distance);
  return best;
}

std::optional<GeometricContext> GeometryTracker::update(const WorldState& world) {
  const auto nearest = nearest_human(world);
  std::vector<double> distances(world.agents.size(), 0.0);
  for (std::size_t i = 1; i < world.agents.size(); ++i) {
    distances[i] = std::max(0.0, gap_distance(world.robot(), world.agents[i]));
  }
  if (!nearest) {
    previous_ = std::move(distances);
    return std::nullopt;
  }
  GeometricContext ctx;
  ctx.nearest_distance = nearest->distance;
  // Compare against the same human's distance one step earlier.
  ctx.previous_distance =
      nearest->index < previous_.size() ? previous_[nearest->index] : nearest->distance;
  ctx.relative_speed = nearest->relative_speed;
  previous_ = std::move(distances);
  return ctx;
}

}  // namespace safenav

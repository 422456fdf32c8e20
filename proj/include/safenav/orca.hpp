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

#ifndef SAFENAV_ORCA_HPP
#define SAFENAV_ORCA_HPP

#include <span>
#include <vector>

#include "safenav/geometry.hpp"

namespace safenav {

/// Observable state of one agent as seen by the ORCA solver.
struct OrcaAgentView {
  Vec2 position{Vec2::Zero()};
  Vec2 velocity{Vec2::Zero()};
  double radius{0.3};
  Vec2 preferred_velocity{Vec2::Zero()};
  double max_speed{1.0};
};

/// A directed line; the permitted half-plane lies to its left.
struct OrcaLine {
  Vec2 point{Vec2::Zero()};
  Vec2 direction{Vec2::UnitX()};
};

/// Rotation applied to the preferred velocity whenever neighbors are present, so that exactly
/// symmetric encounters resolve to a fixed side.
inline constexpr double kOrcaTieBreakRotation = 1e-6;

inline constexpr double kDefaultOrcaTimeHorizon = 2.0;

/// Builds the ORCA half-plane that `self` must respect with respect to `other`.
OrcaLine orca_half_plane(const OrcaAgentView& self, const OrcaAgentView& other, double time_horizon,
                         double dt);

/// Velocity closest to the preferred velocity inside all ORCA half-planes and the speed disk.
/// When the half-planes have no common point the velocity minimizing the largest violation is
/// returned instead.
Vec2 compute_orca_velocity(const OrcaAgentView& self, std::span<const OrcaAgentView> neighbors,
                           double time_horizon, double dt);

/// Solves the ORCA program for an explicit set of lines. Exposed for testing.
Vec2 solve_orca_program(std::span<const OrcaLine> lines, double max_speed,
                        const Vec2& preferred_velocity);

/// Robot-side input of the cautious fallback.
struct RobotView {
  Vec2 position{Vec2::Zero()};
  Vec2 velocity{Vec2::Zero()};
  double heading{0.0};
  double radius{0.3};
  Vec2 goal{Vec2::Zero()};
  double preferred_speed{1.0};
  double max_speed{1.0};
};

struct HumanView {
  Vec2 position{Vec2::Zero()};
  Vec2 velocity{Vec2::Zero()};
  double radius{0.3};
};

struct FallbackConfig {
  double inflation{1.5};
  double time_horizon{kDefaultOrcaTimeHorizon};
  double dt{0.25};
  double max_delta_heading{0.7853981633974483};
};

struct ActionCommand;

/// Preferred velocity toward `goal`, slowing down so the goal is not overshot within one step.
Vec2 goal_directed_velocity(const Vec2& position, const Vec2& goal, double preferred_speed,
                            double dt);

/// Converts a desired planar velocity into a (speed, delta_heading) command.
ActionCommand velocity_to_action(const Vec2& velocity, double heading, double preferred_speed,
                                 double max_delta_heading);

/// Plain ORCA toward the goal with every human radius multiplied by `config.inflation`.
ActionCommand cautious_policy(const RobotView& robot, std::span<const HumanView> humans,
                              const FallbackConfig& config);

}  // namespace safenav

#endif  // SAFENAV_ORCA_HPP

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

#include "safenav/orca.hpp"

#include <algorithm>
#include <cmath>

#include "safenav/crowd_sim.hpp"

namespace safenav {

namespace {

constexpr double kEpsilon = 1e-9;

// Optimizes along line `line_no` subject to lines [0, line_no) and the speed disk.
bool linear_program_1(std::span<const OrcaLine> lines, std::size_t line_no, double radius,
                      const Vec2& opt_velocity, bool direction_opt, Vec2& result) {
  const OrcaLine& line = lines[line_no];
  const double dot_product = line.point.dot(line.direction);
  const double discriminant = dot_product * dot_product + radius * radius - line.point.squaredNorm();
  if (discriminant < 0.0) {
    // The speed disk misses the line entirely.
    return false;
  }
  const double sqrt_discriminant = std::sqrt(discriminant);
  double t_left = -dot_product - sqrt_discriminant;
  double t_right = -dot_product + sqrt_discriminant;

  for (std::size_t i = 0; i < line_no; ++i) {
    const double denominator = cross(line.direction, lines[i].direction);
    const double numerator = cross(lines[i].direction, line.point - lines[i].point);
    if (std::abs(denominator) <= kEpsilon) {
      // Parallel lines.
      if (numerator < 0.0) {
        return false;
      }
      continue;
    }
    const double t = numerator / denominator;
    if (denominator >= 0.0) {
      t_right = std::min(t_right, t);
    } else {
      t_left = std::max(t_left, t);
    }
    if (t_left > t_right) {
      return false;
    }
  }

  if (direction_opt) {
    result = opt_velocity.dot(line.direction) > 0.0 ? Vec2(line.point + t_right * line.direction)
                                                    : Vec2(line.point + t_left * line.direction);
  } else {
    const double t = line.direction.dot(opt_velocity - line.point);
    result = line.point + std::clamp(t, t_left, t_right) * line.direction;
  }
  return true;
}

std::size_t linear_program_2(std::span<const OrcaLine> lines, double radius,
                             const Vec2& opt_velocity, bool direction_opt, Vec2& result) {
  if (direction_opt) {
    result = opt_velocity * radius;
  } else if (opt_velocity.squaredNorm() > radius * radius) {
    result = opt_velocity.normalized() * radius;
  } else {
    result = opt_velocity;
  }

  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (cross(lines[i].direction, lines[i].point - result) > 0.0) {
      const Vec2 previous = result;
      if (!linear_program_1(lines, i, radius, opt_velocity, direction_opt, result)) {
        result = previous;
        return i;
      }
    }
  }
  return lines.size();
}

void linear_program_3(std::span<const OrcaLine> lines, std::size_t begin_line, double radius,
                      Vec2& result) {
  double distance = 0.0;
  std::vector<OrcaLine> projected;
  for (std::size_t i = begin_line; i < lines.size(); ++i) {
    if (cross(lines[i].direction, lines[i].point - result) <= distance) {
      continue;
    }
    projected.clear();
    for (std::size_t j = 0; j < i; ++j) {
      OrcaLine line;
      const double determinant = cross(lines[i].direction, lines[j].direction);
      if (std::abs(determinant) <= kEpsilon) {
        if (lines[i].direction.dot(lines[j].direction) > 0.0) {
          continue;
        }
        line.point = 0.5 * (lines[i].point + lines[j].point);
      } else {
        line.point = lines[i].point +
                     (cross(lines[j].direction, lines[i].point - lines[j].point) / determinant) *
                         lines[i].direction;
      }
      line.direction = (lines[j].direction - lines[i].direction).normalized();
      projected.push_back(line);
    }

    const Vec2 previous = result;
    const Vec2 normal(-lines[i].direction.y(), lines[i].direction.x());
    if (linear_program_2(projected, radius, normal, true, result) < projected.size()) {
      // Only possible through floating point error; keep the previous answer.
      result = previous;
    }
    distance = cross(lines[i].direction, lines[i].point - result);
  }
}

}  // namespace

OrcaLine orca_half_plane(const OrcaAgentView& self, const OrcaAgentView& other, double time_horizon,
                         double dt) {
  const Vec2 relative_position = other.position - self.position;
  const Vec2 relative_velocity = self.velocity - other.velocity;
  const double dist_sq = relative_position.squaredNorm();
  const double combined_radius = self.radius + other.radius;
  const double combined_radius_sq = combined_radius * combined_radius;
  const double inv_time_horizon = 1.0 / time_horizon;

  OrcaLine line;
  Vec2 u;
  if (dist_sq > combined_radius_sq) {
    const Vec2 w = relative_velocity - inv_time_horizon * relative_position;
    const double w_length_sq = w.squaredNorm();
    const double dot_product = w.dot(relative_position);
    if (dot_product < 0.0 && dot_product * dot_product > combined_radius_sq * w_length_sq) {
      // Closest boundary point lies on the cut-off circle.
      const double w_length = std::sqrt(w_length_sq);
      const Vec2 unit_w = w / w_length;
      line.direction = Vec2(unit_w.y(), -unit_w.x());
      u = (combined_radius * inv_time_horizon - w_length) * unit_w;
    } else {
      const double leg = std::sqrt(dist_sq - combined_radius_sq);
      if (cross(relative_position, w) > 0.0) {
        line.direction = Vec2(relative_position.x() * leg - relative_position.y() * combined_radius,
                              relative_position.x() * combined_radius + relative_position.y() * leg) /
                         dist_sq;
      } else {
        line.direction = -Vec2(relative_position.x() * leg + relative_position.y() * combined_radius,
                               -relative_position.x() * combined_radius + relative_position.y() * leg) /
                         dist_sq;
      }
      u = relative_velocity.dot(line.direction) * line.direction - relative_velocity;
    }
  } else {
    // Already overlapping: resolve within one step.
    const double inv_dt = 1.0 / dt;
    const Vec2 w = relative_velocity - inv_dt * relative_position;
    double w_length = w.norm();
    Vec2 unit_w = w_length > kEpsilon ? Vec2(w / w_length) : Vec2(-relative_position.normalized());
    if (w_length <= kEpsilon) {
      w_length = 0.0;
    }
    line.direction = Vec2(unit_w.y(), -unit_w.x());
    u = (combined_radius * inv_dt - w_length) * unit_w;
  }
  line.point = self.velocity + 0.5 * u;
  return line;
}

Vec2 solve_orca_program(std::span<const OrcaLine> lines, double max_speed,
                        const Vec2& preferred_velocity) {
  Vec2 result = Vec2::Zero();
  const std::size_t fail = linear_program_2(lines, max_speed, preferred_velocity, false, result);
  if (fail < lines.size()) {
    linear_program_3(lines, fail, max_speed, result);
  }
  return result;
}

Vec2 compute_orca_velocity(const OrcaAgentView& self, std::span<const OrcaAgentView> neighbors,
                           double time_horizon, double dt) {
  if (neighbors.empty()) {
    const double speed = self.preferred_velocity.norm();
    return speed > self.max_speed ? Vec2(self.preferred_velocity * (self.max_speed / speed))
                                  : self.preferred_velocity;
  }
  std::vector<OrcaLine> lines;
  lines.reserve(neighbors.size());
  for (const auto& other : neighbors) {
    lines.push_back(orca_half_plane(self, other, time_horizon, dt));
  }
  const Vec2 preferred = rotate(self.preferred_velocity, kOrcaTieBreakRotation);
  Vec2 velocity = solve_orca_program(lines, self.max_speed, preferred);
  const double speed = velocity.norm();
  if (speed > self.max_speed) {
    velocity *= self.max_speed / speed;
  }
  return velocity;
}

Vec2 goal_directed_velocity(const Vec2& position, const Vec2& goal, double preferred_speed,
                            double dt) {
  const Vec2 to_goal = goal - position;
  const double distance = to_goal.norm();
  if (distance < kEpsilon) {
    return Vec2::Zero();
  }
  const double speed = std::min(preferred_speed, distance / dt);
  return to_goal * (speed / distance);
}

ActionCommand velocity_to_action(const Vec2& velocity, double heading, double preferred_speed,
                                 double max_delta_heading) {
  ActionCommand action;
  const double speed = velocity.norm();
  action.speed = std::min(speed, preferred_speed);
  if (speed > kEpsilon) {
    const double delta = wrap_angle(std::atan2(velocity.y(), velocity.x()) - heading);
    action.delta_heading = std::clamp(delta, -max_delta_heading, max_delta_heading);
  }
  return action;
}

ActionCommand cautious_policy(const RobotView& robot, std::span<const HumanView> humans,
                              const FallbackConfig& config) {
  OrcaAgentView self;
  self.position = robot.position;
  self.velocity = robot.velocity;
  self.radius = robot.radius;
  self.max_speed = robot.max_speed;
  self.preferred_velocity =
      goal_directed_velocity(robot.position, robot.goal, robot.preferred_speed, config.dt);

  std::vector<OrcaAgentView> neighbors;
  neighbors.reserve(humans.size());
  for (const auto& human : humans) {
    OrcaAgentView view;
    view.position = human.position;
    view.velocity = human.velocity;
    view.radius = human.radius * config.inflation;
    neighbors.push_back(view);
  }
  const Vec2 velocity = compute_orca_velocity(self, neighbors, config.time_horizon, config.dt);
  return velocity_to_action(velocity, robot.heading, robot.preferred_speed,
                            config.max_delta_heading);
}

}  // namespace safenav

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

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "orca_oracle.hpp"
#include "safenav/crowd_sim.hpp"
#include "safenav/orca.hpp"

using namespace safenav;

namespace {

constexpr double kHorizon = 2.0;
constexpr double kDt = 0.25;

// Does relative velocity w lead to overlap within the horizon? Closed-form root of
// |p - w t| = r, independent of the library's cone geometry.
bool in_velocity_obstacle(const Vec2& p, double r, const Vec2& w, double horizon) {
  const double a = w.squaredNorm();
  const double b = -2.0 * p.dot(w);
  const double c = p.squaredNorm() - r * r;
  if (c < 0.0) return true;
  if (a == 0.0) return false;
  const double disc = b * b - 4.0 * a * c;
  if (disc <= 0.0) return false;
  const double t = (-b - std::sqrt(disc)) / (2.0 * a);
  return t >= 0.0 && t < horizon;
}

struct Geometry {
  OrcaAgentView self;
  OrcaAgentView other;
};

Geometry random_geometry(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> dist(0.8, 4.0);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  Geometry g;
  g.self.radius = 0.3;
  g.other.radius = 0.3;
  g.self.max_speed = 1.0;
  g.other.position = dist(rng) * heading_vector(ang(rng));
  g.self.velocity = {0.8 * unit(rng), 0.8 * unit(rng)};
  g.other.velocity = {0.8 * unit(rng), 0.8 * unit(rng)};
  g.self.preferred_velocity = heading_vector(ang(rng));
  return g;
}

}  // namespace

TEST_SUITE("orca") {

TEST_CASE("no neighbors returns the clipped preferred velocity") {
  OrcaAgentView self;
  self.max_speed = 1.0;
  self.preferred_velocity = {0.3, 0.4};
  CHECK(compute_orca_velocity(self, {}, kHorizon, kDt) == self.preferred_velocity);
  self.preferred_velocity = {3.0, 4.0};
  const Vec2 v = compute_orca_velocity(self, {}, kHorizon, kDt);
  CHECK(v.x() == doctest::Approx(0.6));
  CHECK(v.y() == doctest::Approx(0.8));
}

TEST_CASE("half-plane offset matches the brute-force velocity obstacle boundary") {
  std::mt19937_64 rng(7);
  int checked = 0;
  while (checked < 50) {
    const Geometry g = random_geometry(rng);
    const Vec2 p = g.other.position - g.self.position;
    const double r = g.self.radius + g.other.radius;
    const Vec2 v_rel = g.self.velocity - g.other.velocity;
    const OrcaLine line = orca_half_plane(g.self, g.other, kHorizon, kDt);
    // u = 2 (point - v_self); |u| is the distance from v_rel to the obstacle boundary.
    const double u = 2.0 * (line.point - g.self.velocity).norm();

    constexpr int n = 801;
    const double span = 4.0;
    const double h = 2.0 * span / (n - 1);
    const bool inside = in_velocity_obstacle(p, r, v_rel, kHorizon);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Vec2 w(v_rel.x() - span + i * h, v_rel.y() - span + j * h);
        if (in_velocity_obstacle(p, r, w, kHorizon) != inside) {
          best = std::min(best, (w - v_rel).norm());
        }
      }
    }
    if (!std::isfinite(best)) continue;
    CHECK(std::abs(u - best) <= h * std::sqrt(2.0));
    ++checked;
  }
}

TEST_CASE("single-neighbor solution matches the velocity-grid oracle") {
  std::mt19937_64 rng(11);
  constexpr int n = 2001;
  for (int trial = 0; trial < 50; ++trial) {
    Geometry g = random_geometry(rng);
    const OrcaLine line = orca_half_plane(g.self, g.other, kHorizon, kDt);
    const Vec2 pref = rotate(g.self.preferred_velocity, kOrcaTieBreakRotation);
    const double vmax = g.self.max_speed;
    const double h = 2.0 * vmax / (n - 1);
    const auto grid = oracle::grid_search(line, vmax, pref, n);
    const Vec2 best = grid.best;
    const double best_cost = grid.cost;
    const OrcaAgentView neighbors[] = {g.other};
    const Vec2 v = compute_orca_velocity(g.self, neighbors, kHorizon, kDt);
    INFO("trial " << trial);
    CHECK(v.norm() <= vmax + 1e-9);
    if (std::isfinite(best_cost)) {
      const double d_solver = (v - pref).norm();
      const double d_grid = std::sqrt(best_cost);
      CHECK(cross(line.direction, v - line.point) >= -1e-9);
      CHECK(d_solver <= d_grid + 1e-12);
      CHECK(d_grid - d_solver <= h * std::sqrt(2.0));
      // Off-line grid points trade a perpendicular offset of up to h*sqrt(2) for a slide of
      // about sqrt(2 * d * h * sqrt(2)) along the line at equal cost.
      CHECK((v - best).norm() <= 2.0 * h + std::sqrt(2.0 * d_solver * h * std::sqrt(2.0)) * 1.01);
    } else {
      // Disk and half-plane are disjoint; the least-violation answer sits on the disk edge.
      CHECK(v.norm() == doctest::Approx(vmax));
    }
  }
}

TEST_CASE("program with no lines returns the preferred velocity") {
  const Vec2 pref(0.2, -0.1);
  CHECK(solve_orca_program({}, 1.0, pref) == pref);
}

TEST_CASE("infeasible program minimizes the largest violation") {
  // Two opposing half-planes y >= 0.5 and y <= -0.5: best compromise is y = 0.
  const OrcaLine lines[] = {{{0.0, 0.5}, {1.0, 0.0}}, {{0.0, -0.5}, {-1.0, 0.0}}};
  const Vec2 v = solve_orca_program(lines, 1.0, {0.0, 1.0});
  CHECK(std::abs(v.y()) < 1e-9);
}

TEST_CASE("symmetric head-on agents deviate to the same side") {
  OrcaAgentView a;
  a.position = {-2.0, 0.0};
  a.velocity = {1.0, 0.0};
  a.preferred_velocity = {1.0, 0.0};
  OrcaAgentView b;
  b.position = {2.0, 0.0};
  b.velocity = {-1.0, 0.0};
  b.preferred_velocity = {-1.0, 0.0};
  const OrcaAgentView na[] = {b};
  const OrcaAgentView nb[] = {a};
  const Vec2 va = compute_orca_velocity(a, na, kHorizon, kDt);
  const Vec2 vb = compute_orca_velocity(b, nb, kHorizon, kDt);
  CHECK(va.x() == doctest::Approx(-vb.x()).epsilon(1e-9));
  CHECK(va.y() == doctest::Approx(-vb.y()).epsilon(1e-9));
  CHECK(std::abs(va.y()) > 1e-3);
  // Point symmetry means each passes on its own left (or right): the same side.
  CHECK(cross(a.velocity, va) * cross(b.velocity, vb) > 0.0);
}

TEST_CASE("100 head-on swaps without collision") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto run = oracle::head_on_swap(seed);
    INFO("seed " << seed);
    CHECK(run.min_gap >= 0.0);
    CHECK(run.arrived);
  }
}

TEST_CASE("goal-directed velocity does not overshoot") {
  const Vec2 v = goal_directed_velocity({0.0, 0.0}, {0.1, 0.0}, 1.0, 0.25);
  CHECK(v.x() == doctest::Approx(0.4));
  CHECK(goal_directed_velocity({1.0, 1.0}, {1.0, 1.0}, 1.0, 0.25) == Vec2::Zero());
}

TEST_CASE("velocity to action conversion") {
  const auto a = velocity_to_action({0.0, 2.0}, 0.0, 1.0, std::numbers::pi / 4);
  CHECK(a.speed == 1.0);
  CHECK(a.delta_heading == doctest::Approx(std::numbers::pi / 4));
  const auto b = velocity_to_action({0.5, 0.0}, 0.1, 1.0, std::numbers::pi / 4);
  CHECK(b.speed == doctest::Approx(0.5));
  CHECK(b.delta_heading == doctest::Approx(-0.1));
}

TEST_CASE("cautious policy") {
  RobotView robot;
  robot.position = {0.0, 0.0};
  robot.velocity = {1.0, 0.0};
  robot.goal = {10.0, 0.0};
  FallbackConfig cfg;

  SUBCASE("no humans heads straight to the goal at preferred speed") {
    const auto a = cautious_policy(robot, {}, cfg);
    CHECK(a.speed == doctest::Approx(1.0));
    CHECK(std::abs(a.delta_heading) < 1e-12);
  }

  const HumanView humans[] = {{{1.2, 0.05}, {-0.5, 0.0}, 0.3}};

  SUBCASE("unit inflation equals plain ORCA") {
    cfg.inflation = 1.0;
    OrcaAgentView self{robot.position, robot.velocity, robot.radius,
                       goal_directed_velocity(robot.position, robot.goal, 1.0, cfg.dt), 1.0};
    const OrcaAgentView other[] = {{humans[0].position, humans[0].velocity, 0.3, Vec2::Zero(), 1.0}};
    const Vec2 v = compute_orca_velocity(self, other, cfg.time_horizon, cfg.dt);
    const auto expected = velocity_to_action(v, 0.0, 1.0, cfg.max_delta_heading);
    const auto a = cautious_policy(robot, humans, cfg);
    CHECK(a.speed == expected.speed);
    CHECK(a.delta_heading == expected.delta_heading);
  }

  SUBCASE("inflation deviates further from a human ahead") {
    cfg.inflation = 1.0;
    const auto plain = cautious_policy(robot, humans, cfg);
    cfg.inflation = 1.5;
    const auto inflated = cautious_policy(robot, humans, cfg);
    CHECK(std::abs(inflated.delta_heading) > std::abs(plain.delta_heading));
  }
}

}  // TEST_SUITE

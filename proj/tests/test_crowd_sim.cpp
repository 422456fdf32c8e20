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
#include <vector>

#include "oracles.hpp"
#include "safenav/crowd_sim.hpp"

using namespace safenav;

namespace {

bool same_world(const WorldState& a, const WorldState& b) {
  if (a.agents.size() != b.agents.size() || a.time_step != b.time_step) return false;
  for (std::size_t i = 0; i < a.agents.size(); ++i) {
    const auto& x = a.agents[i];
    const auto& y = b.agents[i];
    if (x.position != y.position || x.velocity != y.velocity || x.radius != y.radius ||
        x.goal_position != y.goal_position || x.preferred_speed != y.preferred_speed ||
        x.proxemic_radius != y.proxemic_radius || x.heading != y.heading) {
      return false;
    }
  }
  return true;
}

// Two-agent world with the human parked far away.
WorldState far_world() {
  WorldState w;
  AgentState robot;
  robot.position = {0.0, 0.0};
  robot.goal_position = {5.0, 0.0};
  AgentState human;
  human.position = {0.0, 10.0};
  human.goal_position = human.position;
  human.preferred_speed = 0.8;
  human.proxemic_radius = 0.4;
  w.agents = {robot, human};
  return w;
}

}  // namespace

TEST_SUITE("crowd_sim") {

TEST_CASE("position swap places antipodal agents on the circle") {
  const EnvConfig cfg;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const WorldState w = sample_initial_world(ScenarioSpec::position_swap(), {}, cfg, seed);
    REQUIRE(w.agents.size() == 2);
    const auto& r = w.agents[0];
    const auto& h = w.agents[1];
    CHECK(r.position.norm() == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(h.position.norm() == doctest::Approx(7.0).epsilon(1e-12));
    CHECK((r.position + h.position).norm() < 1e-12);
    CHECK(r.goal_position == h.position);
    CHECK(h.goal_position == r.position);
    CHECK(h.proxemic_radius >= 0.3);
    CHECK(h.proxemic_radius <= 0.4);
    CHECK(h.preferred_speed >= 0.5);
    CHECK(h.preferred_speed <= 1.0);
  }
}

TEST_CASE("reset is deterministic and seed dependent") {
  const auto spec = ScenarioSpec::circle_crossing(5);
  PerturbationSpec p;
  p.extra_humans = 2;
  const EnvConfig cfg;
  const WorldState a = sample_initial_world(spec, p, cfg, 42);
  const WorldState b = sample_initial_world(spec, p, cfg, 42);
  const WorldState c = sample_initial_world(spec, p, cfg, 43);
  CHECK(a.agents.size() == 8);
  CHECK(same_world(a, b));
  CHECK_FALSE(same_world(a, c));
}

TEST_CASE("spawned agents respect the clearance") {
  const EnvConfig cfg;
  for (auto spec : {ScenarioSpec::circle_crossing(6), ScenarioSpec::circle_interaction(6),
                    ScenarioSpec::random(6)}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const WorldState w = sample_initial_world(spec, {}, cfg, seed);
      for (std::size_t i = 0; i < w.agents.size(); ++i) {
        for (std::size_t j = i + 1; j < w.agents.size(); ++j) {
          // The robot is placed first; humans are rejected against everyone before them.
          CHECK(gap_distance(w.agents[i], w.agents[j]) >= cfg.spawn_clearance - 1e-12);
        }
      }
    }
  }
}

TEST_CASE("velocity scale multiplies human preferred speeds") {
  const EnvConfig cfg;
  PerturbationSpec p;
  p.vel_scale = 2.0;
  const WorldState a = sample_initial_world(ScenarioSpec::circle_crossing(3), {}, cfg, 9);
  const WorldState b = sample_initial_world(ScenarioSpec::circle_crossing(3), p, cfg, 9);
  for (std::size_t i = 1; i < a.agents.size(); ++i) {
    CHECK(b.agents[i].preferred_speed == doctest::Approx(2.0 * a.agents[i].preferred_speed));
  }
  CHECK(b.agents[0].preferred_speed == a.agents[0].preferred_speed);
}

TEST_CASE("infeasible spawn raises") {
  EnvConfig cfg;
  cfg.spawn_attempts = 5;
  auto spec = ScenarioSpec::circle_crossing(40);
  spec.circle_radius = 1.0;
  CHECK_THROWS_AS(sample_initial_world(spec, {}, cfg, 1), ScenarioInfeasible);
}

TEST_CASE("invalid specs are rejected") {
  auto spec = ScenarioSpec::position_swap();
  spec.human_count = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = ScenarioSpec::position_swap();
  spec.speed_range = {1.0, 0.5};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  PerturbationSpec p;
  p.sigma_vel = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.vel_scale = 0.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.sigma_obs = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("observation layout") {
  EnvConfig cfg;
  WorldState w;
  AgentState robot;
  robot.position = {1.0, 1.0};
  robot.velocity = {0.0, 0.5};
  robot.heading = std::numbers::pi / 2;
  robot.goal_position = {1.0, 4.0};
  AgentState near;
  near.position = {1.0, 2.0};
  near.velocity = {0.5, 0.5};
  near.radius = 0.25;
  AgentState far;
  far.position = {4.0, 1.0};
  w.agents = {robot, far, near};

  const Observation obs = make_observation(w, cfg);
  REQUIRE(obs.features.size() == 35);
  CHECK(obs.features[0] == doctest::Approx(3.0));
  CHECK(obs.features[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(obs.features[2] == doctest::Approx(0.5));
  CHECK(obs.features[3] == doctest::Approx(std::numbers::pi / 2));
  CHECK(obs.features[4] == doctest::Approx(0.3));
  // Nearest human first, in the robot frame (x forward = world +y).
  CHECK(obs.features[5] == doctest::Approx(1.0));
  CHECK(std::abs(obs.features[6]) < 1e-12);
  CHECK(obs.features[7] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(obs.features[8] == doctest::Approx(-0.5));
  CHECK(obs.features[9] == doctest::Approx(0.25));
  CHECK(std::abs(obs.features[10]) < 1e-12);
  CHECK(obs.features[11] == doctest::Approx(-3.0));
  for (int i = 15; i < 35; ++i) CHECK(obs.features[i] == 0.0);
}

TEST_CASE("observation noise") {
  Observation obs;
  obs.features = Eigen::VectorXd::LinSpaced(5, -1.0, 1.0);
  Rng rng = make_rng(3);
  const Observation same = apply_observation_noise(obs, 0.0, rng);
  CHECK(same.features == obs.features);

  constexpr int kDraws = 100000;
  for (double sigma : {1.0, 2.0}) {
    Observation zero;
    zero.features = Eigen::VectorXd::Zero(3);
    std::vector<std::vector<double>> samples(3);
    Rng r = make_rng(11, static_cast<std::uint64_t>(sigma));
    for (int k = 0; k < kDraws; ++k) {
      const auto noisy = apply_observation_noise(zero, sigma, r);
      for (int i = 0; i < 3; ++i) samples[i].push_back(noisy.features[i]);
    }
    for (const auto& s : samples) {
      CHECK(std::abs(oracle::mean(s)) < 0.02 * sigma);
      CHECK(oracle::population_variance(s) == doctest::Approx(sigma * sigma).epsilon(0.03));
    }
  }
}

TEST_CASE("action noise") {
  Rng rng = make_rng(5);
  const ActionCommand a{0.7, 0.2};
  const ActionCommand same = apply_action_noise(a, 0.0, 0.0, rng);
  CHECK(same.speed == a.speed);
  CHECK(same.delta_heading == a.delta_heading);

  constexpr int kDraws = 100000;
  std::vector<double> speeds;
  std::vector<double> headings;
  for (int k = 0; k < kDraws; ++k) {
    const auto n = apply_action_noise({1.0, 0.0}, 0.3, 1.0, rng);
    CHECK(n.speed >= 0.0);
    CHECK(n.speed <= 1.0);
    speeds.push_back(n.speed);
    headings.push_back(n.delta_heading);
  }
  CHECK(oracle::mean(speeds) == doctest::Approx(0.5).epsilon(0.01));
  CHECK(oracle::population_variance(speeds) == doctest::Approx(1.0 / 12.0).epsilon(0.03));
  CHECK(oracle::population_variance(headings) == doctest::Approx(0.09).epsilon(0.03));

  for (int k = 0; k < 10000; ++k) {
    const auto n = apply_action_noise({1.0, 0.0}, 0.0, 0.2, rng);
    CHECK(n.speed >= 0.8);
    CHECK(n.speed <= 1.0);
  }
  CHECK(apply_action_noise({-0.5, 0.0}, 0.0, 0.5, rng).speed == 0.0);
}

TEST_CASE("reward cases") {
  const RewardConfig rc;
  WorldState w = far_world();
  StepInfo info;
  info.previous_goal_distance = 5.0;
  info.goal_distance = 5.0;

  // Zero speed, far human: only the time penalty.
  CHECK(compute_reward(w, {0.0, 0.0}, info, rc) == doctest::Approx(-0.01));

  // Progress 0.25 at speed 1 with mean preferred speed 0.8.
  info.goal_distance = 4.75;
  CHECK(compute_reward(w, {1.0, 0.0}, info, rc) == doctest::Approx(-0.01 + 0.25 - 0.05 * 0.2));

  // Gap 0.1 inside a 0.4 proxemic radius.
  info.goal_distance = 5.0;
  WorldState close = w;
  close.agents[1].position = {0.0, 0.7};
  const double inside = compute_reward(close, {0.0, 0.0}, info, rc);
  CHECK(inside == doctest::Approx(-0.01 - 0.25 * (1.0 - 0.1 / 0.4)));
  CHECK(inside < compute_reward(w, {0.0, 0.0}, info, rc));

  info.outcome = Outcome::collision;
  CHECK(compute_reward(w, {0.0, 0.0}, info, rc) == -5.0);
  info.outcome = Outcome::goal;
  CHECK(compute_reward(w, {0.0, 0.0}, info, rc) == 5.0);
}

TEST_CASE("step outcomes") {
  CrowdEnv env;
  env.reset(ScenarioSpec::position_swap(), {}, 1);

  SUBCASE("non-finite actions are rejected") {
    CHECK_THROWS_AS(env.step({std::numeric_limits<double>::quiet_NaN(), 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(env.step({0.0, std::numeric_limits<double>::infinity()}), std::invalid_argument);
  }

  SUBCASE("a terminated episode refuses further steps") {
    StepResult r;
    do {
      r = env.step({0.0, 0.0});
    } while (!r.done);
    CHECK(r.info.outcome != Outcome::running);
    CHECK(r.info.outcome != Outcome::goal);
    CHECK_THROWS_AS(env.step({0.0, 0.0}), std::logic_error);
  }
}

TEST_CASE("goal reached away from humans") {
  CrowdEnv env;
  auto spec = ScenarioSpec::position_swap();
  env.reset(spec, {}, 2);
  // Swerve around the oncoming human: turn, go, turn back.
  const Vec2 start = env.world().robot().position;
  const Vec2 goal = env.world().robot().goal_position;
  StepResult r;
  int t = 0;
  do {
    const auto& robot = env.world().robot();
    const Vec2 mid = 0.5 * (start + goal) + 3.0 * rotate((goal - start).normalized(), std::numbers::pi / 2);
    const Vec2 target = t < 20 ? mid : goal;
    const Vec2 to = target - robot.position;
    const double want = wrap_angle(std::atan2(to.y(), to.x()) - robot.heading);
    r = env.step({1.0, want});
    ++t;
  } while (!r.done);
  CHECK(r.info.outcome == Outcome::goal);
  CHECK(r.reward == 5.0);
}

TEST_CASE("collision ends the episode with the penalty") {
  CrowdEnv env;
  auto spec = ScenarioSpec::position_swap();
  env.reset(spec, {}, 3);
  StepResult r;
  do {
    // Chase the human; ORCA humans dodge a robot that only drives straight.
    const auto& w = env.world();
    const Vec2 to = w.agents[1].position - w.robot().position;
    r = env.step({1.0, wrap_angle(std::atan2(to.y(), to.x()) - w.robot().heading)});
  } while (!r.done);
  CHECK(r.info.outcome == Outcome::collision);
  CHECK(r.reward == -5.0);
  CHECK(r.info.min_human_distance < 0.0);
}

TEST_CASE("identical seeds and actions give identical trajectories") {
  PerturbationSpec p;
  p.sigma_obs = 0.5;
  p.sigma_head = 0.1;
  p.sigma_vel = 0.3;
  CrowdEnv a, b;
  Observation oa = a.reset(ScenarioSpec::circle_crossing(4), p, 17);
  Observation ob = b.reset(ScenarioSpec::circle_crossing(4), p, 17);
  CHECK(oa.features == ob.features);
  for (int t = 0; t < 60 && !a.done(); ++t) {
    const ActionCommand cmd{0.6, 0.05 * std::sin(t)};
    const auto ra = a.step(cmd);
    const auto rb = b.step(cmd);
    CHECK(ra.observation.features == rb.observation.features);
    CHECK(ra.reward == rb.reward);
    CHECK(ra.done == rb.done);
    CHECK(same_world(a.world(), b.world()));
  }
}

TEST_CASE("identity perturbation matches the unperturbed simulator") {
  CrowdEnv env;
  env.reset(ScenarioSpec::circle_crossing(3), {}, 8);
  for (int t = 0; t < 30 && !env.done(); ++t) {
    const ActionCommand cmd{0.5, 0.1};
    const auto r = env.step(cmd);
    CHECK(r.info.applied_action.speed == 0.5);
    CHECK(r.info.applied_action.delta_heading == 0.1);
    CHECK(r.observation.features == make_observation(env.world(), env.config()).features);
  }
}

}  // TEST_SUITE

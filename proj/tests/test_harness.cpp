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
#include <vector>

#include "safenav/harness.hpp"

using namespace safenav;

namespace {

Checkpoint tiny_checkpoint(std::uint64_t seed) {
  const EnvConfig env;
  PolicyArchitecture arch;
  arch.input_size = observation_size(env);
  arch.hidden_size = 8;
  arch.actor_hidden = 8;
  arch.critic_hidden = 8;
  Checkpoint c;
  c.policy = Policy(arch, seed);
  c.policy.set_input_scale(default_input_scale(env));
  c.feature_bounds.min = Eigen::VectorXd::Constant(8, -1.0);
  c.feature_bounds.max = Eigen::VectorXd::Constant(8, 1.0);
  c.init_seed = seed;
  return c;
}

bool same_metrics(const EpisodeMetrics& a, const EpisodeMetrics& b) {
  return a.seed == b.seed && a.outcome == b.outcome && a.episode_return == b.episode_return &&
         a.proxemic_violations == b.proxemic_violations &&
         a.min_human_distance == b.min_human_distance && a.steps == b.steps &&
         a.cautious_steps == b.cautious_steps &&
         a.uncertainty_sum.epistemic == b.uncertainty_sum.epistemic &&
         a.uncertainty_sum.aleatoric == b.uncertainty_sum.aleatoric &&
         a.uncertainty_sum.feature_uncertainty == b.uncertainty_sum.feature_uncertainty;
}

EpisodeOptions dropout_options() {
  EpisodeOptions o;
  o.uncertainty = UncertaintyMode::dropout;
  o.mc_samples = 5;
  return o;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("bundles") {
  const Checkpoint a = tiny_checkpoint(1);
  const Checkpoint b = tiny_checkpoint(2);
  const Checkpoint one[] = {a};
  CHECK_THROWS_AS(PolicyBundle::ensemble(one), std::invalid_argument);
  Checkpoint wide = tiny_checkpoint(3);
  PolicyArchitecture arch = wide.policy.architecture();
  arch.hidden_size = 9;
  wide.policy = Policy(arch, 3);
  const Checkpoint mixed[] = {a, wide};
  CHECK_THROWS_AS(PolicyBundle::ensemble(mixed), std::invalid_argument);
  const Checkpoint pair[] = {a, b};
  const PolicyBundle e = PolicyBundle::ensemble(pair);
  CHECK(e.members.size() == 2);
  CHECK(e.control().parameters() == a.policy.parameters());
}

TEST_CASE("mismatched input size is rejected") {
  EnvConfig env;
  env.max_humans = 3;
  const PolicyBundle bundle = PolicyBundle::single(tiny_checkpoint(1));
  CHECK_THROWS_AS(run_episode(bundle, ScenarioSpec::position_swap(), {}, env, 1, {}),
                  std::invalid_argument);
}

TEST_CASE("ensemble uncertainty needs two members") {
  const PolicyBundle bundle = PolicyBundle::single(tiny_checkpoint(1));
  EpisodeOptions o;
  o.uncertainty = UncertaintyMode::ensemble;
  CHECK_THROWS_AS(run_episode(bundle, ScenarioSpec::position_swap(), {}, {}, 1, o),
                  std::invalid_argument);
  const double grid[] = {0.0, 1.0};
  const std::uint64_t seeds[] = {1};
  CHECK_THROWS_AS(perturbation_sweep(bundle, ScenarioSpec::position_swap(), {},
                                     SweepAxis::obs_noise, grid, seeds, o),
                  std::invalid_argument);
}

TEST_CASE("episodes end in exactly one outcome and report the discounted return") {
  const PolicyBundle bundle = PolicyBundle::single(tiny_checkpoint(4));
  EpisodeOptions o = dropout_options();
  o.record_trace = true;
  const auto seeds = evaluation_seeds(7, 6);
  const auto eps = run_episodes(bundle, ScenarioSpec::circle_crossing(4), {}, {}, seeds, o);
  for (const auto& e : eps) {
    CHECK(e.outcome != Outcome::running);
    REQUIRE(static_cast<int>(e.trace.size()) == e.steps);
    double g = 0.0;
    double discount = 1.0;
    for (const auto& step : e.trace) {
      g += discount * step.reward;
      discount *= 0.99;
    }
    CHECK(e.episode_return == doctest::Approx(g).epsilon(1e-12));
    CHECK(e.uncertainty_steps == e.steps);
    CHECK(std::isfinite(e.episode_return));
  }
}

TEST_CASE("serial and parallel execution agree") {
  const Checkpoint pair[] = {tiny_checkpoint(1), tiny_checkpoint(2)};
  const PolicyBundle bundle = PolicyBundle::ensemble(pair);
  PerturbationSpec p;
  p.sigma_obs = 0.3;
  for (auto mode : {UncertaintyMode::dropout, UncertaintyMode::ensemble}) {
    EpisodeOptions o = dropout_options();
    o.uncertainty = mode;
    const auto seeds = evaluation_seeds(3, 8);
    const auto serial = run_episodes(bundle, ScenarioSpec::circle_crossing(3), p, {}, seeds, o,
                                     Execution::serial);
    const auto parallel = run_episodes(bundle, ScenarioSpec::circle_crossing(3), p, {}, seeds, o,
                                       Execution::parallel);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      CHECK(serial[i].seed == seeds[i]);
      CHECK(same_metrics(serial[i], parallel[i]));
    }
  }
}

TEST_CASE("uncertainty probes do not steer the robot") {
  const PolicyBundle bundle = PolicyBundle::single(tiny_checkpoint(5));
  const auto seeds = evaluation_seeds(11, 5);
  const auto plain = run_episodes(bundle, ScenarioSpec::circle_crossing(3), {}, {}, seeds, {});
  const auto probed =
      run_episodes(bundle, ScenarioSpec::circle_crossing(3), {}, {}, seeds, dropout_options());
  for (std::size_t i = 0; i < plain.size(); ++i) {
    CHECK(plain[i].outcome == probed[i].outcome);
    CHECK(plain[i].episode_return == probed[i].episode_return);
    CHECK(plain[i].steps == probed[i].steps);
  }
}

TEST_CASE("evaluation summaries") {
  const PolicyBundle bundle = PolicyBundle::single(tiny_checkpoint(6));
  const std::uint64_t seeds[] = {1, 2};
  std::vector<EpisodeMetrics> records;
  const auto s = run_evaluation(bundle, ScenarioSpec::circle_crossing(4), {}, 10, seeds, &records);
  CHECK(s.episodes == 20);
  CHECK(records.size() == 20);
  CHECK(s.goal_pct + s.collision_pct + s.timeout_pct == doctest::Approx(100.0));
  const auto again = run_evaluation(bundle, ScenarioSpec::circle_crossing(4), {}, 10, seeds);
  CHECK(again.return_mean == s.return_mean);
  CHECK(again.collision_pct == s.collision_pct);

  // Recompute every cell from the records.
  int goals = 0, pv = 0;
  double ret = 0.0;
  for (const auto& e : records) {
    goals += e.outcome == Outcome::goal;
    pv += e.proxemic_violations;
    ret += e.episode_return;
  }
  CHECK(s.goal_pct == doctest::Approx(100.0 * goals / 20.0));
  CHECK(s.proxemic_violations_total == pv);
  CHECK(s.return_mean == doctest::Approx(ret / 20.0));

  const std::uint64_t single[] = {3};
  const auto one = run_evaluation(bundle, ScenarioSpec::position_swap(), {}, 1, single);
  for (double pct : {one.goal_pct, one.collision_pct, one.timeout_pct}) {
    CHECK((pct == 0.0 || pct == 100.0));
  }
  CHECK(one.goal_pct + one.collision_pct + one.timeout_pct == 100.0);
}

TEST_CASE("evaluation seeds are distinct and reproducible") {
  const auto a = evaluation_seeds(1, 50);
  const auto b = evaluation_seeds(1, 50);
  const auto c = evaluation_seeds(2, 50);
  CHECK(a == b);
  CHECK(a != c);
  std::vector<std::uint64_t> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  CHECK_THROWS_AS(evaluation_seeds(1, 0), std::invalid_argument);
}

TEST_CASE("normalized rate of change") {
  CHECK(*normalized_rate_of_change(0.1, 0.5, 0.0, 2.0) == doctest::Approx(2.0));
  CHECK(*normalized_rate_of_change(0.3, 0.3, 0.0, 2.0) == 0.0);
  CHECK(*normalized_rate_of_change(0.4, 0.2, 0.0, 2.0) < 0.0);
  CHECK_FALSE(normalized_rate_of_change(0.0, 0.2, 0.0, 2.0).has_value());
  CHECK_THROWS_AS(normalized_rate_of_change(0.1, 0.2, 2.0, 2.0), std::invalid_argument);
}

TEST_CASE("sweep grids and perturbations") {
  CHECK(default_grid(SweepAxis::obs_noise).size() == 11);
  CHECK(default_grid(SweepAxis::action_noise).size() == 11);
  CHECK(default_grid(SweepAxis::obs_noise).back() == doctest::Approx(2.0));
  CHECK(default_grid(SweepAxis::velocity_scale).size() == 8);
  const auto agents = default_grid(SweepAxis::human_count);
  CHECK(agents.size() == 6);
  CHECK(agents.front() == 2.0);
  CHECK(agents.back() == 7.0);

  CHECK(perturbation_at(SweepAxis::obs_noise, 0.0).is_identity());
  CHECK(perturbation_at(SweepAxis::human_count, 2.0).is_identity());
  CHECK(perturbation_at(SweepAxis::velocity_scale, 1.0).is_identity());
  CHECK(perturbation_at(SweepAxis::human_count, 7.0).extra_humans == 5);
  CHECK(perturbation_at(SweepAxis::obs_noise, 1.4).sigma_obs == 1.4);
  const auto act = perturbation_at(SweepAxis::action_noise, 1.6);
  CHECK(act.sigma_head == 1.6);
  CHECK(act.sigma_vel == 1.0);
  CHECK(perturbation_at(SweepAxis::velocity_scale, 3.0).vel_scale == 3.0);
  CHECK_THROWS_AS(perturbation_at(SweepAxis::human_count, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(perturbation_at(SweepAxis::human_count, 2.5), std::invalid_argument);
  for (auto axis : {SweepAxis::obs_noise, SweepAxis::action_noise, SweepAxis::velocity_scale,
                    SweepAxis::human_count}) {
    CHECK(sweep_axis_from_string(to_string(axis)) == axis);
  }
}

TEST_CASE("sweep zero point equals a plain evaluation") {
  const PolicyBundle bundle = PolicyBundle::single(tiny_checkpoint(8));
  const auto seeds = evaluation_seeds(5, 6);
  const double grid[] = {0.0, 1.0, 2.0};
  const EpisodeOptions o = dropout_options();
  std::vector<std::vector<EpisodeMetrics>> records;
  const auto sweep = perturbation_sweep(bundle, ScenarioSpec::position_swap(), {},
                                        SweepAxis::obs_noise, grid, seeds, o, &records);
  REQUIRE(sweep.points.size() == 3);
  REQUIRE(records.size() == 3);
  const auto plain = run_episodes(bundle, ScenarioSpec::position_swap(), {}, {}, seeds, o);
  for (std::size_t i = 0; i < plain.size(); ++i) {
    CHECK(same_metrics(plain[i], records[0][i]));
  }
  int steps = 0, collisions = 0;
  double epistemic_heading = 0.0;
  for (const auto& e : plain) {
    steps += e.uncertainty_steps;
    collisions += e.outcome == Outcome::collision;
    epistemic_heading += e.uncertainty_sum.epistemic[1];
  }
  CHECK(sweep.points[0].steps == steps);
  CHECK(sweep.points[0].collisions == collisions);
  CHECK(sweep.points[0].mean_uncertainty[1] == doctest::Approx(epistemic_heading / steps));

  const double bad[] = {0.0, 0.0};
  CHECK_THROWS_AS(perturbation_sweep(bundle, ScenarioSpec::position_swap(), {},
                                     SweepAxis::obs_noise, bad, seeds, o),
                  std::invalid_argument);

  const auto rates = sweep_rates(sweep);
  for (int k = 0; k < kUncertaintyKinds; ++k) {
    const double u0 = sweep.points.front().mean_uncertainty[k];
    const double u1 = sweep.points.back().mean_uncertainty[k];
    if (u0 > 0.0) {
      CHECK(*rates[k] == doctest::Approx((u1 - u0) / u0 / 2.0));
    } else {
      CHECK_FALSE(rates[k].has_value());
    }
  }
}

TEST_CASE("merging sweeps weights points by steps") {
  SweepResult a, b;
  a.points = {{0.0, {1, 1, 1, 1, 1}, 1, 0, 2, 10}, {1.0, {2, 2, 2, 2, 2}, 0, 1, 2, 30}};
  b.points = {{0.0, {3, 3, 3, 3, 3}, 2, 0, 2, 30}, {1.0, {4, 4, 4, 4, 4}, 1, 1, 2, 10}};
  const SweepResult both[] = {a, b};
  const auto m = merge_sweeps(both);
  CHECK(m.points[0].mean_uncertainty[0] == doctest::Approx((10 * 1 + 30 * 3) / 40.0));
  CHECK(m.points[1].mean_uncertainty[4] == doctest::Approx((30 * 2 + 10 * 4) / 40.0));
  CHECK(m.points[0].collisions == 3);
  CHECK(m.points[1].episodes == 4);
  CHECK(m.points[0].steps == 40);
  b.points[1].strength = 2.0;
  const SweepResult bad[] = {a, b};
  CHECK_THROWS_AS(merge_sweeps(bad), std::invalid_argument);
}

TEST_CASE("safe-action comparison") {
  const PolicyBundle bundle = PolicyBundle::single(tiny_checkpoint(9));
  PerturbationSpec p;
  p.sigma_obs = 1.0;
  const std::uint64_t seeds[] = {1, 2};

  SUBCASE("gate disabled in both arms prevents nothing") {
    EpisodeOptions o = dropout_options();
    o.gate = false;
    const auto cmp = safe_action_comparison(bundle, ScenarioSpec::circle_crossing(6), p, {}, 6, seeds, o);
    CHECK(cmp.collisions_on == cmp.collisions_off);
    for (const auto& g : cmp.groups) {
      CHECK(g.cautious_steps == 0);
      if (g.collisions_off > 0) {
        CHECK(*g.prevented_pct == 0.0);
      } else {
        CHECK_FALSE(g.prevented_pct.has_value());
      }
    }
  }

  SUBCASE("an always-open gate hands control to the fallback") {
    EpisodeOptions o = dropout_options();
    o.gate = true;
    o.record_trace = true;
    o.thresholds = {0.0, 0.0, 1e9, 0.0, 1};
    o.approach_rule = ApproachRule::literal;  // d_t >= d_{t-1} holds on the first step
    const auto eps = run_episodes(bundle, ScenarioSpec::circle_crossing(3), p, {},
                                  evaluation_seeds(4, 3), o);
    for (const auto& e : eps) {
      REQUIRE(!e.trace.empty());
      CHECK(e.trace.front().mode == ControlMode::cautious);
      CHECK(e.cautious_steps > 0);
    }
  }

  SUBCASE("a closed gate never changes the learned arm") {
    EpisodeOptions o = dropout_options();
    o.gate = true;
    o.thresholds = {1e9, 1.0, 0.0, 0.0, 1};
    const auto cmp = safe_action_comparison(bundle, ScenarioSpec::circle_crossing(6), p, {}, 6, seeds, o);
    CHECK(cmp.collisions_on == cmp.collisions_off);
    for (const auto& g : cmp.groups) CHECK(g.cautious_steps == 0);
  }
}

}  // TEST_SUITE

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
#include <random>
#include <vector>

#include "minibatch_fixture.hpp"
#include "oracles.hpp"
#include "safenav/trainer.hpp"

using namespace safenav;


TEST_SUITE("trainer") {

TEST_CASE("GAE matches the direct-sum oracle") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 1.0);
  std::bernoulli_distribution end(0.2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> r(10), v(10), d(10);
    for (int t = 0; t < 10; ++t) {
      r[t] = n(rng);
      v[t] = n(rng);
      d[t] = end(rng) ? 1.0 : 0.0;
    }
    const double last = n(rng);
    const auto gae = compute_gae(r, v, d, last, 0.99, 0.95);
    const auto expect = oracle::gae_direct(r, v, d, last, 0.99, 0.95);
    for (int t = 0; t < 10; ++t) {
      CHECK(std::abs(gae.advantages[t] - expect[t]) < 1e-10);
      CHECK(gae.returns[t] == doctest::Approx(gae.advantages[t] + v[t]));
    }
  }
}

TEST_CASE("GAE special cases") {
  const std::vector<double> r{1.5}, v{0.4}, d{0.0};
  CHECK(compute_gae(r, v, d, 2.0, 0.9, 0.0).advantages[0] == doctest::Approx(1.5 + 0.9 * 2.0 - 0.4));
  const std::vector<double> r3{1.0, -2.0, 0.5}, v3{0.1, 0.2, 0.3}, d3{0, 0, 0};
  const auto g0 = compute_gae(r3, v3, d3, 7.0, 0.0, 0.95);
  for (int t = 0; t < 3; ++t) CHECK(g0.advantages[t] == doctest::Approx(r3[t] - v3[t]));
}

TEST_CASE("variance loss hand cases") {
  Eigen::MatrixX2d s(1, 2);
  s << 1.0, 1.0;
  CHECK(variance_loss(s, Vector2d::Zero(), 0.3, 1.0, 1.0) == 0.3);
  CHECK(variance_loss(s, Vector2d::Zero(), 0.3, 0.0, 1.0) == 0.0);
  CHECK(variance_loss(s, Vector2d(1.0, 1.0), 0.3, 1.0, 1.0) == 0.0);
  Eigen::MatrixX2d two(2, 2);
  two << 1.0, 0.0, 3.0, 2.0;  // 0.5 * 1 and 0.5 * (9 + 4)
  CHECK(variance_loss(two, Vector2d::Zero(), 1.0, 1.0, 1.0) == doctest::Approx((0.5 + 6.5) / 2.0));
  double previous = -1.0;
  for (int t = 0; t <= 10; ++t) {
    const double v = variance_loss(two, Vector2d::Zero(), 0.3, t, 10.0);
    CHECK(v >= previous);
    previous = v;
  }
  CHECK_THROWS_AS(variance_loss(s, Vector2d::Zero(), 0.3, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("analytic loss gradient matches central differences on a tiny network") {
  PolicyArchitecture arch{3, 4, 4, 4};
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 0.5);
  LossSettings s;
  s.progress = 0.7;
  s.lambda_sigma = 0.3;
  s.target_variance = Vector2d(0.1, 0.2);
  s.entropy_coef = 0.01;
  s.dropout_rate = 0.3;
  for (int draw = 0; draw < 20; ++draw) {
    Policy p(arch, 100 + draw);
    for (Eigen::Index i = 0; i < p.parameter_count(); ++i) p.parameters()[i] += n(rng);
    const Minibatch mb = fixture::random_minibatch(p, rng, 5, 3);
    const std::uint64_t mask_seed = 1000 + draw;
    Eigen::VectorXd grad;
    Rng mask = make_rng(mask_seed);
    ppo_loss(p, mb, s, mask, &grad);

    Eigen::VectorXd fd(p.parameter_count());
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < p.parameter_count(); ++i) {
      const double saved = p.parameters()[i];
      p.parameters()[i] = saved + h;
      const double up = fixture::loss_at(p, mb, s, mask_seed);
      p.parameters()[i] = saved - h;
      const double down = fixture::loss_at(p, mb, s, mask_seed);
      p.parameters()[i] = saved;
      fd[i] = (up - down) / (2.0 * h);
    }
    const double rel = (grad - fd).norm() / std::max(fd.norm(), 1e-12);
    CAPTURE(draw);
    CHECK(rel < 1e-4);
  }
}

TEST_CASE("variance loss gradient is zero where the log std is clamped") {
  PolicyArchitecture arch{3, 4, 4, 4};
  PolicyInit init;
  init.log_std_bias = 3.0;  // far above the 0.25 bound
  Policy p(arch, 5, init);
  std::mt19937_64 rng(2);
  Minibatch mb = fixture::random_minibatch(p, rng, 2, 2);
  for (auto& a : mb.advantages) a.setZero();
  LossSettings s;
  s.value_coef = 0.0;
  s.dropout_rate = 0.0;
  Rng mask = make_rng(1);
  Eigen::VectorXd grad;
  const auto loss = ppo_loss(p, mb, s, mask, &grad);
  CHECK(loss.variance > 0.0);
  CHECK(grad.norm() < 1e-12);
}

TEST_CASE("zero advantages leave the mean head untouched") {
  PolicyArchitecture arch{3, 4, 4, 4};
  Policy p(arch, 3);
  std::mt19937_64 rng(4);
  Minibatch mb = fixture::random_minibatch(p, rng, 4, 2);
  for (auto& a : mb.advantages) a.setZero();
  LossSettings s;
  s.lambda_sigma = 0.0;
  s.entropy_coef = 0.0;
  s.normalize_advantages = false;
  Rng mask = make_rng(1);
  Eigen::VectorXd grad;
  ppo_loss(p, mb, s, mask, &grad);
  const auto [begin, end] = p.mean_head_range();
  CHECK(grad.segment(begin, end - begin).norm() < 1e-8);
}

TEST_CASE("clipped surrogate uses the clipped ratio for positive advantages") {
  // One sample with ratio 1.5 and advantage 1: loss = -min(1.5, 1.2) = -1.2.
  PolicyArchitecture arch{3, 4, 4, 4};
  Policy p(arch, 3);
  std::mt19937_64 rng(9);
  Minibatch mb = fixture::random_minibatch(p, rng, 1, 1);
  Rng no_mask = make_rng(0);
  const BatchOutput out = p.forward_batch(mb.sequences.observations[0], mb.sequences.initial_state, 0.0, no_mask);
  const Vector2d var = (2.0 * out.log_std.col(0).array()).exp().matrix();
  const double logp = gaussian_log_prob(mb.actions[0].col(0), out.action_mean.col(0), var);
  mb.old_log_probs[0][0] = logp - std::log(1.5);
  mb.advantages[0][0] = 1.0;
  LossSettings s;
  s.normalize_advantages = false;
  s.lambda_sigma = 0.0;
  s.dropout_rate = 0.0;
  Rng mask = make_rng(0);
  Eigen::VectorXd grad;
  const auto loss = ppo_loss(p, mb, s, mask, &grad);
  CHECK(loss.policy == doctest::Approx(-1.2));
  const auto [begin, end] = p.mean_head_range();
  CHECK(grad.segment(begin, end - begin).norm() < 1e-12);
}

TEST_CASE("Adam step matches a scalar reference") {
  Eigen::VectorXd params(2), grad(2);
  params << 1.0, -2.0;
  grad << 0.5, -0.25;
  AdamState state;
  adam_step(params, grad, state, 0.1, 1e-8);
  // First step: m_hat = g, v_hat = g^2, so the update is lr * sign(g) up to eps.
  CHECK(params[0] == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(params[1] == doctest::Approx(-1.9).epsilon(1e-6));
  CHECK(state.steps == 1);
}

TEST_CASE("gradient norm clipping") {
  Eigen::VectorXd g(2);
  g << 3.0, 4.0;
  CHECK(clip_gradient_norm(g, 0.5) == doctest::Approx(5.0));
  CHECK(g.norm() == doctest::Approx(0.5).epsilon(1e-5));
  Eigen::VectorXd small(2);
  small << 0.1, 0.0;
  clip_gradient_norm(small, 0.5);
  CHECK(small[0] == 0.1);
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.gamma = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = TrainConfig{};
  c.lambda_sigma = -0.1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = TrainConfig{};
  c.num_steps = 100;  // not a multiple of the sequence length
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("rollout collection") {
  TrainConfig c;
  c.num_envs = 2;
  c.num_steps = 32;
  c.batch_size = 32;
  c.total_timesteps = 64;
  c.architecture.hidden_size = 8;
  c.architecture.actor_hidden = 8;
  c.architecture.critic_hidden = 8;

  Trainer a(c, ScenarioSpec::position_swap());
  RolloutBuffer buf = a.collect_rollouts(32);
  CHECK(buf.size() == 64);
  CHECK(a.timesteps() == 64);
  CHECK_FALSE(buf.advantages_ready);
  CHECK_THROWS_AS(a.update(buf), std::logic_error);

  SUBCASE("same seeds give identical buffers") {
    Trainer b(c, ScenarioSpec::position_swap());
    RolloutBuffer other = b.collect_rollouts(32);
    CHECK(buf.observations == other.observations);
    CHECK(buf.actions == other.actions);
    CHECK(buf.rewards == other.rewards);
  }
  SUBCASE("state snapshots are zero at episode starts") {
    for (Eigen::Index i = 0; i < buf.size(); ++i) {
      if (buf.episode_starts[i] > 0.5) {
        CHECK(buf.states.h1.col(i).isZero(0.0));
        CHECK(buf.states.c2.col(i).isZero(0.0));
      }
    }
    CHECK(buf.episode_starts[buf.index(0, 0)] == 1.0);
  }
  SUBCASE("feature bounds are ordered and only widen") {
    const FeatureBounds before = a.feature_bounds();
    CHECK((before.min.array() <= before.max.array()).all());
    a.collect_rollouts(32);
    CHECK((a.feature_bounds().min.array() <= before.min.array()).all());
    CHECK((a.feature_bounds().max.array() >= before.max.array()).all());
  }
  SUBCASE("update clears the buffer") {
    compute_gae(buf, c.gamma, c.gae_lambda);
    const UpdateStats stats = a.update(buf);
    CHECK(buf.size() == 0);
    CHECK(std::isfinite(stats.policy_loss));
  }
}

TEST_CASE("training is reproducible and T = num_steps runs one cycle") {
  TrainConfig c;
  c.num_envs = 2;
  c.num_steps = 32;
  c.batch_size = 32;
  c.total_timesteps = 64;
  c.architecture = {0, 8, 8, 8};
  const auto r1 = train(c, ScenarioSpec::position_swap());
  const auto r2 = train(c, ScenarioSpec::position_swap());
  CHECK(r1.updates.size() == 1);
  CHECK(r1.checkpoint.policy.parameters() == r2.checkpoint.policy.parameters());
  CHECK(r1.checkpoint.timesteps == 64);
  c.variance_loss = false;
  const auto r3 = train(c, ScenarioSpec::position_swap());
  CHECK(r3.updates.front().variance_loss == 0.0);
}

TEST_CASE("periodic checkpoints are written") {
  TrainConfig c;
  c.num_envs = 1;
  c.num_steps = 16;
  c.batch_size = 16;
  c.total_timesteps = 48;
  c.checkpoint_interval = 1;
  c.architecture = {0, 8, 8, 8};
  const auto dir = std::filesystem::temp_directory_path() / "safenav_test_ckpt";
  std::filesystem::remove_all(dir);
  Trainer t(c, ScenarioSpec::position_swap());
  t.train(dir);
  CHECK(std::filesystem::exists(dir / "step_16.json"));
  CHECK(std::filesystem::exists(dir / "step_48.json"));
  const Checkpoint final_cp = load_checkpoint(dir / "final.json");
  CHECK(final_cp.policy.parameters() == t.policy().parameters());
  CHECK(final_cp.feature_bounds.min == t.feature_bounds().min);
  std::filesystem::remove_all(dir);
}

TEST_CASE("ensemble seeds") {
  TrainConfig c;
  const auto pairs = ensemble_seed_pairs(c, 20);
  CHECK(pairs.size() == 20);
  CHECK_NOTHROW(validate_ensemble_seeds(pairs));
  std::vector<SeedPair> dup{{1, 2}, {1, 2}};
  CHECK_THROWS_AS(validate_ensemble_seeds(dup), std::invalid_argument);
  std::vector<SeedPair> one{{1, 2}};
  CHECK_THROWS_AS(validate_ensemble_seeds(one), std::invalid_argument);
}

TEST_CASE("ensemble training yields distinct members") {
  TrainConfig c;
  c.num_envs = 1;
  c.num_steps = 16;
  c.batch_size = 16;
  c.total_timesteps = 16;
  c.architecture = {0, 8, 8, 8};
  const auto pairs = ensemble_seed_pairs(c, 3);
  const EnsembleResult r = train_ensemble(c, ScenarioSpec::position_swap(), pairs);
  REQUIRE(r.usable());
  CHECK(r.members.size() == 3);
  CHECK(r.members[0].checkpoint.policy.parameters() != r.members[1].checkpoint.policy.parameters());
  CHECK(r.members[1].checkpoint.init_seed == pairs[1].init_seed);
}

}  // TEST_SUITE

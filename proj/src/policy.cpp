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

#include "safenav/policy.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include <Eigen/QR>

namespace safenav {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Layout {
  int input, hidden, actor, critic;
  Index W1, U1, b1, W2, U2, b2;
  Index A1, a1, A2, a2, Mu, mu, Ls, ls;
  Index C1, c1, C2, c2, Vw, vb;
  Index total;
};

Layout make_layout(const PolicyArchitecture& arch) {
  Layout l{};
  l.input = arch.input_size;
  l.hidden = arch.hidden_size;
  l.actor = arch.actor_hidden;
  l.critic = arch.critic_hidden;
  const Index g = 4 * static_cast<Index>(l.hidden);
  Index offset = 0;
  auto take = [&](Index size) {
    const Index at = offset;
    offset += size;
    return at;
  };
  l.W1 = take(g * l.input);
  l.U1 = take(g * l.hidden);
  l.b1 = take(g);
  l.W2 = take(g * l.hidden);
  l.U2 = take(g * l.hidden);
  l.b2 = take(g);
  l.A1 = take(static_cast<Index>(l.actor) * l.hidden);
  l.a1 = take(l.actor);
  l.A2 = take(static_cast<Index>(l.actor) * l.actor);
  l.a2 = take(l.actor);
  l.Mu = take(static_cast<Index>(kActionSize) * l.actor);
  l.mu = take(kActionSize);
  l.Ls = take(static_cast<Index>(kActionSize) * l.actor);
  l.ls = take(kActionSize);
  l.C1 = take(static_cast<Index>(l.critic) * l.hidden);
  l.c1 = take(l.critic);
  l.C2 = take(static_cast<Index>(l.critic) * l.critic);
  l.c2 = take(l.critic);
  l.Vw = take(l.critic);
  l.vb = take(1);
  l.total = offset;
  return l;
}

template <bool Const>
struct NetViews {
  using Scalar = std::conditional_t<Const, const double, double>;
  using M = Eigen::Map<std::conditional_t<Const, const MatrixXd, MatrixXd>>;
  using V = Eigen::Map<std::conditional_t<Const, const VectorXd, VectorXd>>;

  NetViews(Scalar* p, const Layout& l)
      : W1(p + l.W1, 4 * l.hidden, l.input),
        U1(p + l.U1, 4 * l.hidden, l.hidden),
        b1(p + l.b1, 4 * l.hidden),
        W2(p + l.W2, 4 * l.hidden, l.hidden),
        U2(p + l.U2, 4 * l.hidden, l.hidden),
        b2(p + l.b2, 4 * l.hidden),
        A1(p + l.A1, l.actor, l.hidden),
        a1(p + l.a1, l.actor),
        A2(p + l.A2, l.actor, l.actor),
        a2(p + l.a2, l.actor),
        Mu(p + l.Mu, kActionSize, l.actor),
        mu(p + l.mu, kActionSize),
        Ls(p + l.Ls, kActionSize, l.actor),
        ls(p + l.ls, kActionSize),
        C1(p + l.C1, l.critic, l.hidden),
        c1(p + l.c1, l.critic),
        C2(p + l.C2, l.critic, l.critic),
        c2(p + l.c2, l.critic),
        Vw(p + l.Vw, 1, l.critic),
        vb(p + l.vb, 1) {}

  M W1, U1;
  V b1;
  M W2, U2;
  V b2;
  M A1;
  V a1;
  M A2;
  V a2;
  M Mu;
  V mu;
  M Ls;
  V ls;
  M C1;
  V c1;
  M C2;
  V c2;
  M Vw;
  V vb;
};

MatrixXd sigmoid(const MatrixXd& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

struct CellCache {
  MatrixXd x, h_prev, c_prev, i, f, g, o, c, tanh_c;
};

template <typename MW, typename MU, typename VB>
void lstm_forward(const MW& W, const MU& U, const VB& b, const MatrixXd& x, const MatrixXd& h_prev,
                  const MatrixXd& c_prev, MatrixXd& h, MatrixXd& c, CellCache* cache) {
  const Index H = U.cols();
  MatrixXd z = W * x + U * h_prev;
  z.colwise() += b;
  MatrixXd i = sigmoid(z.topRows(H));
  MatrixXd f = sigmoid(z.middleRows(H, H));
  MatrixXd g = z.middleRows(2 * H, H).array().tanh().matrix();
  MatrixXd o = sigmoid(z.bottomRows(H));
  c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  MatrixXd tanh_c = c.array().tanh().matrix();
  h = o.cwiseProduct(tanh_c);
  if (cache != nullptr) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->c_prev = c_prev;
    cache->i = std::move(i);
    cache->f = std::move(f);
    cache->g = std::move(g);
    cache->o = std::move(o);
    cache->c = c;
    cache->tanh_c = std::move(tanh_c);
  }
}

// Accumulates parameter gradients and returns input/state gradients.
template <typename MW, typename MU, typename GW, typename GU, typename GB>
void lstm_backward(const MW& W, const MU& U, const CellCache& k, const MatrixXd& dh,
                   const MatrixXd& dc, GW& dW, GU& dU, GB& db, MatrixXd& dx, MatrixXd& dh_prev,
                   MatrixXd& dc_prev) {
  const Index H = U.cols();
  const Index B = dh.cols();
  const MatrixXd dc_total =
      dc + (dh.array() * k.o.array() * (1.0 - k.tanh_c.array().square())).matrix();
  MatrixXd dz(4 * H, B);
  dz.topRows(H) = (dc_total.array() * k.g.array() * k.i.array() * (1.0 - k.i.array())).matrix();
  dz.middleRows(H, H) =
      (dc_total.array() * k.c_prev.array() * k.f.array() * (1.0 - k.f.array())).matrix();
  dz.middleRows(2 * H, H) = (dc_total.array() * k.i.array() * (1.0 - k.g.array().square())).matrix();
  dz.bottomRows(H) =
      (dh.array() * k.tanh_c.array() * k.o.array() * (1.0 - k.o.array())).matrix();
  dc_prev = dc_total.cwiseProduct(k.f);
  dW.noalias() += dz * k.x.transpose();
  dU.noalias() += dz * k.h_prev.transpose();
  db += dz.rowwise().sum();
  dx.noalias() = W.transpose() * dz;
  dh_prev.noalias() = U.transpose() * dz;
}

void fill_mask(MatrixXd& mask, Index rows, Index cols, double rate, Rng& rng) {
  mask.resize(rows, cols);
  const double keep = 1.0 - rate;
  const double scale = 1.0 / keep;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      mask(i, j) = u(rng) < keep ? scale : 0.0;
    }
  }
}

MatrixXd orthogonal(Index rows, Index cols, double gain, Rng& rng) {
  const bool transpose = rows < cols;
  const Index r = transpose ? cols : rows;
  const Index c = transpose ? rows : cols;
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd a(r, c);
  for (Index j = 0; j < c; ++j) {
    for (Index i = 0; i < r; ++i) {
      a(i, j) = normal(rng);
    }
  }
  Eigen::HouseholderQR<MatrixXd> qr(a);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(r, c);
  for (Index j = 0; j < c; ++j) {
    if (qr.matrixQR()(j, j) < 0.0) {
      q.col(j) *= -1.0;
    }
  }
  if (transpose) {
    return gain * q.transpose();
  }
  return gain * q;
}

void reset_columns(MatrixXd& m, const Eigen::RowVectorXd& start) {
  for (Index j = 0; j < m.cols(); ++j) {
    if (start[j] != 0.0) {
      m.col(j).setZero();
    }
  }
}

}  // namespace

struct SequenceCache {
  struct Step {
    Eigen::RowVectorXd start;
    CellCache l1, l2, l2_masked;
    bool masked{false};
    MatrixXd drop_features;  // mask on layer-1 output, H x B
    MatrixXd h2_actor;       // actor input
    MatrixXd a1, a1_mask, a1_out, a2, a2_mask, a2_out;
    MatrixXd raw_log_std;
    MatrixXd h2_clean, k1, k2;
  };
  std::vector<Step> steps;
};

Vector2d clamp_log_variance(const Vector2d& raw_log_sigma, const ClampBounds& bounds) {
  return raw_log_sigma.cwiseMax(bounds.min).cwiseMin(bounds.max);
}

double DropoutMode::rate() const {
  switch (mode) {
    case DropoutKind::off:
      return 0.0;
    case DropoutKind::train_rate:
      return rate_train;
    case DropoutKind::test_rate:
      return rate_test;
  }
  return 0.0;
}

void DropoutMode::validate() const {
  if (!(rate_train >= 0.0 && rate_train < 1.0) || !(rate_test >= 0.0 && rate_test < 1.0)) {
    throw std::invalid_argument("dropout rates must lie in [0, 1)");
  }
  if (rate_test < rate_train) {
    throw std::invalid_argument("test-time dropout rate must not be below the training rate");
  }
}

RecurrentState RecurrentState::zeros(int hidden_size, int batch) {
  return {MatrixXd::Zero(hidden_size, batch), MatrixXd::Zero(hidden_size, batch),
          MatrixXd::Zero(hidden_size, batch), MatrixXd::Zero(hidden_size, batch)};
}

RecurrentState RecurrentState::column(int index) const {
  return {h1.col(index), c1.col(index), h2.col(index), c2.col(index)};
}

void RecurrentState::set_column(int index, const RecurrentState& single) {
  h1.col(index) = single.h1.col(0);
  c1.col(index) = single.c1.col(0);
  h2.col(index) = single.h2.col(0);
  c2.col(index) = single.c2.col(0);
}

void RecurrentState::reset_column(int index) {
  h1.col(index).setZero();
  c1.col(index).setZero();
  h2.col(index).setZero();
  c2.col(index).setZero();
}

Policy::Policy(const PolicyArchitecture& architecture, std::uint64_t init_seed,
               const PolicyInit& init)
    : arch_(architecture) {
  if (arch_.input_size <= 0 || arch_.hidden_size <= 0 || arch_.actor_hidden <= 0 ||
      arch_.critic_hidden <= 0) {
    throw std::invalid_argument("policy architecture sizes must be positive");
  }
  const Layout l = make_layout(arch_);
  params_ = VectorXd::Zero(l.total);
  input_scale_ = VectorXd::Ones(arch_.input_size);

  Rng rng = make_rng(init_seed, 0x5eed);
  NetViews<false> net(params_.data(), l);
  const double bound = 1.0 / std::sqrt(static_cast<double>(arch_.hidden_size));
  std::uniform_real_distribution<double> lstm_init(-bound, bound);
  auto fill_uniform = [&](auto& m) {
    for (Index i = 0; i < m.size(); ++i) {
      m.data()[i] = lstm_init(rng);
    }
  };
  fill_uniform(net.W1);
  fill_uniform(net.U1);
  fill_uniform(net.b1);
  fill_uniform(net.W2);
  fill_uniform(net.U2);
  fill_uniform(net.b2);
  // Open forget gates at start.
  net.b1.segment(arch_.hidden_size, arch_.hidden_size).array() += 1.0;
  net.b2.segment(arch_.hidden_size, arch_.hidden_size).array() += 1.0;

  const double hidden_gain = std::numbers::sqrt2;
  net.A1 = orthogonal(l.actor, l.hidden, hidden_gain, rng);
  net.A2 = orthogonal(l.actor, l.actor, hidden_gain, rng);
  net.Mu = orthogonal(kActionSize, l.actor, 0.01, rng);
  net.Ls = orthogonal(kActionSize, l.actor, 0.01, rng);
  net.C1 = orthogonal(l.critic, l.hidden, hidden_gain, rng);
  net.C2 = orthogonal(l.critic, l.critic, hidden_gain, rng);
  net.Vw = orthogonal(1, l.critic, 1.0, rng);
  net.mu[0] = init.speed_bias;
  net.ls.setConstant(init.log_std_bias);
}

void Policy::set_input_scale(const Eigen::VectorXd& scale) {
  if (scale.size() != arch_.input_size) {
    throw std::invalid_argument("input scale size does not match the architecture");
  }
  input_scale_ = scale;
}

std::pair<Index, Index> Policy::mean_head_range() const {
  const Layout l = make_layout(arch_);
  return {l.Mu, l.mu + kActionSize};
}

SequenceForward Policy::forward_sequence(const SequenceBatch& batch, double dropout_rate, Rng& rng,
                                         bool keep_cache) const {
  const Layout l = make_layout(arch_);
  const NetViews<true> net(params_.data(), l);
  const Index L = static_cast<Index>(batch.observations.size());
  if (L == 0) {
    throw std::invalid_argument("empty sequence");
  }
  const Index B = batch.observations.front().cols();
  const bool masked = dropout_rate > 0.0;

  auto cache = keep_cache ? std::make_shared<SequenceCache>() : nullptr;
  if (cache) {
    cache->steps.resize(L);
  }

  SequenceForward out;
  out.action_mean.reserve(L);
  out.raw_log_std.reserve(L);
  out.log_std.reserve(L);
  out.value.reserve(L);
  out.features.reserve(L);

  MatrixXd h1 = batch.initial_state.h1, c1 = batch.initial_state.c1;
  MatrixXd h2 = batch.initial_state.h2, c2 = batch.initial_state.c2;
  MatrixXd nh1, nc1, nh2, nc2;

  for (Index t = 0; t < L; ++t) {
    const MatrixXd& obs = batch.observations[t];
    if (obs.rows() != arch_.input_size || obs.cols() != B) {
      throw std::invalid_argument("observation batch has the wrong shape");
    }
    const Eigen::RowVectorXd start =
        batch.episode_start.rows() > 0 ? Eigen::RowVectorXd(batch.episode_start.row(t))
                                       : Eigen::RowVectorXd::Zero(B);
    reset_columns(h1, start);
    reset_columns(c1, start);
    reset_columns(h2, start);
    reset_columns(c2, start);

    SequenceCache::Step* step = cache ? &cache->steps[t] : nullptr;
    if (step) {
      step->start = start;
      step->masked = masked;
    }

    const MatrixXd x = input_scale_.asDiagonal() * obs;
    lstm_forward(net.W1, net.U1, net.b1, x, h1, c1, nh1, nc1, step ? &step->l1 : nullptr);
    lstm_forward(net.W2, net.U2, net.b2, nh1, h2, c2, nh2, nc2, step ? &step->l2 : nullptr);

    MatrixXd actor_in;
    if (masked) {
      MatrixXd mask;
      fill_mask(mask, l.hidden, B, dropout_rate, rng);
      MatrixXd mh, mc;
      lstm_forward(net.W2, net.U2, net.b2, nh1.cwiseProduct(mask), h2, c2, mh, mc,
                   step ? &step->l2_masked : nullptr);
      actor_in = std::move(mh);
      if (step) {
        step->drop_features = std::move(mask);
      }
    } else {
      actor_in = nh2;
    }

    // Actor.
    MatrixXd a1 = net.A1 * actor_in;
    a1.colwise() += net.a1;
    a1 = a1.array().tanh().matrix();
    MatrixXd a1_out = a1;
    MatrixXd a1_mask;
    if (masked) {
      fill_mask(a1_mask, l.actor, B, dropout_rate, rng);
      a1_out = a1.cwiseProduct(a1_mask);
    }
    MatrixXd a2 = net.A2 * a1_out;
    a2.colwise() += net.a2;
    a2 = a2.array().tanh().matrix();
    MatrixXd a2_out = a2;
    MatrixXd a2_mask;
    if (masked) {
      fill_mask(a2_mask, l.actor, B, dropout_rate, rng);
      a2_out = a2.cwiseProduct(a2_mask);
    }
    MatrixXd mean = net.Mu * a2_out;
    mean.colwise() += net.mu;
    MatrixXd raw = net.Ls * a2_out;
    raw.colwise() += net.ls;
    MatrixXd log_std = raw.cwiseMax(clamp_.min).cwiseMin(clamp_.max);

    // Critic on the mask-free features.
    MatrixXd k1 = net.C1 * nh2;
    k1.colwise() += net.c1;
    k1 = k1.array().tanh().matrix();
    MatrixXd k2 = net.C2 * k1;
    k2.colwise() += net.c2;
    k2 = k2.array().tanh().matrix();
    Eigen::RowVectorXd value = net.Vw * k2;
    value.array() += net.vb[0];

    if (!mean.allFinite() || !raw.allFinite() || !value.allFinite()) {
      std::ostringstream msg;
      msg << "non-finite policy output at sequence step " << t << " (|obs| = " << obs.norm()
          << ", |params| = " << params_.norm() << ")";
      throw std::runtime_error(msg.str());
    }

    if (step) {
      step->h2_actor = actor_in;
      step->a1 = std::move(a1);
      step->a1_mask = std::move(a1_mask);
      step->a1_out = std::move(a1_out);
      step->a2 = std::move(a2);
      step->a2_mask = std::move(a2_mask);
      step->a2_out = std::move(a2_out);
      step->raw_log_std = raw;
      step->h2_clean = nh2;
      step->k1 = std::move(k1);
      step->k2 = std::move(k2);
    }

    out.action_mean.push_back(std::move(mean));
    out.raw_log_std.push_back(std::move(raw));
    out.log_std.push_back(std::move(log_std));
    out.value.push_back(std::move(value));
    out.features.push_back(std::move(actor_in));

    h1.swap(nh1);
    c1.swap(nc1);
    h2.swap(nh2);
    c2.swap(nc2);
  }
  out.final_state = {std::move(h1), std::move(c1), std::move(h2), std::move(c2)};
  out.cache = std::move(cache);
  return out;
}

Eigen::VectorXd Policy::backward_sequence(const SequenceForward& forward,
                                          const OutputGradients& grads) const {
  if (!forward.cache) {
    throw std::logic_error("backward_sequence needs a forward pass run with keep_cache = true");
  }
  const Layout l = make_layout(arch_);
  const NetViews<true> net(params_.data(), l);
  VectorXd gradient = VectorXd::Zero(l.total);
  NetViews<false> d(gradient.data(), l);

  const auto& steps = forward.cache->steps;
  const Index L = static_cast<Index>(steps.size());
  const Index B = steps.front().start.size();
  const Index H = l.hidden;

  MatrixXd dh1_next = MatrixXd::Zero(H, B), dc1_next = MatrixXd::Zero(H, B);
  MatrixXd dh2_next = MatrixXd::Zero(H, B), dc2_next = MatrixXd::Zero(H, B);
  MatrixXd dx, dh_prev, dc_prev;

  for (Index t = L - 1; t >= 0; --t) {
    const auto& s = steps[t];

    // Actor head.
    const MatrixXd& d_mean = grads.action_mean[t];
    MatrixXd d_raw = grads.log_std[t];
    for (Index j = 0; j < d_raw.cols(); ++j) {
      for (Index i = 0; i < d_raw.rows(); ++i) {
        const double r = s.raw_log_std(i, j);
        if (r < clamp_.min || r > clamp_.max) {
          d_raw(i, j) = 0.0;
        }
      }
    }
    d.Mu.noalias() += d_mean * s.a2_out.transpose();
    d.mu += d_mean.rowwise().sum();
    d.Ls.noalias() += d_raw * s.a2_out.transpose();
    d.ls += d_raw.rowwise().sum();
    MatrixXd d_a2 = net.Mu.transpose() * d_mean + net.Ls.transpose() * d_raw;
    if (s.masked) {
      d_a2 = d_a2.cwiseProduct(s.a2_mask);
    }
    MatrixXd d_pre2 = (d_a2.array() * (1.0 - s.a2.array().square())).matrix();
    d.A2.noalias() += d_pre2 * s.a1_out.transpose();
    d.a2 += d_pre2.rowwise().sum();
    MatrixXd d_a1 = net.A2.transpose() * d_pre2;
    if (s.masked) {
      d_a1 = d_a1.cwiseProduct(s.a1_mask);
    }
    MatrixXd d_pre1 = (d_a1.array() * (1.0 - s.a1.array().square())).matrix();
    d.A1.noalias() += d_pre1 * s.h2_actor.transpose();
    d.a1 += d_pre1.rowwise().sum();
    MatrixXd d_actor_in = net.A1.transpose() * d_pre1;

    // Critic head.
    const Eigen::RowVectorXd& d_value = grads.value[t];
    d.Vw.noalias() += d_value * s.k2.transpose();
    d.vb[0] += d_value.sum();
    MatrixXd d_q2 = ((net.Vw.transpose() * d_value).array() * (1.0 - s.k2.array().square())).matrix();
    d.C2.noalias() += d_q2 * s.k1.transpose();
    d.c2 += d_q2.rowwise().sum();
    MatrixXd d_q1 = ((net.C2.transpose() * d_q2).array() * (1.0 - s.k1.array().square())).matrix();
    d.C1.noalias() += d_q1 * s.h2_clean.transpose();
    d.c1 += d_q1.rowwise().sum();
    MatrixXd dh2 = net.C1.transpose() * d_q1 + dh2_next;

    MatrixXd dh1 = dh1_next;
    MatrixXd dh2_prev = MatrixXd::Zero(H, B), dc2_prev = MatrixXd::Zero(H, B);
    if (s.masked) {
      const MatrixXd zero = MatrixXd::Zero(H, B);
      lstm_backward(net.W2, net.U2, s.l2_masked, d_actor_in, zero, d.W2, d.U2, d.b2, dx, dh_prev,
                    dc_prev);
      dh1 += dx.cwiseProduct(s.drop_features);
      dh2_prev += dh_prev;
      dc2_prev += dc_prev;
    } else {
      dh2 += d_actor_in;
    }
    lstm_backward(net.W2, net.U2, s.l2, dh2, dc2_next, d.W2, d.U2, d.b2, dx, dh_prev, dc_prev);
    dh1 += dx;
    dh2_prev += dh_prev;
    dc2_prev += dc_prev;

    lstm_backward(net.W1, net.U1, s.l1, dh1, dc1_next, d.W1, d.U1, d.b1, dx, dh_prev, dc_prev);
    dh1_next = dh_prev;
    dc1_next = dc_prev;
    dh2_next = dh2_prev;
    dc2_next = dc2_prev;
    // States were zeroed at episode starts, so no gradient crosses the boundary.
    reset_columns(dh1_next, s.start);
    reset_columns(dc1_next, s.start);
    reset_columns(dh2_next, s.start);
    reset_columns(dc2_next, s.start);
  }
  return gradient;
}

BatchOutput Policy::forward_batch(const Eigen::MatrixXd& observations, const RecurrentState& state,
                                  double dropout_rate, Rng& rng) const {
  SequenceBatch batch;
  batch.observations.push_back(observations);
  batch.initial_state = state;
  SequenceForward seq = forward_sequence(batch, dropout_rate, rng, false);
  BatchOutput out;
  out.action_mean = std::move(seq.action_mean.front());
  out.log_std = std::move(seq.log_std.front());
  out.value = std::move(seq.value.front());
  out.features = std::move(seq.features.front());
  out.next_state = std::move(seq.final_state);
  return out;
}

PolicyOutput Policy::forward(const Observation& obs, const RecurrentState& state,
                             const DropoutMode& mode, Rng& rng) const {
  mode.validate();
  if (!obs.features.allFinite()) {
    throw std::invalid_argument("observation contains non-finite entries");
  }
  BatchOutput batch = forward_batch(obs.features, state, mode.rate(), rng);
  PolicyOutput out;
  out.action_mean = batch.action_mean.col(0);
  out.log_std = batch.log_std.col(0);
  out.action_variance = (2.0 * out.log_std.array()).exp().matrix();
  out.state_value = batch.value[0];
  out.features = batch.features.col(0);
  out.recurrent_state = std::move(batch.next_state);
  return out;
}

Eigen::VectorXd default_input_scale(const EnvConfig& config) {
  VectorXd scale = VectorXd::Ones(observation_size(config));
  scale[0] = 1.0 / 7.0;                // goal distance
  scale[1] = 1.0 / std::numbers::pi;   // goal bearing
  scale[3] = 1.0 / std::numbers::pi;   // heading
  for (int h = 0; h < config.max_humans; ++h) {
    const Index base = kRobotObservationSize + h * kHumanObservationSize;
    scale[base + 0] = 0.25;
    scale[base + 1] = 0.25;
    scale[base + 2] = 0.5;
    scale[base + 3] = 0.5;
  }
  return scale;
}

double gaussian_log_prob(const Vector2d& action, const Vector2d& mean, const Vector2d& variance) {
  double log_prob = 0.0;
  for (int i = 0; i < kActionSize; ++i) {
    const double diff = action[i] - mean[i];
    log_prob += -0.5 * diff * diff / variance[i] - 0.5 * std::log(2.0 * std::numbers::pi * variance[i]);
  }
  return log_prob;
}

SampledAction sample_action(const PolicyOutput& out, Rng& rng, bool deterministic) {
  SampledAction sampled;
  if (deterministic) {
    sampled.raw = out.action_mean;
  } else {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < kActionSize; ++i) {
      sampled.raw[i] = out.action_mean[i] + std::sqrt(out.action_variance[i]) * normal(rng);
    }
  }
  sampled.log_probability = gaussian_log_prob(sampled.raw, out.action_mean, out.action_variance);
  sampled.command = {sampled.raw[0], sampled.raw[1]};
  return sampled;
}

}  // namespace safenav

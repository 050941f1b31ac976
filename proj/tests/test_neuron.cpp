// Copyright 2026 The snn-stdl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "stdl/neuron.hpp"
#include "stdl/rng.hpp"
#include "stdl/verify/oracle.hpp"

namespace stdl {
namespace {

using T64 = Tensor<double>;
using St = NeuronState<double>;

St one(double u, NeuronModel model = NeuronModel::lif) {
  auto s = St::zeros({1}, model);
  s.u[0] = u;
  return s;
}

TEST(LifStep, SupraThreshold) {
  NeuronConfig cfg;
  const auto n = lif_step(one(0.0), T64({1}, {1.2}), cfg);
  EXPECT_DOUBLE_EQ(n.m[0], 1.2);
  EXPECT_EQ(n.s[0], 1.0);
  EXPECT_NEAR(n.u[0], 0.2, 1e-15);
}

TEST(LifStep, ZeroInput) {
  NeuronConfig cfg;
  const auto n = lif_step(one(0.0), T64({1}, {0.0}), cfg);
  EXPECT_EQ(n.m[0], 0.0);
  EXPECT_EQ(n.s[0], 0.0);
  EXPECT_EQ(n.u[0], 0.0);
}

TEST(LifStep, SubThreshold) {
  NeuronConfig cfg;
  const auto n = lif_step(one(0.2), T64({1}, {0.5}), cfg);
  EXPECT_NEAR(n.m[0], 0.52, 1e-15);
  EXPECT_EQ(n.s[0], 0.0);
  EXPECT_NEAR(n.u[0], 0.52, 1e-15);
}

TEST(LifStep, FiresExactlyAtThreshold) {
  NeuronConfig cfg;
  EXPECT_EQ(lif_step(one(0.0), T64({1}, {1.0}), cfg).s[0], 1.0);
}

TEST(LifStep, ShapeMismatchThrows) {
  NeuronConfig cfg;
  EXPECT_THROW(lif_step(St::zeros({2}, NeuronModel::lif), T64({3}), cfg), ShapeError);
}

TEST(NeuronConfig, RejectsBadValues) {
  NeuronConfig c;
  c.lambda = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.v_th = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.gamma = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_NO_THROW(NeuronConfig{}.validate());
}

TEST(Surrogate, TrianglePoints) {
  NeuronConfig cfg;
  const auto h = surrogate(T64({3}, {1.0, 0.0, 2.0}), cfg);
  EXPECT_EQ(h[0], 1.0);
  EXPECT_EQ(h[1], 0.0);
  EXPECT_EQ(h[2], 0.0);
  cfg.gamma = 0.5;
  EXPECT_DOUBLE_EQ(surrogate(T64({1}, {1.25}), cfg)[0], 1.0);
}

TEST(Surrogate, IntegratesToOne) {
  for (double gamma : {0.25, 0.5, 1.0, 2.0, 3.7}) {
    NeuronConfig cfg;
    cfg.gamma = gamma;
    const double lo = cfg.v_th - gamma - 1, hi = cfg.v_th + gamma + 1;
    const std::size_t n = 200000;
    T64 m({n + 1});
    for (std::size_t i = 0; i <= n; ++i) m[i] = lo + (hi - lo) * static_cast<double>(i) / n;
    const auto h = surrogate(m, cfg);
    double area = 0;
    for (std::size_t i = 0; i < n; ++i) area += 0.5 * (h[i] + h[i + 1]) * (hi - lo) / n;
    EXPECT_NEAR(area, 1.0, 1e-6) << "gamma " << gamma;
  }
}

NeuronCache<double> cache_at(double m) {
  NeuronCache<double> c;
  c.m = T64({1}, {m});
  return c;
}

TEST(LifBackward, LambdaZeroCutsTemporalPath) {
  NeuronConfig cfg;
  cfg.lambda = 0;
  NeuronCarry<double> carry;
  neuron_step_backward(cache_at(1.1), T64({1}, {0.7}), carry, cfg, 0.0);
  EXPECT_EQ(carry.du[0], 0.0);
}

TEST(LifBackward, OutsideSupportSpikePathIsZero) {
  NeuronConfig cfg;
  for (double m : {-0.5, 0.0, 2.0, 3.0}) {
    NeuronCarry<double> carry;
    const auto d = neuron_step_backward(cache_at(m), T64({1}, {5.0}), carry, cfg, 0.1);
    EXPECT_EQ(d[0], 0.0) << m;
  }
}

TEST(LifBackward, MissingCacheThrows) {
  NeuronConfig cfg;
  NeuronCarry<double> carry;
  EXPECT_THROW(neuron_step_backward(NeuronCache<double>{}, T64({1}), carry, cfg, 0.1),
               std::logic_error);
}

// Single neuron, T = 2, detached reset, checked against the unrolled tape.
TEST(LifBackward, TwoStepsMatchUnrolledGraph) {
  NeuronConfig cfg;
  cfg.lambda = 0.6;
  const double w = 0.9, x = 0.8;  // I = w x each step, loss = sum_t c_t s_t
  const double c[2] = {0.3, -1.1};

  NeuronCache<double> k1, k2;
  auto s0 = one(0.0);
  auto s1 = neuron_step(s0, T64({1}, {w * x}), cfg, cfg.lambda, &k1);
  auto s2 = neuron_step(s1, T64({1}, {w * x}), cfg, cfg.lambda, &k2);
  (void)s2;
  NeuronCarry<double> carry;
  const auto d2 = neuron_step_backward(k2, T64({1}, {c[1]}), carry, cfg, cfg.lambda);
  const auto d1 = neuron_step_backward(k1, T64({1}, {c[0]}), carry, cfg, cfg.lambda);
  const double got = (d1[0] + d2[0]) * x;

  verify::Tape tape;
  const auto W = tape.leaf(w);
  const auto I = tape.scale(W, x);
  const double h1 = triangle(w * x, 1.0, 1.0);
  const auto S1 = tape.node(w * x >= 1 ? 1.0 : 0.0, {{I, h1}});
  const auto U1 = tape.node(w * x - (w * x >= 1 ? 1.0 : 0.0), {{I, 1.0}});
  const auto M2 = tape.add(tape.scale(U1, cfg.lambda), I);
  const double h2 = triangle(tape.value(M2), 1.0, 1.0);
  const auto S2 = tape.node(tape.value(M2) >= 1 ? 1.0 : 0.0, {{M2, h2}});
  const auto L = tape.add(tape.scale(S1, c[0]), tape.scale(S2, c[1]));
  const double want = tape.gradient(L)[W];
  EXPECT_NEAR(got, want, 1e-12);
  EXPECT_NE(want, 0.0);
}

TEST(Plif, FrozenDecayEqualsLif) {
  NeuronConfig lif;
  lif.lambda = 0.3;
  NeuronConfig plif = lif;
  plif.model = NeuronModel::plif;
  Rng rng(2);
  auto a = St::zeros({5}, NeuronModel::lif);
  auto b = St::zeros({5}, NeuronModel::plif);
  const double lam = sigmoid(logit(0.3));
  for (int t = 0; t < 6; ++t) {
    T64 in({5});
    for (std::size_t i = 0; i < 5; ++i) in[i] = rng.uniform(0, 1.5);
    a = neuron_step(a, in, lif, lam);
    b = plif_step(b, in, plif, logit(0.3));
    EXPECT_EQ(a.m, b.m);
    EXPECT_EQ(a.s, b.s);
    EXPECT_EQ(a.u, b.u);
  }
}

TEST(Alif, ZeroBetaEqualsLif) {
  NeuronConfig lif;
  NeuronConfig alif = lif;
  alif.model = NeuronModel::alif;
  alif.alif_beta = 0;
  Rng rng(3);
  auto a = St::zeros({4}, NeuronModel::lif);
  auto b = St::zeros({4}, NeuronModel::alif);
  for (int t = 0; t < 8; ++t) {
    T64 in({4});
    for (std::size_t i = 0; i < 4; ++i) in[i] = rng.uniform(0, 2);
    a = lif_step(a, in, lif);
    b = alif_step(b, in, alif);
    EXPECT_EQ(a.s, b.s);
    EXPECT_EQ(a.u, b.u);
  }
}

// a[t] = rho a[t-1] + s[t-1]; theta = 1 + beta a[t]; constant input 1.05.
TEST(Alif, HandRecursionThreeSteps) {
  NeuronConfig cfg;
  cfg.model = NeuronModel::alif;
  cfg.alif_beta = 0.5;
  cfg.alif_rho = 0.9;
  cfg.lambda = 0.5;
  // t=1: a=0, theta=1, m=1.05 -> s=1, u=0.05
  // t=2: a=1, theta=1.5, m=0.025+1.05=1.075 -> s=0, u=1.075
  // t=3: a=0.9, theta=1.45, m=0.5375+1.05=1.5875 -> s=1, u=0.5875
  auto s = St::zeros({1}, NeuronModel::alif);
  const double want_s[3] = {1, 0, 1};
  const double want_a[3] = {0, 1, 0.9};
  const double want_u[3] = {0.05, 1.075, 0.5875};
  for (int t = 0; t < 3; ++t) {
    s = alif_step(s, T64({1}, {1.05}), cfg);
    EXPECT_EQ(s.s[0], want_s[t]) << t;
    EXPECT_NEAR(s.a[0], want_a[t], 1e-15) << t;
    EXPECT_NEAR(s.u[0], want_u[t], 1e-15) << t;
  }
}

TEST(LifProperties, LambdaZeroForgetsThePast) {
  NeuronConfig cfg;
  cfg.lambda = 0;
  Rng rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    T64 in({6});
    for (auto& v : in.data()) v = rng.uniform(-1, 2);
    auto a = St::zeros({6}, NeuronModel::lif);
    auto b = a;
    for (auto& v : b.u.data()) v = rng.uniform(-5, 5);
    const auto na = lif_step(a, in, cfg);
    const auto nb = lif_step(b, in, cfg);
    EXPECT_EQ(na.s, nb.s);
    EXPECT_EQ(na.m, nb.m);
  }
}

TEST(LifProperties, SpikesBinaryPotentialsFinite) {
  NeuronConfig cfg;
  Rng rng(5);
  auto s = St::zeros({32}, NeuronModel::lif);
  for (int t = 0; t < 100; ++t) {
    T64 in({32});
    for (auto& v : in.data()) v = rng.uniform(-3, 3);
    s = lif_step(s, in, cfg);
    for (std::size_t i = 0; i < 32; ++i) {
      EXPECT_TRUE(s.s[i] == 0.0 || s.s[i] == 1.0);
      EXPECT_TRUE(std::isfinite(s.u[i]));
      EXPECT_DOUBLE_EQ(s.u[i], s.m[i] - cfg.v_th * s.s[i]);
    }
  }
}

}  // namespace
}  // namespace stdl

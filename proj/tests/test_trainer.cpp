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
#include <sstream>

#include "stdl/stdl.hpp"
#include "stdl/verify/gradcheck.hpp"

namespace stdl {
namespace {

using T64 = Tensor<double>;

TEST(CrossEntropy, UniformLogitsGiveLogC) {
  for (std::size_t C : {2, 5, 10}) {
    const T64 z({3, C}, 0.7);
    EXPECT_NEAR(cross_entropy(z, {0, 1, 1}).loss, std::log(static_cast<double>(C)), 1e-12);
  }
}

TEST(CrossEntropy, LargeMarginVanishes) {
  double prev = 1e9;
  for (double margin : {1.0, 5.0, 20.0, 60.0}) {
    const T64 z({1, 3}, {0.0, margin, 0.0});
    const double l = cross_entropy(z, {1}).loss;
    EXPECT_LT(l, prev);
    prev = l;
  }
  EXPECT_LT(prev, 1e-20);
}

TEST(CrossEntropy, GradientIsSoftmaxMinusOneHot) {
  const auto r = verify::check_cross_entropy(3);
  EXPECT_TRUE(r.pass) << r.max_error;
  const T64 z({1, 2}, {0.0, 0.0});
  const auto g = cross_entropy(z, {0}).grad;
  EXPECT_DOUBLE_EQ(g[0], -0.5);
  EXPECT_DOUBLE_EQ(g[1], 0.5);
}

TEST(CrossEntropy, BadLabelThrows) {
  EXPECT_THROW(cross_entropy(T64({1, 3}), {3}), std::out_of_range);
  EXPECT_THROW(cross_entropy(T64({2, 3}), {0}), ShapeError);
}

TEST(LocalLoss, SumsOverSteps) {
  const std::vector<T64> z(4, T64({2, 3}));
  EXPECT_NEAR(local_loss(z, {0, 2}), 4 * std::log(3.0), 1e-12);
}

TEST(Sgd, PlainStep) {
  Param<double> p("w", T64({2}, {1.0, -2.0}));
  p.grad = T64({2}, {0.5, 0.25});
  sgd_update<double>({&p}, 0.1, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(p.value[0], 0.95);
  EXPECT_DOUBLE_EQ(p.value[1], -2.025);
}

TEST(Sgd, MomentumHandRecursion) {
  Param<double> p("w", T64({1}, {1.0}));
  const double lr = 0.1, mu = 0.9, wd = 0.01;
  double w = 1.0, v = 0.0;
  for (double g : {0.5, -0.2}) {
    p.grad[0] = g;
    sgd_update<double>({&p}, lr, mu, wd);
    v = mu * v + g + wd * w;
    w -= lr * v;
  }
  // v1 = 0.51, w1 = 0.949; v2 = 0.459 - 0.2 + 0.00949 = 0.26849, w2 = 0.922151
  EXPECT_NEAR(w, 0.922151, 1e-12);
  EXPECT_DOUBLE_EQ(p.value[0], w);
  EXPECT_DOUBLE_EQ(p.velocity[0], v);
}

TEST(Sgd, CosineSchedule) {
  EXPECT_DOUBLE_EQ(cosine_lr(0.1, 0, 100), 0.1);
  EXPECT_NEAR(cosine_lr(0.1, 50, 100), 0.05, 1e-15);
  EXPECT_NEAR(cosine_lr(0.1, 100, 100), 0.0, 1e-17);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.lr = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.momentum = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(regime_from_string("sltt"), Regime::sltt);
  EXPECT_THROW(regime_from_string("rtrl"), std::invalid_argument);
}

TEST(Bptt, MatchesOracleOnRandomTinyNets) {
  NeuronConfig lif;
  const auto r = verify::check_bptt_oracle("lif", lif, 30, 5, 1e-10);
  EXPECT_TRUE(r.pass) << r.max_error;
  NeuronConfig exact;
  exact.reset_grad = ResetGrad::exact;
  EXPECT_TRUE(verify::check_bptt_oracle("exact", exact, 30, 5, 1e-10).pass);
  NeuronConfig plif;
  plif.model = NeuronModel::plif;
  EXPECT_TRUE(verify::check_bptt_oracle("plif", plif, 30, 5, 1e-10).pass);
  NeuronConfig alif = exact;
  alif.model = NeuronModel::alif;
  EXPECT_TRUE(verify::check_bptt_oracle("alif", alif, 30, 5, 1e-10).pass);
  NeuronConfig alif_detached;
  alif_detached.model = NeuronModel::alif;
  EXPECT_TRUE(verify::check_bptt_oracle("alif_detached", alif_detached, 30, 5, 1e-10).pass);
}

// Two layers, three neurons, T = 3, fixed weights.
TEST(Bptt, HandBuiltTinyNet) {
  verify::TinyCase c;
  c.net.layers.resize(2);
  c.net.layers[0] = {verify::TinyLayer::Kind::spiking, 2, 3,
                     {0.9, 0.4, 1.3, -0.2, 0.6, 0.8}, 0};
  c.net.layers[1] = {verify::TinyLayer::Kind::classifier, 3, 2,
                     {0.5, -0.7, 0.3, -0.1, 0.9, 0.2}, 0};
  c.net.neuron.lambda = 0.5;
  c.x = {0.8, 0.6};
  c.labels = {1};
  c.batch = 1;
  c.T = 3;
  const auto want = verify::oracle_grads(c);
  const auto got = verify::runtime_grads(c, Regime::bptt);
  EXPECT_LE(verify::rel_error(got, want), 1e-10);
  EXPECT_TRUE(std::any_of(want.begin(), want.begin() + 6, [](double v) { return v != 0; }));
}

TEST(Regimes, CollapseIdentities) {
  for (const auto& r : verify::check_regime_collapse(30, 8)) {
    EXPECT_TRUE(r.pass) << r.name << " " << r.max_error;
  }
}

TEST(Regimes, SlttAtOneStepEqualsBptt) {
  Rng rng(9);
  NeuronConfig cfg;
  for (int i = 0; i < 20; ++i) {
    auto c = verify::random_tiny_case(rng, cfg);
    c.T = 1;
    EXPECT_LE(verify::rel_error(verify::runtime_grads(c, Regime::sltt),
                                verify::runtime_grads(c, Regime::bptt)),
              1e-12);
  }
}

TEST(Regimes, ScopeMatchesComposedOracle) {
  const auto r = verify::check_scope_oracle(20, 4);
  EXPECT_TRUE(r.pass) << r.max_error;
}

TEST(Regimes, OmittedTemporalTermsDecayByLambda) {
  const auto r = verify::check_temporal_decay(30, 6);
  EXPECT_TRUE(r.pass) << r.detail;
}

NetworkSpec two_scope_spec(std::size_t T) {
  NetworkSpec s;
  s.input_shape = {5};
  s.num_classes = 3;
  s.timesteps = T;
  s.reference_batch = 4;
  for (std::size_t w : {6, 7, 8}) {
    LayerSpec l;
    l.kind = LayerKind::linear;
    l.channels = w;
    s.layers.push_back(l);
  }
  LayerSpec head;
  head.kind = LayerKind::classifier;
  head.channels = 3;
  s.layers.push_back(head);
  s.infer();
  return s;
}

StdlPlan two_scope_plan(const NetworkSpec& s) {
  const auto fps = layer_footprints(s, 8);
  StdlPlan plan;
  plan.partition = make_partition(fps, {2, 4}, 1u << 20);
  plan.scope_budget = 1u << 20;
  plan.auxiliaries = {build_auxiliary(s, plan.partition, 1, plan.scope_budget, 8)};
  return plan;
}

Batch<double> random_batch(std::uint64_t seed, std::size_t B, std::size_t in, std::size_t C) {
  Rng rng(seed);
  Batch<double> b{T64({B, in}), {}};
  for (auto& v : b.x.data()) v = rng.uniform(0, 1.5);
  for (std::size_t i = 0; i < B; ++i) b.y.push_back(static_cast<int>(rng.below(C)));
  return b;
}

TEST(Stdl, StopGradientIsolatesEarlierScopes) {
  const auto spec = two_scope_spec(3);
  const auto plan = two_scope_plan(spec);
  const auto batch = random_batch(1, 4, 5, 3);
  SpikingNetwork<double> a(spec, plan, 2, InitOptions{2.0}), b(spec, plan, 2, InitOptions{2.0});
  // Perturb scope 2 (layers 3 and 4) of b only.
  for (std::size_t l = 2; l < 4; ++l) {
    for (auto& p : b.main().layers[l]->params()) {
      for (auto& v : p.value.data()) v += 0.37;
    }
  }
  a.zero_grad();
  b.zero_grad();
  stdl_batch(a, batch, 3);
  stdl_batch(b, batch, 3);
  bool nonzero = false;
  for (std::size_t l = 0; l < 2; ++l) {
    const auto& pa = a.main().layers[l]->params();
    const auto& pb = b.main().layers[l]->params();
    for (std::size_t i = 0; i < pa.size(); ++i) {
      EXPECT_EQ(pa[i].grad, pb[i].grad);
      for (auto v : pa[i].grad.vec()) nonzero |= v != 0;
    }
  }
  EXPECT_TRUE(nonzero);
  // and the aux of scope 1 is unaffected too
  const auto pa = a.aux(1).params(), pb = b.aux(1).params();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->grad, pb[i]->grad);
}

TEST(Stdl, NoCacheSurvivesItsStep) {
  const auto spec = two_scope_spec(4);
  SpikingNetwork<double> net(spec, two_scope_plan(spec), 3);
  MemoryLedger ledger;
  stdl_batch(net, random_batch(2, 4, 5, 3), 4, &ledger);
  EXPECT_EQ(ledger.running_bytes(), 0u);
  const auto& ev = ledger.events();
  for (std::size_t i = 1; i < ev.size(); ++i) {
    if (ev[i].step != ev[i - 1].step) {
      EXPECT_EQ(ev[i - 1].running, 0u) << i;
    }
  }
}

TEST(Stdl, PeakEqualsLargestScope) {
  const auto spec = two_scope_spec(3);
  const auto plan = two_scope_plan(spec);
  SpikingNetwork<double> net(spec, plan, 3);
  MemoryLedger ledger;
  stdl_batch(net, random_batch(3, 4, 5, 3), 3, &ledger);
  const std::size_t scope1 =
      subnetwork_footprint(spec, plan.partition, 1, 8) + plan.auxiliaries[0].footprint;
  const std::size_t scope2 = subnetwork_footprint(spec, plan.partition, 2, 8);
  EXPECT_EQ(ledger.peak_bytes(), std::max(scope1, scope2));
}

TEST(Ledger, StdlPeakConstantBpttAffineInT) {
  std::size_t total = 0;
  for (auto f : layer_footprints(two_scope_spec(1), 8)) total += f;
  std::vector<std::size_t> stdl_peaks, bptt_peaks;
  for (std::size_t T : {1, 2, 4, 6}) {
    const auto spec = two_scope_spec(T);
    SpikingNetwork<double> net(spec, two_scope_plan(spec), 3);
    const auto batch = random_batch(4, 4, 5, 3);
    MemoryLedger ls, lb;
    stdl_batch(net, batch, T, &ls);
    bptt_batch(net, batch, T, &lb);
    stdl_peaks.push_back(ls.peak_bytes());
    bptt_peaks.push_back(lb.peak_bytes());
    EXPECT_EQ(lb.peak_bytes(), T * total);
    EXPECT_EQ(lb.peak_location(), (std::pair<std::string, std::size_t>{"4", T}));
    EXPECT_EQ(lb.running_bytes(), 0u);
  }
  for (auto p : stdl_peaks) EXPECT_EQ(p, stdl_peaks.front());
}

TEST(Ledger, BpttCachesEverythingBeforeFreeing) {
  // L = 4, T = 3
  const auto spec = two_scope_spec(3);
  SpikingNetwork<double> net(spec, 1);
  MemoryLedger ledger;
  bptt_batch(net, random_batch(5, 4, 5, 3), 3, &ledger);
  std::size_t caches_before_free = 0;
  for (const auto& e : ledger.events()) {
    if (e.kind == LedgerKind::free) break;
    ++caches_before_free;
  }
  EXPECT_EQ(caches_before_free, 12u);
  EXPECT_EQ(ledger.events().size(), 24u);
}

// One draw split in two, so both halves share class centres.
std::pair<Dataset, Dataset> split_blobs(std::uint64_t seed, SynthSpec ss) {
  ss.samples *= 2;
  const auto all = synth_blobs(seed, ss);
  const std::size_t n = all.size() / 2, per = all.images.size() / all.size();
  Dataset a = take(all, n), b = take(all, n);
  std::copy(all.images.ptr() + n * per, all.images.ptr() + 2 * n * per, b.images.ptr());
  std::copy(all.labels.begin() + static_cast<std::ptrdiff_t>(n), all.labels.end(),
            b.labels.begin());
  return {a, b};
}

TEST(Training, SeparableBlobsAllRegimes) {
  SynthSpec ss;
  ss.samples = 200;
  ss.classes = 2;
  ss.shape = {8};
  const auto [train_set, test_set] = split_blobs(1, ss);
  for (auto regime : {Regime::bptt, Regime::sltt, Regime::stdl}) {
    NetworkSpec s;
    s.input_shape = {8};
    s.num_classes = 2;
    s.timesteps = 2;
    LayerSpec head;
    head.kind = LayerKind::classifier;
    head.channels = 2;
    s.layers = {head};
    SpikingNetwork<double> net(s, 1);
    TrainConfig cfg;
    cfg.regime = regime;
    cfg.epochs = 20;
    cfg.batch_size = 16;
    cfg.lr = 0.05;
    MemoryLedger ledger(false);
    const auto r = train(net, train_set, test_set, cfg, ledger);
    EXPECT_GE(r.epochs.back().test_acc, 0.99) << to_string(regime);
  }
}

TEST(Training, SpikingNetLearnsBlobsAllRegimes) {
  SynthSpec ss;
  ss.samples = 300;
  ss.classes = 3;
  ss.shape = {1, 4, 4};
  const auto [train_set, test_set] = split_blobs(3, ss);
  for (auto regime : {Regime::bptt, Regime::sltt, Regime::stdl}) {
    NetworkSpec s;
    s.input_shape = {1, 4, 4};
    s.num_classes = 3;
    s.timesteps = 4;
    s.reference_batch = 16;
    LayerSpec enc;
    enc.kind = LayerKind::encode_conv;
    enc.channels = 6;
    LayerSpec lin;
    lin.kind = LayerKind::linear;
    lin.channels = 24;
    LayerSpec head;
    head.kind = LayerKind::classifier;
    head.channels = 3;
    s.layers = {enc, lin, head};
    s.infer();
    const auto plan = regime == Regime::stdl ? plan_stdl(s, PartitionBudget::of_ratio(0.75), 8)
                                             : trivial_plan(s, 8);
    if (regime == Regime::stdl) {
      EXPECT_GT(plan.partition.num_subnetworks(), 1u);
    }
    SpikingNetwork<double> net(s, plan, 1);
    TrainConfig cfg;
    cfg.regime = regime;
    cfg.epochs = 20;
    cfg.batch_size = 16;
    cfg.lr = 0.05;
    MemoryLedger ledger(false);
    const auto r = train(net, train_set, test_set, cfg, ledger);
    EXPECT_GE(r.epochs.back().test_acc, 0.99) << to_string(regime);
  }
}

TEST(Training, DeterministicGivenSeed) {
  SynthSpec ss;
  ss.samples = 64;
  ss.classes = 2;
  ss.shape = {1, 4, 4};
  const auto data = synth_blobs(5, ss);
  NetworkSpec s;
  s.input_shape = {1, 4, 4};
  s.num_classes = 2;
  s.timesteps = 3;
  LayerSpec enc;
  enc.kind = LayerKind::encode_conv;
  enc.channels = 4;
  LayerSpec head;
  head.kind = LayerKind::classifier;
  head.channels = 2;
  s.layers = {enc, head};
  auto run = [&] {
    SpikingNetwork<double> net(s, 11);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 8;
    cfg.seed = 11;
    MemoryLedger ledger(false);
    const auto r = train(net, data, data, cfg, ledger);
    std::vector<Tensor<double>> w;
    for (auto* p : net.params()) w.push_back(p->value);
    return std::make_pair(w, r.epochs.back().test_acc);
  };
  const auto a = run(), b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(Metrics, CsvRow) {
  std::ostringstream os;
  write_metrics_header(os);
  write_metrics_row(os, {2, Regime::stdl, 0.5, 0.975, 1234, 1.5});
  EXPECT_EQ(os.str(),
            "epoch,regime,train_loss,test_acc,peak_bytes,wall_seconds\n"
            "2,stdl,0.500000,0.9750,1234,1.500\n");
}

}  // namespace
}  // namespace stdl

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

// Gradient check suites shared by the tests, the acceptance binary and the
// `gradcheck` subcommand. Each suite returns one CheckResult.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "stdl/auxiliary.hpp"
#include "stdl/model.hpp"
#include "stdl/rng.hpp"
#include "stdl/trainer.hpp"
#include "stdl/verify/oracle.hpp"

namespace stdl::verify {

struct CheckResult {
  std::string name;
  std::size_t cases = 0;
  double max_error = 0;
  double tolerance = 0;
  bool pass = false;
  std::string detail;
};

/// max |a - b| / max |b|; zero when both vanish.
inline double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double diff = 0, scale = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::fabs(a[i] - b[i]));
    scale = std::max(scale, std::fabs(b[i]));
  }
  if (diff == 0.0) return 0.0;
  return scale > 0.0 ? diff / scale : INFINITY;
}

// ---------------------------------------------------------------------------
// Bridging tiny oracle nets and the runtime.

inline NetworkSpec tiny_spec(const TinyNet& net, std::size_t T, std::size_t batch) {
  NetworkSpec spec;
  spec.input_shape = {net.layers.front().in};
  spec.num_classes = net.layers.back().out;
  spec.timesteps = T;
  spec.reference_batch = batch;
  spec.neuron = net.neuron;
  for (const auto& l : net.layers) {
    LayerSpec s;
    if (l.kind == TinyLayer::Kind::frozen) {
      throw std::invalid_argument("frozen layers only occur in auxiliary networks");
    }
    s.kind = l.kind == TinyLayer::Kind::spiking ? LayerKind::linear : LayerKind::classifier;
    s.channels = l.out;
    spec.layers.push_back(s);
  }
  spec.infer();
  return spec;
}

/// Copies oracle weights (and PLIF decays) into a runtime layer.
template <class Real>
void load_tiny_layer(Layer<Real>& layer, const TinyLayer& t) {
  auto& ps = layer.params();
  if (t.kind == TinyLayer::Kind::frozen) return;
  for (std::size_t i = 0; i < t.weight.size(); ++i) ps.at(0).value[i] = static_cast<Real>(t.weight[i]);
  if (ps.size() > 1) ps[1].value[0] = static_cast<Real>(t.decay_param);
}

/// Reads a runtime linear / adapter / classifier layer as an oracle layer.
template <class Real>
TinyLayer tiny_from_layer(Layer<Real>& layer) {
  const auto& s = layer.spec();
  TinyLayer t;
  t.in = shape_size(s.in_shape);
  t.out = shape_size(s.out_shape);
  switch (s.kind) {
    case LayerKind::linear: t.kind = TinyLayer::Kind::spiking; break;
    case LayerKind::classifier: t.kind = TinyLayer::Kind::classifier; break;
    case LayerKind::adapter: {
      t.kind = TinyLayer::Kind::frozen;
      const auto map = Adapter<Real>::channel_map(t.in, t.out);
      t.weight.assign(map.begin(), map.end());
      return t;
    }
    default: throw std::invalid_argument("oracle handles linear, adapter and classifier only");
  }
  const auto& ps = layer.params();
  t.weight.assign(ps.at(0).value.vec().begin(), ps.at(0).value.vec().end());
  if (ps.size() > 1) t.decay_param = static_cast<double>(ps[1].value[0]);
  return t;
}

inline TinyNet random_tiny_net(Rng& rng, const NeuronConfig& neuron, std::size_t max_layers = 3,
                               std::size_t max_width = 8) {
  TinyNet net;
  net.neuron = neuron;
  const std::size_t layers = 1 + rng.below(max_layers);
  std::size_t in = 1 + rng.below(max_width);
  for (std::size_t l = 0; l < layers; ++l) {
    TinyLayer t;
    t.kind = l + 1 == layers ? TinyLayer::Kind::classifier : TinyLayer::Kind::spiking;
    t.in = in;
    t.out = 2 + rng.below(max_width - 1);
    const double scale = 2.5 / std::sqrt(static_cast<double>(in));
    for (std::size_t i = 0; i < t.in * t.out; ++i) t.weight.push_back(scale * rng.uniform(-0.6, 1.0));
    t.decay_param = rng.uniform(-1.5, 0.5);
    net.layers.push_back(std::move(t));
    in = net.layers.back().out;
  }
  return net;
}

struct TinyCase {
  TinyNet net;
  std::vector<double> x;
  std::vector<int> labels;
  std::size_t batch = 2;
  std::size_t T = 1;
};

inline TinyCase random_tiny_case(Rng& rng, const NeuronConfig& neuron, std::size_t max_T = 4) {
  TinyCase c;
  c.net = random_tiny_net(rng, neuron);
  c.batch = 1 + rng.below(3);
  c.T = 1 + rng.below(max_T);
  for (std::size_t i = 0; i < c.batch * c.net.layers.front().in; ++i) c.x.push_back(rng.uniform());
  for (std::size_t b = 0; b < c.batch; ++b) {
    c.labels.push_back(static_cast<int>(rng.below(c.net.layers.back().out)));
  }
  return c;
}

inline SpikingNetwork<double> runtime_net(const TinyCase& c) {
  SpikingNetwork<double> net(tiny_spec(c.net, c.T, c.batch), 0);
  for (std::size_t l = 0; l < c.net.layers.size(); ++l) {
    load_tiny_layer(*net.main().layers[l], c.net.layers[l]);
  }
  return net;
}

inline Batch<double> tiny_batch(const TinyCase& c) {
  return {Tensor<double>({c.batch, c.net.layers.front().in}, c.x), c.labels};
}

/// All parameter gradients, flattened in parameter order.
template <class Real>
std::vector<double> flat_grads(const std::vector<Param<Real>*>& params) {
  std::vector<double> out;
  for (auto* p : params) {
    for (std::size_t i = 0; i < p->grad.size(); ++i) out.push_back(static_cast<double>(p->grad[i]));
  }
  return out;
}

inline std::vector<double> runtime_grads(const TinyCase& c, Regime regime) {
  auto net = runtime_net(c);
  net.zero_grad();
  run_batch(regime, net, tiny_batch(c), c.T);
  return flat_grads(net.main().params());
}

inline std::vector<double> oracle_grads(const TinyCase& c) {
  const auto r = oracle_bptt(c.net, c.x, c.batch, c.labels, c.T);
  std::vector<double> out;
  for (std::size_t l = 0; l < c.net.layers.size(); ++l) {
    out.insert(out.end(), r.weight_grads[l].begin(), r.weight_grads[l].end());
    if (c.net.neuron.model == NeuronModel::plif &&
        c.net.layers[l].kind == TinyLayer::Kind::spiking) {
      out.push_back(r.decay_grads[l]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Suites.

/// bptt_batch against the unrolled oracle on random tiny nets.
inline CheckResult check_bptt_oracle(const std::string& name, const NeuronConfig& neuron,
                                     std::size_t cases, std::uint64_t seed,
                                     double tolerance = 1e-9) {
  CheckResult r{name, cases, 0.0, tolerance, true, ""};
  Rng rng = Rng(seed).split(name);
  std::size_t active = 0;
  for (std::size_t i = 0; i < cases; ++i) {
    const auto c = random_tiny_case(rng, neuron);
    const auto want = oracle_grads(c);
    const auto got = runtime_grads(c, Regime::bptt);
    r.max_error = std::max(r.max_error, rel_error(got, want));
    if (std::any_of(want.begin(), want.end(), [](double v) { return v != 0.0; })) ++active;
  }
  r.pass = r.max_error <= tolerance;
  r.detail = std::to_string(active) + " of " + std::to_string(cases) + " with nonzero gradients";
  return r;
}

/// stdl(K=1, T=1) == bptt(T=1), stdl(K=1, lambda=0) == bptt(lambda=0) and
/// sltt == stdl(P={L}) bitwise.
inline std::vector<CheckResult> check_regime_collapse(std::size_t cases, std::uint64_t seed,
                                                      double tolerance = 1e-9) {
  CheckResult t1{"stdl_k1_t1_equals_bptt", cases, 0.0, tolerance, true, ""};
  CheckResult l0{"stdl_k1_lambda0_equals_bptt", cases, 0.0, tolerance, true, ""};
  CheckResult sl{"sltt_equals_stdl_single_scope", cases, 0.0, 0.0, true, "bitwise"};
  Rng rng = Rng(seed).split("collapse");
  for (std::size_t i = 0; i < cases; ++i) {
    NeuronConfig cfg;
    auto c = random_tiny_case(rng, cfg);
    c.T = 1;
    t1.max_error = std::max(t1.max_error, rel_error(runtime_grads(c, Regime::stdl),
                                                    runtime_grads(c, Regime::bptt)));
    auto z = random_tiny_case(rng, [] {
      NeuronConfig n;
      n.lambda = 0.0;
      return n;
    }());
    l0.max_error = std::max(l0.max_error, rel_error(runtime_grads(z, Regime::stdl),
                                                    runtime_grads(z, Regime::bptt)));
    const auto a = runtime_grads(z, Regime::sltt);
    const auto b = runtime_grads(z, Regime::stdl);
    if (a != b) sl.max_error = std::max(sl.max_error, std::max(rel_error(a, b), 1e-300));
  }
  t1.pass = t1.max_error <= tolerance;
  l0.pass = l0.max_error <= tolerance;
  sl.pass = sl.max_error == 0.0;
  return {t1, l0, sl};
}

struct DecayProfile {
  std::vector<double> norms;      // N_g for g = 0..T-1
  double reconstruction = 0;      // max |sum_g c_g - delta| / max |delta|
};

/// Splits every spiking layer's BPTT membrane gradient into the
/// contributions of losses g steps later: with detached reset,
/// delta[t] = sum_g lambda^g h[t+g] G[t+g], where G is the gradient reaching
/// the spikes from the layer above at the same step. N_g is the norm of the
/// gap-g term over all layers, steps and neurons. Gaps g >= 1 are what the
/// online regimes omit.
inline DecayProfile temporal_decay_profile(const TinyCase& c) {
  const auto r = oracle_bptt(c.net, c.x, c.batch, c.labels, c.T);
  const double lam = c.net.neuron.lambda;
  DecayProfile p;
  p.norms.assign(c.T, 0.0);
  double diff = 0, scale = 0;
  for (std::size_t l = 0; l < c.net.layers.size(); ++l) {
    if (c.net.layers[l].kind != TinyLayer::Kind::spiking) continue;
    const std::size_t n = r.delta[l][0].size();
    for (std::size_t t = 0; t < c.T; ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        double rebuilt = 0;
        for (std::size_t g = 0; t + g < c.T; ++g) {
          const double term =
              std::pow(lam, static_cast<double>(g)) * r.surrogate[l][t + g][i] * r.spike_grad[l][t + g][i];
          p.norms[g] += term * term;
          rebuilt += term;
        }
        diff = std::max(diff, std::fabs(rebuilt - r.delta[l][t][i]));
        scale = std::max(scale, std::fabs(r.delta[l][t][i]));
      }
    }
  }
  for (auto& v : p.norms) v = std::sqrt(v);
  p.reconstruction = diff == 0.0 ? 0.0 : diff / scale;
  return p;
}

/// N_{g+1} <= lambda N_g + 1e-12 for g = 1..3 at lambda = 0.1, T = 6.
inline CheckResult check_temporal_decay(std::size_t cases, std::uint64_t seed) {
  CheckResult r{"temporal_truncation_decay", cases, 0.0, 1e-12, true, ""};
  Rng rng = Rng(seed).split("decay");
  NeuronConfig cfg;
  cfg.lambda = 0.1;
  double worst_ratio = 0, worst_rebuild = 0;
  for (std::size_t i = 0; i < cases; ++i) {
    auto c = random_tiny_case(rng, cfg);
    c.T = 6;
    const auto p = temporal_decay_profile(c);
    worst_rebuild = std::max(worst_rebuild, p.reconstruction);
    for (std::size_t g = 1; g <= 3; ++g) {
      const double excess = p.norms[g + 1] - (cfg.lambda * p.norms[g] + 1e-12);
      r.max_error = std::max(r.max_error, excess);
      if (p.norms[g] > 0) worst_ratio = std::max(worst_ratio, p.norms[g + 1] / p.norms[g]);
    }
  }
  r.pass = r.max_error <= 0.0 && worst_rebuild <= 1e-12;
  r.max_error = std::max(r.max_error, 0.0);
  char buf[128];
  std::snprintf(buf, sizeof buf, "worst N_{g+1}/N_g = %.4g, decomposition error %.2g", worst_ratio,
                worst_rebuild);
  r.detail = buf;
  return r;
}

/// Scope 1 of a two-scope STDL step at T = 1 against the oracle of
/// "subnetwork 1 + auxiliary" trained alone.
inline CheckResult check_scope_oracle(std::size_t cases, std::uint64_t seed,
                                      double tolerance = 1e-9) {
  CheckResult r{"stdl_scope_equals_composed_oracle", cases, 0.0, tolerance, true, ""};
  Rng rng = Rng(seed).split("scope");
  for (std::size_t i = 0; i < cases; ++i) {
    NeuronConfig cfg;
    NetworkSpec spec;
    const std::size_t in = 2 + rng.below(5);
    spec.input_shape = {in};
    spec.num_classes = 2 + rng.below(3);
    spec.timesteps = 1;
    spec.reference_batch = 2;
    spec.neuron = cfg;
    for (int l = 0; l < 3; ++l) {
      LayerSpec s;
      s.kind = LayerKind::linear;
      s.channels = 2 + rng.below(6);
      spec.layers.push_back(s);
    }
    LayerSpec head;
    head.kind = LayerKind::classifier;
    head.channels = spec.num_classes;
    spec.layers.push_back(head);
    spec.infer();
    // P = {1, L}; the auxiliary of subnetwork 1 skips layer 2 and keeps 3.
    StdlPlan plan;
    const auto fps = layer_footprints(spec, sizeof(double));
    plan.partition = make_partition(fps, {1, spec.layers.size()}, 0);
    plan.auxiliaries.push_back(
        realize_auxiliary(spec, 1, spec.output_shape_of(1), {3}, 1, sizeof(double)));
    SpikingNetwork<double> net(spec, plan, rng.next_u64(), InitOptions{2.0});

    Batch<double> batch{Tensor<double>({2, in}), {}};
    for (std::size_t j = 0; j < batch.x.size(); ++j) batch.x[j] = rng.uniform();
    for (int b = 0; b < 2; ++b) {
      batch.y.push_back(static_cast<int>(rng.below(spec.num_classes)));
    }
    net.zero_grad();
    stdl_batch(net, batch, 1);

    TinyNet composed;
    composed.neuron = cfg;
    composed.layers.push_back(tiny_from_layer(*net.main().layers[0]));
    std::vector<double> got;
    for (auto& p : net.main().layers[0]->params()) {
      for (std::size_t j = 0; j < p.grad.size(); ++j) got.push_back(p.grad[j]);
    }
    auto& aux = net.aux(1);
    for (auto& l : aux.layers) {
      composed.layers.push_back(tiny_from_layer(*l));
      for (auto& p : l->params()) {
        for (std::size_t j = 0; j < p.grad.size(); ++j) got.push_back(p.grad[j]);
      }
    }
    const auto o = oracle_bptt(composed, batch.x.vec(), 2, batch.y, 1);
    std::vector<double> want;
    for (const auto& g : o.weight_grads) want.insert(want.end(), g.begin(), g.end());
    r.max_error = std::max(r.max_error, rel_error(got, want));
  }
  r.pass = r.max_error <= tolerance;
  return r;
}

/// Central differences on a smooth stand-in network (sigmoid spikes with
/// their exact derivative, exact reset), covering every layer kind.
inline double loss_of(SpikingNetwork<double>& net, const Batch<double>& b, std::size_t T) {
  auto fwd = forward_unrolled(net, replicate_encode(b.x, T), CachePolicy::all_steps_all_layers);
  return local_loss(fwd.logits, b.y);
}

inline NetworkSpec smooth_conv_spec(NeuronModel model, std::size_t T) {
  NetworkSpec spec;
  spec.input_shape = {2, 6, 6};
  spec.num_classes = 3;
  spec.timesteps = T;
  spec.reference_batch = 2;
  spec.neuron.model = model;
  spec.neuron.spike_fn = SpikeFn::sigmoid;
  spec.neuron.reset_grad = ResetGrad::exact;
  spec.neuron.lambda = 0.5;
  auto add = [&](LayerKind k, std::size_t ch, std::size_t kernel, std::size_t stride,
                 std::size_t pad) {
    LayerSpec s;
    s.kind = k;
    s.channels = ch;
    s.kernel = kernel;
    s.stride = stride;
    s.padding = pad;
    spec.layers.push_back(s);
  };
  add(LayerKind::encode_conv, 3, 3, 1, 1);
  add(LayerKind::residual_block, 4, 3, 2, 1);
  add(LayerKind::avgpool, 0, 3, 3, 0);
  add(LayerKind::linear, 5, 3, 1, 1);
  add(LayerKind::classifier, 3, 3, 1, 1);
  spec.infer();
  return spec;
}

inline CheckResult check_finite_differences(const std::string& name, NeuronModel model,
                                            std::size_t T, std::uint64_t seed,
                                            double tolerance = 1e-5, double h = 1e-5) {
  CheckResult r{name, 0, 0.0, tolerance, true, ""};
  auto spec = smooth_conv_spec(model, T);
  SpikingNetwork<double> net(spec, seed, InitOptions{1.5});
  Rng rng = Rng(seed).split("fd-input");
  Batch<double> b{Tensor<double>(batched(2, spec.input_shape)), {0, 2}};
  for (std::size_t i = 0; i < b.x.size(); ++i) b.x[i] = rng.uniform();
  net.zero_grad();
  bptt_batch(net, b, T);
  // Error per parameter tensor, relative to its largest gradient entry.
  for (auto* p : net.params()) {
    std::vector<double> numeric, analytic;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double keep = p->value[i];
      p->value[i] = keep + h;
      const double up = loss_of(net, b, T);
      p->value[i] = keep - h;
      const double down = loss_of(net, b, T);
      p->value[i] = keep;
      numeric.push_back((up - down) / (2 * h));
      analytic.push_back(p->grad[i]);
      ++r.cases;
    }
    r.max_error = std::max(r.max_error, rel_error(analytic, numeric));
  }
  r.pass = r.max_error <= tolerance;
  r.detail = std::to_string(r.cases) + " parameters";
  return r;
}

/// Input gradients of single layers (one step, fresh state) against
/// central differences.
inline CheckResult check_layer_input_grads(std::uint64_t seed, double tolerance = 1e-5,
                                           double h = 1e-5) {
  CheckResult r{"layer_input_gradients", 0, 0.0, tolerance, true, ""};
  NeuronConfig cfg;
  cfg.spike_fn = SpikeFn::sigmoid;
  cfg.reset_grad = ResetGrad::exact;
  Rng rng = Rng(seed).split("layer-input");
  std::vector<LayerSpec> specs;
  auto mk = [](LayerKind k, std::size_t ch, std::size_t kernel, std::size_t stride,
               std::size_t pad, Shape in, Shape target = {}) {
    LayerSpec s;
    s.kind = k;
    s.channels = ch;
    s.kernel = kernel;
    s.stride = stride;
    s.padding = pad;
    s.target = std::move(target);
    infer_layer(s, in);
    return s;
  };
  specs.push_back(mk(LayerKind::conv, 3, 3, 2, 1, {2, 5, 5}));
  specs.push_back(mk(LayerKind::residual_block, 2, 3, 1, 1, {2, 4, 4}));
  specs.push_back(mk(LayerKind::residual_block, 3, 3, 2, 1, {2, 4, 4}));
  specs.push_back(mk(LayerKind::avgpool, 0, 2, 2, 0, {2, 4, 4}));
  specs.push_back(mk(LayerKind::linear, 4, 3, 1, 1, {2, 2, 2}));
  specs.push_back(mk(LayerKind::classifier, 3, 3, 1, 1, {6}));
  specs.push_back(mk(LayerKind::adapter, 0, 3, 1, 1, {4, 4, 4}, {2, 3, 3}));
  specs.push_back(mk(LayerKind::adapter, 0, 3, 1, 1, {2, 2, 2}, {5}));
  for (const auto& s : specs) {
    auto layer = make_layer<double>(s, cfg, rng.split(to_string(s.kind)), InitOptions{1.5});
    Tensor<double> x(batched(2, s.in_shape));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(-0.5, 1.5);
    Tensor<double> weights(batched(2, s.out_shape));
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = rng.uniform(-1, 1);
    auto objective = [&](const Tensor<double>& in) {
      auto st = layer->initial_state(2);
      const auto out = layer->forward(in, st, nullptr);
      double v = 0;
      for (std::size_t i = 0; i < out.size(); ++i) v += out[i] * weights[i];
      return v;
    };
    auto st = layer->initial_state(2);
    LayerCache<double> cache;
    layer->forward(x, st, &cache);
    auto carry = layer->initial_carry();
    const auto gx = layer->backward(weights, cache, carry, true);
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double numeric = (objective(xp) - objective(xm)) / (2 * h);
      const double denom = std::max({std::fabs(numeric), std::fabs(gx[i]), 1e-6});
      r.max_error = std::max(r.max_error, std::fabs(numeric - gx[i]) / denom);
      ++r.cases;
    }
  }
  r.pass = r.max_error <= tolerance;
  r.detail = std::to_string(specs.size()) + " layers";
  return r;
}

/// softmax - onehot against central differences of the cross-entropy.
inline CheckResult check_cross_entropy(std::uint64_t seed, double tolerance = 1e-6) {
  CheckResult r{"cross_entropy_gradient", 0, 0.0, tolerance, true, ""};
  Rng rng = Rng(seed).split("ce");
  const double h = 1e-6;
  for (int c = 0; c < 20; ++c) {
    Tensor<double> z({3, 4});
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = rng.uniform(-3, 3);
    const std::vector<int> y{0, 3, 1};
    const auto g = cross_entropy(z, y).grad;
    for (std::size_t i = 0; i < z.size(); ++i) {
      auto zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      const double numeric = (cross_entropy(zp, y).loss - cross_entropy(zm, y).loss) / (2 * h);
      r.max_error = std::max(r.max_error, std::fabs(numeric - g[i]));
      ++r.cases;
    }
  }
  r.pass = r.max_error <= tolerance;
  return r;
}

/// Every suite, as run by `gradcheck`.
inline std::vector<CheckResult> run_all(std::uint64_t seed, std::size_t cases = 50) {
  std::vector<CheckResult> out;
  NeuronConfig lif;
  out.push_back(check_bptt_oracle("bptt_vs_oracle_lif", lif, cases, seed));
  NeuronConfig exact = lif;
  exact.reset_grad = ResetGrad::exact;
  out.push_back(check_bptt_oracle("bptt_vs_oracle_lif_exact_reset", exact, cases, seed));
  NeuronConfig plif = lif;
  plif.model = NeuronModel::plif;
  out.push_back(check_bptt_oracle("bptt_vs_oracle_plif", plif, cases, seed));
  NeuronConfig alif = exact;
  alif.model = NeuronModel::alif;
  out.push_back(check_bptt_oracle("bptt_vs_oracle_alif_exact", alif, cases, seed));
  for (auto& c : check_regime_collapse(cases, seed)) out.push_back(std::move(c));
  out.push_back(check_temporal_decay(cases, seed));
  out.push_back(check_scope_oracle(cases / 2 + 1, seed));
  out.push_back(check_finite_differences("finite_diff_lif_t1", NeuronModel::lif, 1, seed));
  out.push_back(check_finite_differences("finite_diff_lif_t3", NeuronModel::lif, 3, seed));
  out.push_back(check_finite_differences("finite_diff_plif_t3", NeuronModel::plif, 3, seed));
  out.push_back(check_finite_differences("finite_diff_alif_t3", NeuronModel::alif, 3, seed));
  out.push_back(check_layer_input_grads(seed));
  out.push_back(check_cross_entropy(seed));
  return out;
}

}  // namespace stdl::verify

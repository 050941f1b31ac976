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

// Gradient regimes and the training loop.
//
//   bptt  cache every layer at every step, then run backward over time.
//   stdl  per step and per scope (subnetwork + auxiliary): forward, local
//         loss, spatial-only backward, free. Scopes are joined by a
//         stop-gradient; the next scope sees the previous output as data.
//   sltt  stdl with a single scope covering the whole network.
//
// Every regime accumulates into Param::grad; callers zero gradients.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stdl/data.hpp"
#include "stdl/memory_ledger.hpp"
#include "stdl/model.hpp"

namespace stdl {

enum class Regime { bptt, sltt, stdl };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::bptt: return "bptt";
    case Regime::sltt: return "sltt";
    case Regime::stdl: return "stdl";
  }
  return "?";
}

inline Regime regime_from_string(const std::string& s) {
  if (s == "bptt") return Regime::bptt;
  if (s == "sltt") return Regime::sltt;
  if (s == "stdl") return Regime::stdl;
  throw std::invalid_argument("unknown regime '" + s + "'");
}

enum class CachePolicy { all_steps_all_layers, current_step_current_scope };

// ---------------------------------------------------------------------------
// Loss.

template <class Real>
struct LossResult {
  double loss = 0;
  Tensor<Real> grad;  // dL/dlogits, same shape as logits
};

/// Mean cross-entropy over the batch; grad = (softmax - onehot) / B.
template <class Real>
LossResult<Real> cross_entropy(const Tensor<Real>& logits, const std::vector<int>& labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw ShapeError("cross_entropy expects B x C logits for " +
                     std::to_string(labels.size()) + " labels, got " +
                     shape_str(logits.shape()));
  }
  const std::size_t B = logits.dim(0);
  const std::size_t C = logits.dim(1);
  LossResult<Real> r{0.0, Tensor<Real>(logits.shape())};
  std::vector<double> p(C);
  for (std::size_t b = 0; b < B; ++b) {
    const int y = labels[b];
    if (y < 0 || static_cast<std::size_t>(y) >= C) {
      throw std::out_of_range("class index " + std::to_string(y) + " outside [0, " +
                              std::to_string(C) + ")");
    }
    const Real* z = logits.ptr() + b * C;
    double mx = z[0];
    for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, static_cast<double>(z[c]));
    double sum = 0;
    for (std::size_t c = 0; c < C; ++c) {
      p[c] = std::exp(static_cast<double>(z[c]) - mx);
      sum += p[c];
    }
    r.loss += std::log(sum) + mx - static_cast<double>(z[y]);
    for (std::size_t c = 0; c < C; ++c) {
      const double g = p[c] / sum - (static_cast<int>(c) == y ? 1.0 : 0.0);
      r.grad[b * C + c] = static_cast<Real>(g / static_cast<double>(B));
    }
  }
  r.loss /= static_cast<double>(B);
  return r;
}

/// Sum over steps of the per-step cross-entropy, targets replicated over t.
template <class Real>
double local_loss(const std::vector<Tensor<Real>>& logits_per_step,
                  const std::vector<int>& labels) {
  double total = 0;
  for (const auto& z : logits_per_step) total += cross_entropy(z, labels).loss;
  return total;
}

/// Correct predictions from the step-summed logits.
template <class Real>
std::size_t count_correct(const Tensor<Real>& summed_logits, const std::vector<int>& labels) {
  const std::size_t B = summed_logits.dim(0);
  const std::size_t C = summed_logits.dim(1);
  std::size_t correct = 0;
  for (std::size_t b = 0; b < B; ++b) {
    const Real* z = summed_logits.ptr() + b * C;
    const std::size_t pred = static_cast<std::size_t>(std::max_element(z, z + C) - z);
    if (static_cast<int>(pred) == labels[b]) ++correct;
  }
  return correct;
}

// ---------------------------------------------------------------------------
// Forward execution.

template <class Real>
struct ForwardResult {
  std::vector<Tensor<Real>> logits;              // per step
  std::vector<std::vector<LayerCache<Real>>> caches;  // [t][layer], bptt policy only
};

/// Runs all T steps. Under all_steps_all_layers every layer's cache is kept
/// and reported; under current_step_current_scope each scope's caches are
/// released as soon as the scope has produced its output for the step.
/// Forward values are identical under both policies.
template <class Real>
ForwardResult<Real> forward_unrolled(SpikingNetwork<Real>& net,
                                     const std::vector<Tensor<Real>>& frames,
                                     CachePolicy policy, MemoryLedger* ledger = nullptr) {
  if (frames.empty()) throw std::invalid_argument("forward_unrolled needs T >= 1");
  auto& chain = net.main();
  const std::size_t L = chain.size();
  const std::size_t B = frames.front().dim(0);
  auto states = chain.initial_state(B);
  const auto& part = net.plan().partition;
  ForwardResult<Real> out;
  for (std::size_t t = 1; t <= frames.size(); ++t) {
    Tensor<Real> h = frames[t - 1];
    if (policy == CachePolicy::all_steps_all_layers) {
      std::vector<LayerCache<Real>> step(L);
      for (std::size_t l = 0; l < L; ++l) {
        h = chain.layers[l]->forward(h, states[l], &step[l]);
        if (ledger) ledger->cache(chain.labels[l], t, step[l].bytes());
      }
      out.caches.push_back(std::move(step));
    } else {
      for (std::size_t k = 1; k <= part.num_subnetworks(); ++k) {
        std::vector<LayerCache<Real>> scope;
        for (std::size_t l = part.first_layer(k); l <= part.last_layer(k); ++l) {
          scope.emplace_back();
          h = chain.layers[l - 1]->forward(h, states[l - 1], &scope.back());
          if (ledger) ledger->cache(chain.labels[l - 1], t, scope.back().bytes());
        }
        for (std::size_t l = part.last_layer(k); l >= part.first_layer(k); --l) {
          const auto& c = scope[l - part.first_layer(k)];
          if (ledger) ledger->free(chain.labels[l - 1], t, c.bytes());
        }
      }
    }
    out.logits.push_back(std::move(h));
  }
  return out;
}

/// Forward without caches, for evaluation. Returns step-summed logits.
template <class Real>
Tensor<Real> predict(SpikingNetwork<Real>& net, const Tensor<Real>& x, std::size_t T) {
  auto& chain = net.main();
  auto states = chain.initial_state(x.dim(0));
  Tensor<Real> sum;
  for (std::size_t t = 0; t < T; ++t) {
    Tensor<Real> h = x;
    for (std::size_t l = 0; l < chain.size(); ++l) {
      h = chain.layers[l]->forward(h, states[l], nullptr);
    }
    if (sum.empty()) {
      sum = std::move(h);
    } else {
      sum += h;
    }
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Gradient regimes.

struct BatchStats {
  double loss = 0;  // output loss, summed over steps
  std::size_t correct = 0;
  std::size_t samples = 0;
  std::vector<double> local_losses;  // per scope k < K, summed over steps
};

/// Backward over time through caches from all_steps_all_layers. Caches
/// are released as their step is consumed.
template <class Real>
void bptt_backward(SpikingNetwork<Real>& net, std::vector<std::vector<LayerCache<Real>>>& caches,
                   const std::vector<Tensor<Real>>& grad_logits,
                   MemoryLedger* ledger = nullptr) {
  auto& chain = net.main();
  const std::size_t L = chain.size();
  const std::size_t T = caches.size();
  if (grad_logits.size() != T) throw std::invalid_argument("one logit gradient per step");
  auto carries = chain.initial_carry();
  for (std::size_t t = T; t >= 1; --t) {
    auto& step = caches[t - 1];
    if (step.size() != L) throw std::logic_error("bptt_backward: missing caches");
    Tensor<Real> g = grad_logits[t - 1];
    for (std::size_t l = L; l >= 1; --l) {
      g = chain.layers[l - 1]->backward(g, step[l - 1], carries[l - 1], l > 1);
      if (ledger) ledger->free(chain.labels[l - 1], t, step[l - 1].bytes());
      step[l - 1] = {};
    }
  }
}

template <class Real>
BatchStats bptt_batch(SpikingNetwork<Real>& net, const Batch<Real>& batch, std::size_t T,
                      MemoryLedger* ledger = nullptr) {
  auto fwd = forward_unrolled(net, replicate_encode(batch.x, T),
                              CachePolicy::all_steps_all_layers, ledger);
  BatchStats st;
  st.samples = batch.y.size();
  std::vector<Tensor<Real>> grads;
  Tensor<Real> sum;
  for (const auto& z : fwd.logits) {
    auto ce = cross_entropy(z, batch.y);
    st.loss += ce.loss;
    grads.push_back(std::move(ce.grad));
    if (sum.empty()) {
      sum = z;
    } else {
      sum += z;
    }
  }
  st.correct = count_correct(sum, batch.y);
  bptt_backward(net, fwd.caches, grads, ledger);
  return st;
}

/// Per-step, per-scope state of an online (stdl/sltt) pass over a batch.
template <class Real>
struct OnlineState {
  std::vector<LayerState<Real>> main;
  std::vector<std::vector<LayerState<Real>>> aux;  // per k < K
};

/// One scope at one step: forward through subnetwork k (and its auxiliary
/// when k < K), local loss, spatial-only backward, free. `input` is the
/// detached output of scope k-1. Returns the scope output and adds the
/// step's loss to `loss`; `logits` receives the output of the last layer
/// of the scope's loss pathway.
template <class Real>
Tensor<Real> stdl_scope_step(SpikingNetwork<Real>& net, const Partition& part, std::size_t k,
                             const Tensor<Real>& input, const std::vector<int>& labels,
                             std::size_t t, OnlineState<Real>& state, double& loss,
                             Tensor<Real>* logits, MemoryLedger* ledger) {
  auto& chain = net.main();
  const std::size_t K = part.num_subnetworks();
  const std::size_t first = part.first_layer(k);
  const std::size_t last = part.last_layer(k);

  std::vector<LayerCache<Real>> main_caches(last - first + 1);
  Tensor<Real> h = input;
  for (std::size_t l = first; l <= last; ++l) {
    h = chain.layers[l - 1]->forward(h, state.main[l - 1], &main_caches[l - first]);
    if (ledger) ledger->cache(chain.labels[l - 1], t, main_caches[l - first].bytes());
  }

  Chain<Real>* aux = nullptr;
  std::vector<LayerCache<Real>> aux_caches;
  Tensor<Real> z = h;
  if (k < K) {
    aux = &net.aux(k);
    aux_caches.resize(aux->size());
    for (std::size_t i = 0; i < aux->size(); ++i) {
      z = aux->layers[i]->forward(z, state.aux[k - 1][i], &aux_caches[i]);
      if (ledger) ledger->cache(aux->labels[i], t, aux_caches[i].bytes());
    }
  }

  auto ce = cross_entropy(z, labels);
  loss += ce.loss;
  Tensor<Real> g = std::move(ce.grad);
  if (aux != nullptr) {
    auto carries = aux->initial_carry();
    for (std::size_t i = aux->size(); i >= 1; --i) {
      g = aux->layers[i - 1]->backward(g, aux_caches[i - 1], carries[i - 1], true);
      if (ledger) ledger->free(aux->labels[i - 1], t, aux_caches[i - 1].bytes());
      aux_caches[i - 1] = {};
    }
  }
  std::vector<LayerCarry<Real>> carries;
  for (std::size_t l = first; l <= last; ++l) {
    carries.push_back(chain.layers[l - 1]->initial_carry());
  }
  for (std::size_t l = last; l >= first; --l) {
    g = chain.layers[l - 1]->backward(g, main_caches[l - first], carries[l - first], l > first);
    if (ledger) ledger->free(chain.labels[l - 1], t, main_caches[l - first].bytes());
    main_caches[l - first] = {};
  }
  if (logits != nullptr) *logits = std::move(z);
  return h;
}

/// Online pass over a batch under an explicit partition. Auxiliaries of
/// `net` are used for scopes k < K of `part`.
template <class Real>
BatchStats online_batch(SpikingNetwork<Real>& net, const Partition& part,
                        const Batch<Real>& batch, std::size_t T,
                        MemoryLedger* ledger = nullptr) {
  const std::size_t K = part.num_subnetworks();
  const std::size_t B = batch.y.size();
  OnlineState<Real> state;
  state.main = net.main().initial_state(B);
  for (std::size_t k = 1; k < K; ++k) state.aux.push_back(net.aux(k).initial_state(B));
  BatchStats st;
  st.samples = B;
  st.local_losses.assign(K - 1, 0.0);
  Tensor<Real> sum;
  const auto frames = replicate_encode(batch.x, T);
  for (std::size_t t = 1; t <= T; ++t) {
    Tensor<Real> h = frames[t - 1];
    for (std::size_t k = 1; k <= K; ++k) {
      double& loss = k < K ? st.local_losses[k - 1] : st.loss;
      Tensor<Real> z;
      h = stdl_scope_step(net, part, k, h, batch.y, t, state, loss, k == K ? &z : nullptr,
                          ledger);
      if (k == K) {
        if (sum.empty()) {
          sum = std::move(z);
        } else {
          sum += z;
        }
      }
    }
  }
  st.correct = count_correct(sum, batch.y);
  return st;
}

template <class Real>
BatchStats stdl_batch(SpikingNetwork<Real>& net, const Batch<Real>& batch, std::size_t T,
                      MemoryLedger* ledger = nullptr) {
  return online_batch(net, net.plan().partition, batch, T, ledger);
}

/// Single scope P = {L}; auxiliaries, if any, are ignored.
template <class Real>
BatchStats sltt_batch(SpikingNetwork<Real>& net, const Batch<Real>& batch, std::size_t T,
                      MemoryLedger* ledger = nullptr) {
  const auto fps = layer_footprints(net.spec(), sizeof(Real));
  const Partition whole = make_partition(fps, {net.spec().layers.size()}, 0);
  return online_batch(net, whole, batch, T, ledger);
}

template <class Real>
BatchStats run_batch(Regime regime, SpikingNetwork<Real>& net, const Batch<Real>& batch,
                     std::size_t T, MemoryLedger* ledger = nullptr) {
  switch (regime) {
    case Regime::bptt: return bptt_batch(net, batch, T, ledger);
    case Regime::sltt: return sltt_batch(net, batch, T, ledger);
    case Regime::stdl: return stdl_batch(net, batch, T, ledger);
  }
  throw std::invalid_argument("unknown regime");
}

// ---------------------------------------------------------------------------
// Optimizer.

struct TrainConfig {
  Regime regime = Regime::bptt;
  std::size_t epochs = 5;
  std::size_t batch_size = 64;
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-5;
  std::uint64_t seed = 0;
  std::size_t train_limit = 0;  // 0 = whole split
  std::size_t test_limit = 0;

  void validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("lr must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) {
      throw std::invalid_argument("momentum must lie in [0, 1)");
    }
    if (weight_decay < 0.0) throw std::invalid_argument("weight_decay must be >= 0");
    if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
    if (epochs == 0) throw std::invalid_argument("epochs must be >= 1");
  }
};

/// Cosine annealing from base to 0 over total steps.
inline double cosine_lr(double base, std::size_t step, std::size_t total) {
  if (total == 0) return base;
  const double frac = std::min(1.0, static_cast<double>(step) / static_cast<double>(total));
  return base * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

/// v = mu v + g + wd w;  w -= lr v.
template <class Real>
void sgd_update(const std::vector<Param<Real>*>& params, double lr, double momentum,
                double weight_decay) {
  const Real mu = static_cast<Real>(momentum);
  const Real wd = static_cast<Real>(weight_decay);
  const Real eta = static_cast<Real>(lr);
  for (auto* p : params) {
    p->value.check_same(p->grad, "sgd_update");
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      Real& v = p->velocity[i];
      v = mu * v + p->grad[i] + wd * p->value[i];
      p->value[i] -= eta * v;
    }
  }
}

template <class Real>
void sgd_update(const std::vector<Param<Real>*>& params, const TrainConfig& cfg,
                std::size_t step, std::size_t total_steps) {
  sgd_update(params, cosine_lr(cfg.lr, step, total_steps), cfg.momentum, cfg.weight_decay);
}

// ---------------------------------------------------------------------------
// Training loop.

struct EpochMetrics {
  std::size_t epoch = 0;
  Regime regime = Regime::bptt;
  double train_loss = 0;
  double test_acc = 0;
  std::size_t peak_bytes = 0;
  double wall_seconds = 0;
};

inline void write_metrics_header(std::ostream& os) {
  os << "epoch,regime,train_loss,test_acc,peak_bytes,wall_seconds\n";
}

inline void write_metrics_row(std::ostream& os, const EpochMetrics& m) {
  char buf[64];
  os << m.epoch << ',' << to_string(m.regime) << ',';
  std::snprintf(buf, sizeof buf, "%.6f", m.train_loss);
  os << buf << ',';
  std::snprintf(buf, sizeof buf, "%.4f", m.test_acc);
  os << buf << ',' << m.peak_bytes << ',';
  std::snprintf(buf, sizeof buf, "%.3f", m.wall_seconds);
  os << buf << '\n';
}

template <class Real>
double evaluate(SpikingNetwork<Real>& net, const Dataset& ds, std::size_t T,
                std::size_t batch_size = 256) {
  const auto order = epoch_order(ds.size(), 0, 0, false);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); i += batch_size) {
    auto b = make_batch<Real>(ds, order, i, i + batch_size);
    correct += count_correct(predict(net, b.x, T), b.y);
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

struct TrainResult {
  std::vector<EpochMetrics> epochs;
  PeakReport peak;
  std::size_t param_bytes = 0;
  std::size_t optimizer_bytes = 0;
};

/// Trains `net` in place. `ledger` receives every cache/free event of the
/// run. `on_epoch` sees each epoch's metrics as they are produced.
template <class Real>
TrainResult train(SpikingNetwork<Real>& net, const Dataset& train_set, const Dataset& test_set,
                  const TrainConfig& cfg, MemoryLedger& ledger,
                  const std::function<void(const EpochMetrics&)>& on_epoch = {}) {
  cfg.validate();
  train_set.validate();
  const std::size_t T = net.spec().timesteps;
  const std::size_t n = train_set.size();
  const std::size_t batches = (n + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total_steps = batches * cfg.epochs;
  const auto params = net.params();
  TrainResult result;
  for (auto* p : params) {
    result.param_bytes += p->value.bytes();
    result.optimizer_bytes += p->velocity.bytes();
  }
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const auto order = epoch_order(n, cfg.seed, epoch);
    double loss_sum = 0;
    for (std::size_t b = 0; b < batches; ++b) {
      auto batch = make_batch<Real>(train_set, order, b * cfg.batch_size,
                                    (b + 1) * cfg.batch_size);
      net.zero_grad();
      const auto st = run_batch(cfg.regime, net, batch, T, &ledger);
      loss_sum += st.loss * static_cast<double>(st.samples);
      sgd_update(params, cfg, step++, total_steps);
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.regime = cfg.regime;
    m.train_loss = loss_sum / static_cast<double>(n);
    m.test_acc = evaluate(net, test_set, T);
    m.peak_bytes = ledger.peak_bytes();
    m.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.epochs.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  result.peak = ledger.peak_report();
  return result;
}

}  // namespace stdl

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

// Unrolled-graph reference for small fully connected spiking nets. The
// network is expanded over every step, sample and neuron onto a scalar
// tape, with the spike nonlinearity's derivative replaced by the
// surrogate. The tape knows nothing about the layer code.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "stdl/neuron.hpp"
#include "stdl/verify/tape.hpp"

namespace stdl::verify {

struct TinyLayer {
  enum class Kind { spiking, frozen, classifier };
  Kind kind = Kind::spiking;
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;  // out x in, row-major
  double decay_param = 0;      // PLIF w, lambda = sigmoid(w)
};

struct TinyNet {
  std::vector<TinyLayer> layers;
  NeuronConfig neuron;
};

struct OracleRun {
  double loss = 0;
  std::vector<std::vector<double>> weight_grads;  // per layer; empty when frozen
  std::vector<double> decay_grads;                // per layer (PLIF)
  // Per layer, per step, per (sample, neuron); spiking layers only.
  std::vector<std::vector<std::vector<double>>> m;
  std::vector<std::vector<std::vector<double>>> delta;       // dL/dm
  std::vector<std::vector<std::vector<double>>> spike_grad;  // dL/ds
  std::vector<std::vector<std::vector<double>>> surrogate;   // ds/dm used
};

namespace detail {

inline double oracle_spike(double x, const NeuronConfig& cfg) {
  if (cfg.spike_fn == SpikeFn::heaviside) return x >= 0.0 ? 1.0 : 0.0;
  return 1.0 / (1.0 + std::exp(-cfg.sigmoid_slope * x));
}

inline double oracle_slope(double m, double threshold, const NeuronConfig& cfg) {
  if (cfg.spike_fn == SpikeFn::heaviside) {
    const double d = cfg.gamma - std::fabs(m - threshold);
    return d > 0.0 ? d / (cfg.gamma * cfg.gamma) : 0.0;
  }
  const double s = oracle_spike(m - threshold, cfg);
  return cfg.sigmoid_slope * s * (1.0 - s);
}

}  // namespace detail

/// Loss = sum over steps of the batch-mean cross-entropy of the last
/// layer's output; the input x (B x in) is presented at every step.
inline OracleRun oracle_bptt(const TinyNet& net, const std::vector<double>& x, std::size_t B,
                             const std::vector<int>& labels, std::size_t T) {
  using Id = Tape::Id;
  const auto& cfg = net.neuron;
  const bool exact = cfg.reset_grad == ResetGrad::exact;
  const bool alif = cfg.model == NeuronModel::alif;
  const bool plif = cfg.model == NeuronModel::plif;
  const std::size_t nl = net.layers.size();
  if (nl == 0 || net.layers.back().kind != TinyLayer::Kind::classifier) {
    throw std::invalid_argument("oracle net must end with a classifier");
  }
  if (x.size() != B * net.layers.front().in || labels.size() != B) {
    throw std::invalid_argument("oracle input size mismatch");
  }

  Tape tape;
  std::vector<std::vector<Id>> W(nl);
  std::vector<Id> lam(nl, 0);
  for (std::size_t l = 0; l < nl; ++l) {
    const auto& L = net.layers[l];
    if (L.weight.size() != L.in * L.out) {
      throw std::invalid_argument("oracle layer " + std::to_string(l) + " weight size");
    }
    for (double w : L.weight) W[l].push_back(tape.leaf(w));
    if (plif && L.kind == TinyLayer::Kind::spiking) {
      lam[l] = tape.sigmoid(tape.leaf(L.decay_param));
    }
  }
  // Decay leaves sit right before their sigmoid node.
  std::vector<Id> inputs;
  for (double v : x) inputs.push_back(tape.leaf(v));

  // Per layer state: ids per (b, n); -1 marks zero.
  constexpr Id none = static_cast<Id>(-1);
  std::vector<std::vector<Id>> u_prev(nl), s_prev(nl), a_prev(nl);
  for (std::size_t l = 0; l < nl; ++l) {
    const std::size_t n = B * net.layers[l].out;
    u_prev[l].assign(n, none);
    s_prev[l].assign(n, none);
    a_prev[l].assign(n, none);
  }
  std::vector<std::vector<std::vector<Id>>> m_ids(nl), s_ids(nl);
  std::vector<std::vector<std::vector<double>>> h_vals(nl);
  std::vector<Id> step_losses;

  for (std::size_t t = 0; t < T; ++t) {
    std::vector<Id> h = inputs;
    for (std::size_t l = 0; l < nl; ++l) {
      const auto& L = net.layers[l];
      std::vector<Id> out(B * L.out);
      std::vector<Id> ms, ss;
      std::vector<double> hs;
      for (std::size_t b = 0; b < B; ++b) {
        const std::vector<Id> row(h.begin() + static_cast<std::ptrdiff_t>(b * L.in),
                                  h.begin() + static_cast<std::ptrdiff_t>((b + 1) * L.in));
        for (std::size_t n = 0; n < L.out; ++n) {
          const std::vector<Id> wrow(W[l].begin() + static_cast<std::ptrdiff_t>(n * L.in),
                                     W[l].begin() + static_cast<std::ptrdiff_t>((n + 1) * L.in));
          const Id current = tape.dot(wrow, row);
          const std::size_t k = b * L.out + n;
          if (L.kind != TinyLayer::Kind::spiking) {
            out[k] = current;
            continue;
          }
          Id m = current;
          if (u_prev[l][k] != none) {
            const Id leak = plif ? tape.mul(lam[l], u_prev[l][k])
                                 : tape.scale(u_prev[l][k], cfg.lambda);
            m = tape.add(leak, current);
          }
          double threshold = cfg.v_th;
          Id a = none;
          if (alif) {
            std::vector<std::pair<Id, double>> ps;
            double av = 0;
            if (a_prev[l][k] != none) {
              av += cfg.alif_rho * tape.value(a_prev[l][k]);
              if (exact) ps.emplace_back(a_prev[l][k], cfg.alif_rho);
            }
            if (s_prev[l][k] != none) {
              av += tape.value(s_prev[l][k]);
              if (exact) ps.emplace_back(s_prev[l][k], 1.0);
            }
            a = tape.node(av, std::move(ps));
            threshold += cfg.alif_beta * av;
          }
          const double mv = tape.value(m);
          const double slope = detail::oracle_slope(mv, threshold, cfg);
          std::vector<std::pair<Id, double>> sp{{m, slope}};
          if (alif && exact) sp.emplace_back(a, -cfg.alif_beta * slope);
          const Id s = tape.node(detail::oracle_spike(mv - threshold, cfg), std::move(sp));
          std::vector<std::pair<Id, double>> up{{m, 1.0}};
          if (exact) up.emplace_back(s, -cfg.v_th);
          const Id u = tape.node(mv - cfg.v_th * tape.value(s), std::move(up));
          u_prev[l][k] = u;
          s_prev[l][k] = s;
          a_prev[l][k] = a;
          out[k] = s;
          ms.push_back(m);
          ss.push_back(s);
          hs.push_back(slope);
        }
      }
      m_ids[l].push_back(std::move(ms));
      s_ids[l].push_back(std::move(ss));
      h_vals[l].push_back(std::move(hs));
      h = std::move(out);
    }
    const std::size_t C = net.layers.back().out;
    std::vector<Id> per_sample;
    for (std::size_t b = 0; b < B; ++b) {
      std::vector<Id> exps;
      for (std::size_t c = 0; c < C; ++c) exps.push_back(tape.exp(h[b * C + c]));
      const Id lse = tape.log(tape.sum(exps));
      per_sample.push_back(tape.sub(lse, h[b * C + static_cast<std::size_t>(labels[b])]));
    }
    step_losses.push_back(tape.scale(tape.sum(per_sample), 1.0 / static_cast<double>(B)));
  }
  const Id loss = tape.sum(step_losses);
  const auto g = tape.gradient(loss);

  OracleRun r;
  r.loss = tape.value(loss);
  r.weight_grads.resize(nl);
  r.decay_grads.assign(nl, 0.0);
  r.m.resize(nl);
  r.delta.resize(nl);
  r.spike_grad.resize(nl);
  r.surrogate = h_vals;
  for (std::size_t l = 0; l < nl; ++l) {
    if (net.layers[l].kind != TinyLayer::Kind::frozen) {
      for (Id w : W[l]) r.weight_grads[l].push_back(g[w]);
    }
    if (plif && net.layers[l].kind == TinyLayer::Kind::spiking) {
      r.decay_grads[l] = g[lam[l] - 1];  // the leaf created just before
    }
    for (std::size_t t = 0; t < m_ids[l].size(); ++t) {
      std::vector<double> mv, dv, sv;
      for (Id id : m_ids[l][t]) {
        mv.push_back(tape.value(id));
        dv.push_back(g[id]);
      }
      for (Id id : s_ids[l][t]) sv.push_back(g[id]);
      r.m[l].push_back(std::move(mv));
      r.delta[l].push_back(std::move(dv));
      r.spike_grad[l].push_back(std::move(sv));
    }
  }
  return r;
}

}  // namespace stdl::verify

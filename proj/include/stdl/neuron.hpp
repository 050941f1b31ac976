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

// Discrete-time spiking neurons (LIF, PLIF, ALIF) and the triangle surrogate.
//
// One step of every model:
//   a[t] = rho * a[t-1] + s[t-1]             (ALIF only)
//   theta[t] = v_th + beta * a[t]            (v_th for LIF/PLIF)
//   m[t] = lambda * u[t-1] + I[t]
//   s[t] = step(m[t] - theta[t])
//   u[t] = m[t] - v_th * s[t]
// PLIF uses lambda = sigmoid(w) with a trainable w per layer.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "stdl/tensor.hpp"

namespace stdl {

enum class NeuronModel { lif, plif, alif };
enum class ResetGrad { detached, exact };
/// heaviside is the real spiking neuron; sigmoid is a smooth stand-in whose
/// surrogate is its exact derivative, used for finite-difference checks.
enum class SpikeFn { heaviside, sigmoid };

struct NeuronConfig {
  double lambda = 0.1;
  double v_th = 1.0;
  double gamma = 1.0;
  ResetGrad reset_grad = ResetGrad::detached;
  NeuronModel model = NeuronModel::lif;
  double alif_beta = 0.1;
  double alif_rho = 0.9;
  SpikeFn spike_fn = SpikeFn::heaviside;
  double sigmoid_slope = 4.0;

  void validate() const {
    if (!(lambda >= 0.0 && lambda < 1.0)) {
      throw std::invalid_argument("neuron lambda must lie in [0, 1), got " +
                                  std::to_string(lambda));
    }
    if (!(v_th > 0.0)) throw std::invalid_argument("neuron v_th must be > 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("neuron gamma must be > 0");
    if (model == NeuronModel::alif && !(alif_rho >= 0.0 && alif_rho < 1.0)) {
      throw std::invalid_argument("ALIF rho must lie in [0, 1)");
    }
    if (spike_fn == SpikeFn::sigmoid && !(sigmoid_slope > 0.0)) {
      throw std::invalid_argument("sigmoid slope must be > 0");
    }
  }

  bool operator==(const NeuronConfig&) const = default;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Triangle surrogate 1/gamma^2 * max(0, gamma - |m - center|).
template <class Real>
Real triangle(Real m, Real center, Real gamma) {
  const Real d = gamma - std::abs(m - center);
  return d > Real(0) ? d / (gamma * gamma) : Real(0);
}

template <class Real>
Tensor<Real> surrogate(const Tensor<Real>& m, const NeuronConfig& cfg) {
  Tensor<Real> h(m.shape());
  const Real vth = static_cast<Real>(cfg.v_th);
  const Real gamma = static_cast<Real>(cfg.gamma);
  for (std::size_t i = 0; i < m.size(); ++i) h[i] = triangle(m[i], vth, gamma);
  return h;
}

template <class Real>
struct NeuronState {
  Tensor<Real> m;
  Tensor<Real> u;
  Tensor<Real> s;
  Tensor<Real> a;  // ALIF adaptation, empty otherwise

  static NeuronState zeros(const Shape& shape, NeuronModel model) {
    NeuronState st{Tensor<Real>(shape), Tensor<Real>(shape), Tensor<Real>(shape),
                   Tensor<Real>()};
    if (model == NeuronModel::alif) st.a = Tensor<Real>(shape);
    return st;
  }
};

/// Values a backward step needs from its forward step.
template <class Real>
struct NeuronCache {
  Tensor<Real> m;
  Tensor<Real> a;       // ALIF
  Tensor<Real> u_prev;  // PLIF

  std::size_t bytes() const { return m.bytes() + a.bytes() + u_prev.bytes(); }
};

/// Gradient flowing backward in time: dL/du[t] and, for exact ALIF,
/// dL/da[t+1]. Empty tensors mean zero.
template <class Real>
struct NeuronCarry {
  Tensor<Real> du;
  Tensor<Real> da;

  void clear() {
    du = Tensor<Real>();
    da = Tensor<Real>();
  }
};

namespace detail {

template <class Real>
Real spike_value(Real x, const NeuronConfig& cfg) {
  if (cfg.spike_fn == SpikeFn::heaviside) return x >= Real(0) ? Real(1) : Real(0);
  return static_cast<Real>(sigmoid(cfg.sigmoid_slope * static_cast<double>(x)));
}

template <class Real>
Real spike_slope(Real m, Real threshold, const NeuronConfig& cfg) {
  if (cfg.spike_fn == SpikeFn::heaviside) {
    return triangle(m, threshold, static_cast<Real>(cfg.gamma));
  }
  const Real s = static_cast<Real>(
      sigmoid(cfg.sigmoid_slope * static_cast<double>(m - threshold)));
  return static_cast<Real>(cfg.sigmoid_slope) * s * (Real(1) - s);
}

}  // namespace detail

/// One forward step with an explicit decay (PLIF passes sigmoid(w)).
template <class Real>
NeuronState<Real> neuron_step(const NeuronState<Real>& prev,
                              const Tensor<Real>& current, const NeuronConfig& cfg,
                              Real lambda, NeuronCache<Real>* cache = nullptr) {
  prev.u.check_same(current, "neuron_step");
  const bool alif = cfg.model == NeuronModel::alif;
  const Real vth = static_cast<Real>(cfg.v_th);
  NeuronState<Real> next{Tensor<Real>(current.shape()), Tensor<Real>(current.shape()),
                         Tensor<Real>(current.shape()), Tensor<Real>()};
  if (alif) {
    if (prev.a.size() != current.size() || prev.s.size() != current.size()) {
      throw ShapeError("ALIF step needs adaptation and spike state");
    }
    next.a = Tensor<Real>(current.shape());
  }
  const Real beta = static_cast<Real>(cfg.alif_beta);
  const Real rho = static_cast<Real>(cfg.alif_rho);
  for (std::size_t i = 0; i < current.size(); ++i) {
    Real threshold = vth;
    if (alif) {
      next.a[i] = rho * prev.a[i] + prev.s[i];
      threshold = vth + beta * next.a[i];
    }
    const Real m = lambda * prev.u[i] + current[i];
    const Real s = detail::spike_value(m - threshold, cfg);
    next.m[i] = m;
    next.s[i] = s;
    next.u[i] = m - vth * s;
  }
  if (cache != nullptr) {
    cache->m = next.m;
    cache->a = alif ? next.a : Tensor<Real>();
    cache->u_prev = cfg.model == NeuronModel::plif ? prev.u : Tensor<Real>();
  }
  return next;
}

template <class Real>
NeuronState<Real> lif_step(const NeuronState<Real>& prev, const Tensor<Real>& current,
                           const NeuronConfig& cfg) {
  return neuron_step(prev, current, cfg, static_cast<Real>(cfg.lambda));
}

template <class Real>
NeuronState<Real> plif_step(const NeuronState<Real>& prev, const Tensor<Real>& current,
                            const NeuronConfig& cfg, Real decay_param,
                            NeuronCache<Real>* cache = nullptr) {
  return neuron_step(prev, current, cfg,
                     static_cast<Real>(sigmoid(static_cast<double>(decay_param))),
                     cache);
}

template <class Real>
NeuronState<Real> alif_step(const NeuronState<Real>& prev, const Tensor<Real>& current,
                            const NeuronConfig& cfg) {
  if (cfg.model != NeuronModel::alif) {
    throw std::invalid_argument("alif_step needs model = alif");
  }
  return neuron_step(prev, current, cfg, static_cast<Real>(cfg.lambda));
}

/// Backward through one step. grad_spike is dL/ds[t] arriving from the layer
/// above at the same step. On entry carry holds dL/du[t] (and dL/da[t+1]);
/// on exit it holds the values for step t-1. Returns dL/dm[t], which is also
/// dL/dI[t]. If grad_lambda is given, dL/dlambda is accumulated into it.
template <class Real>
Tensor<Real> neuron_step_backward(const NeuronCache<Real>& cache,
                                  const Tensor<Real>& grad_spike,
                                  NeuronCarry<Real>& carry, const NeuronConfig& cfg,
                                  Real lambda, Real* grad_lambda = nullptr) {
  if (cache.m.empty()) throw std::logic_error("neuron backward: missing cache");
  cache.m.check_same(grad_spike, "neuron_step_backward");
  const bool alif = cfg.model == NeuronModel::alif;
  const bool exact = cfg.reset_grad == ResetGrad::exact;
  if (alif && cache.a.size() != cache.m.size()) {
    throw std::logic_error("neuron backward: missing ALIF adaptation cache");
  }
  if (grad_lambda != nullptr && cache.u_prev.size() != cache.m.size()) {
    throw std::logic_error("neuron backward: missing PLIF potential cache");
  }
  const bool has_du = carry.du.size() == cache.m.size();
  const bool has_da = carry.da.size() == cache.m.size();
  const Real vth = static_cast<Real>(cfg.v_th);
  const Real beta = static_cast<Real>(cfg.alif_beta);
  const Real rho = static_cast<Real>(cfg.alif_rho);

  Tensor<Real> delta(cache.m.shape());
  Tensor<Real> next_du(cache.m.shape());
  Tensor<Real> next_da;
  if (alif && exact) next_da = Tensor<Real>(cache.m.shape());
  Real dlambda = 0;
  for (std::size_t i = 0; i < cache.m.size(); ++i) {
    const Real threshold = alif ? vth + beta * cache.a[i] : vth;
    const Real h = detail::spike_slope(cache.m[i], threshold, cfg);
    const Real du = has_du ? carry.du[i] : Real(0);
    Real gs = grad_spike[i];
    if (exact) {
      gs -= vth * du;
      if (has_da) gs += carry.da[i];
    }
    const Real d = gs * h + du;
    delta[i] = d;
    next_du[i] = lambda * d;
    if (alif && exact) {
      next_da[i] = -beta * gs * h + (has_da ? rho * carry.da[i] : Real(0));
    }
    if (grad_lambda != nullptr) dlambda += d * cache.u_prev[i];
  }
  if (grad_lambda != nullptr) *grad_lambda += dlambda;
  carry.du = std::move(next_du);
  carry.da = std::move(next_da);
  return delta;
}

}  // namespace stdl

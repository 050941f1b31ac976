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

// Executable layers. Every layer works on a batch: tensors are
// [batch, ...layer shape]. forward() advances the layer's neuron state by
// one step and optionally fills a cache; backward() consumes that cache,
// accumulates parameter gradients and returns the gradient for its input.
//
// Temporal gradient flows through LayerCarry. An empty carry means the
// step is treated as the last one, which is how the online regimes drop
// the cross-step terms.

#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stdl/auxiliary.hpp"
#include "stdl/network.hpp"
#include "stdl/neuron.hpp"
#include "stdl/rng.hpp"
#include "stdl/tensor.hpp"

namespace stdl {

template <class Real>
struct Param {
  std::string name;
  Tensor<Real> value;
  Tensor<Real> grad;
  Tensor<Real> velocity;

  Param() = default;
  Param(std::string n, Tensor<Real> v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()),
        velocity(value.shape()) {}
};

template <class Real>
struct LayerCache {
  std::vector<Tensor<Real>> tensors;
  std::vector<NeuronCache<Real>> neurons;

  std::size_t bytes() const {
    std::size_t b = 0;
    for (const auto& t : tensors) b += t.bytes();
    for (const auto& n : neurons) b += n.bytes();
    return b;
  }
};

template <class Real>
struct LayerState {
  std::vector<NeuronState<Real>> neurons;
};

template <class Real>
struct LayerCarry {
  std::vector<NeuronCarry<Real>> neurons;

  void clear() {
    for (auto& n : neurons) n.clear();
  }
};

inline Shape batched(std::size_t batch, const Shape& s) {
  Shape out{batch};
  out.insert(out.end(), s.begin(), s.end());
  return out;
}

template <class Real>
class Layer {
 public:
  explicit Layer(LayerSpec spec) : spec_(std::move(spec)) {}
  virtual ~Layer() = default;

  const LayerSpec& spec() const { return spec_; }

  virtual LayerState<Real> initial_state(std::size_t /*batch*/) const { return {}; }
  virtual LayerCarry<Real> initial_carry() const { return {}; }

  virtual Tensor<Real> forward(const Tensor<Real>& x, LayerState<Real>& state,
                               LayerCache<Real>* cache) = 0;
  virtual Tensor<Real> backward(const Tensor<Real>& grad_out,
                                const LayerCache<Real>& cache, LayerCarry<Real>& carry,
                                bool need_input_grad) = 0;

  std::vector<Param<Real>>& params() { return params_; }
  const std::vector<Param<Real>>& params() const { return params_; }

 protected:
  std::size_t batch_of(const Tensor<Real>& x) const {
    const std::size_t per = shape_size(spec_.in_shape);
    if (x.rank() == 0 || per == 0 || x.size() % per != 0 || x.size() / per != x.dim(0)) {
      throw ShapeError(std::string(to_string(spec_.kind)) + " expects input " +
                       shape_str(spec_.in_shape) + " per sample, got " +
                       shape_str(x.shape()));
    }
    return x.dim(0);
  }
  static void require_cache(const LayerCache<Real>& c, std::size_t tensors,
                            std::size_t neurons) {
    if (c.tensors.size() < tensors || c.neurons.size() < neurons) {
      throw std::logic_error("layer backward: missing cache");
    }
  }

  LayerSpec spec_;
  std::vector<Param<Real>> params_;
};

/// The neuron half of a spiking layer; PLIF adds one trainable decay
/// parameter w with lambda = sigmoid(w).
template <class Real>
class SpikingUnit {
 public:
  SpikingUnit(const NeuronConfig& cfg, Param<Real>* decay) : cfg_(cfg), decay_(decay) {}

  Real lambda() const {
    if (cfg_.model == NeuronModel::plif) {
      return static_cast<Real>(sigmoid(static_cast<double>(decay_->value[0])));
    }
    return static_cast<Real>(cfg_.lambda);
  }

  Tensor<Real> step(NeuronState<Real>& state, const Tensor<Real>& current,
                    NeuronCache<Real>* cache) const {
    state = neuron_step(state, current, cfg_, lambda(), cache);
    return state.s;
  }

  Tensor<Real> backward(const NeuronCache<Real>& cache, const Tensor<Real>& grad_spike,
                        NeuronCarry<Real>& carry) const {
    const Real lam = lambda();
    if (cfg_.model != NeuronModel::plif) {
      return neuron_step_backward(cache, grad_spike, carry, cfg_, lam);
    }
    Real dlam = 0;
    auto delta = neuron_step_backward(cache, grad_spike, carry, cfg_, lam, &dlam);
    decay_->grad[0] += dlam * lam * (Real(1) - lam);
    return delta;
  }

  const NeuronConfig& config() const { return cfg_; }

 private:
  NeuronConfig cfg_;
  Param<Real>* decay_;
};

struct InitOptions {
  double gain = 1.0;
};

namespace detail {

template <class Real>
Tensor<Real> kaiming(const Shape& shape, std::size_t fan_in, double gain, Rng& rng) {
  Tensor<Real> w(shape);
  const double std = gain * std::sqrt(2.0 / static_cast<double>(fan_in));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<Real>(std * rng.normal());
  return w;
}

template <class Real>
Param<Real> plif_param(const NeuronConfig& cfg) {
  // Start at the configured lambda.
  return Param<Real>("decay", Tensor<Real>({1}, static_cast<Real>(logit(cfg.lambda))));
}

}  // namespace detail

/// encode_conv and conv: convolution followed by spiking neurons.
template <class Real>
class ConvSpiking : public Layer<Real> {
 public:
  ConvSpiking(const LayerSpec& spec, const NeuronConfig& cfg, Rng rng,
              const InitOptions& init)
      : Layer<Real>(spec), cfg_(cfg) {
    const std::size_t cin = spec.in_shape.at(0);
    const std::size_t fan_in = cin * spec.kernel * spec.kernel;
    this->params_.reserve(2);
    this->params_.emplace_back(
        "weight", detail::kaiming<Real>({spec.channels, cin, spec.kernel, spec.kernel},
                                        fan_in, init.gain, rng));
    if (cfg.model == NeuronModel::plif) this->params_.push_back(detail::plif_param<Real>(cfg));
  }

  LayerState<Real> initial_state(std::size_t batch) const override {
    return {{NeuronState<Real>::zeros(batched(batch, this->spec_.out_shape), cfg_.model)}};
  }
  LayerCarry<Real> initial_carry() const override { return {{NeuronCarry<Real>{}}}; }

  Tensor<Real> forward(const Tensor<Real>& x, LayerState<Real>& state,
                       LayerCache<Real>* cache) override {
    this->batch_of(x);
    const auto& s = this->spec_;
    Tensor<Real> current = conv2d(x, weight().value, s.stride, s.padding);
    NeuronCache<Real> nc;
    auto out = unit().step(state.neurons.at(0), current, cache ? &nc : nullptr);
    if (cache != nullptr) {
      cache->tensors = {x};
      cache->neurons = {std::move(nc)};
    }
    return out;
  }

  Tensor<Real> backward(const Tensor<Real>& grad_out, const LayerCache<Real>& cache,
                        LayerCarry<Real>& carry, bool need_input_grad) override {
    this->require_cache(cache, 1, 1);
    const auto& s = this->spec_;
    auto delta = unit().backward(cache.neurons[0], grad_out, carry.neurons.at(0));
    Tensor<Real> gx;
    conv2d_backward(cache.tensors[0], weight().value, s.stride, s.padding, delta,
                    need_input_grad ? &gx : nullptr, &weight().grad);
    return gx;
  }

 private:
  Param<Real>& weight() { return this->params_[0]; }
  SpikingUnit<Real> unit() {
    return {cfg_, cfg_.model == NeuronModel::plif ? &this->params_[1] : nullptr};
  }
  NeuronConfig cfg_;
};

/// Fully connected spiking layer on the flattened input.
template <class Real>
class LinearSpiking : public Layer<Real> {
 public:
  LinearSpiking(const LayerSpec& spec, const NeuronConfig& cfg, Rng rng,
                const InitOptions& init)
      : Layer<Real>(spec), cfg_(cfg) {
    const std::size_t d = shape_size(spec.in_shape);
    this->params_.reserve(2);
    this->params_.emplace_back("weight",
                               detail::kaiming<Real>({spec.channels, d}, d, init.gain, rng));
    if (cfg.model == NeuronModel::plif) this->params_.push_back(detail::plif_param<Real>(cfg));
  }

  LayerState<Real> initial_state(std::size_t batch) const override {
    return {{NeuronState<Real>::zeros({batch, this->spec_.channels}, cfg_.model)}};
  }
  LayerCarry<Real> initial_carry() const override { return {{NeuronCarry<Real>{}}}; }

  Tensor<Real> forward(const Tensor<Real>& x, LayerState<Real>& state,
                       LayerCache<Real>* cache) override {
    const std::size_t b = this->batch_of(x);
    const std::size_t d = shape_size(this->spec_.in_shape);
    const std::size_t n = this->spec_.channels;
    Tensor<Real> current({b, n});
    gemm(Trans::no, Trans::yes, b, n, d, Real(1), x.ptr(), weight().value.ptr(), Real(0),
         current.ptr());
    NeuronCache<Real> nc;
    auto out = unit().step(state.neurons.at(0), current, cache ? &nc : nullptr);
    if (cache != nullptr) {
      cache->tensors = {x};
      cache->neurons = {std::move(nc)};
    }
    return out;
  }

  Tensor<Real> backward(const Tensor<Real>& grad_out, const LayerCache<Real>& cache,
                        LayerCarry<Real>& carry, bool need_input_grad) override {
    this->require_cache(cache, 1, 1);
    const auto& x = cache.tensors[0];
    const std::size_t b = x.dim(0);
    const std::size_t d = shape_size(this->spec_.in_shape);
    const std::size_t n = this->spec_.channels;
    auto delta = unit().backward(cache.neurons[0], grad_out.reshaped({b, n}),
                                 carry.neurons.at(0));
    gemm(Trans::yes, Trans::no, n, d, b, Real(1), delta.ptr(), x.ptr(), Real(1),
         weight().grad.ptr());
    if (!need_input_grad) return {};
    Tensor<Real> gx(x.shape());
    gemm(Trans::no, Trans::no, b, d, n, Real(1), delta.ptr(), weight().value.ptr(), Real(0),
         gx.ptr());
    return gx;
  }

 private:
  Param<Real>& weight() { return this->params_[0]; }
  SpikingUnit<Real> unit() {
    return {cfg_, cfg_.model == NeuronModel::plif ? &this->params_[1] : nullptr};
  }
  NeuronConfig cfg_;
};

/// Linear readout without neurons: per-step logits. Caches its input and
/// the logits it produced.
template <class Real>
class Classifier : public Layer<Real> {
 public:
  Classifier(const LayerSpec& spec, Rng rng, const InitOptions& init) : Layer<Real>(spec) {
    const std::size_t d = shape_size(spec.in_shape);
    Tensor<Real> w({spec.channels, d});
    const double std = init.gain * std::sqrt(1.0 / static_cast<double>(d));
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<Real>(std * rng.normal());
    this->params_.emplace_back("weight", std::move(w));
  }

  Tensor<Real> forward(const Tensor<Real>& x, LayerState<Real>&,
                       LayerCache<Real>* cache) override {
    const std::size_t b = this->batch_of(x);
    const std::size_t d = shape_size(this->spec_.in_shape);
    const std::size_t n = this->spec_.channels;
    Tensor<Real> z({b, n});
    gemm(Trans::no, Trans::yes, b, n, d, Real(1), x.ptr(), this->params_[0].value.ptr(),
         Real(0), z.ptr());
    if (cache != nullptr) cache->tensors = {x, z};
    return z;
  }

  Tensor<Real> backward(const Tensor<Real>& grad_out, const LayerCache<Real>& cache,
                        LayerCarry<Real>&, bool need_input_grad) override {
    this->require_cache(cache, 1, 0);
    const auto& x = cache.tensors[0];
    const std::size_t b = x.dim(0);
    const std::size_t d = shape_size(this->spec_.in_shape);
    const std::size_t n = this->spec_.channels;
    auto& w = this->params_[0];
    gemm(Trans::yes, Trans::no, n, d, b, Real(1), grad_out.ptr(), x.ptr(), Real(1),
         w.grad.ptr());
    if (!need_input_grad) return {};
    Tensor<Real> gx(x.shape());
    gemm(Trans::no, Trans::no, b, d, n, Real(1), grad_out.ptr(), w.value.ptr(), Real(0),
         gx.ptr());
    return gx;
  }
};

template <class Real>
class AvgPool : public Layer<Real> {
 public:
  explicit AvgPool(const LayerSpec& spec) : Layer<Real>(spec) {}

  Tensor<Real> forward(const Tensor<Real>& x, LayerState<Real>&,
                       LayerCache<Real>* cache) override {
    this->batch_of(x);
    if (cache != nullptr) *cache = {};
    return avgpool2d(x, this->spec_.kernel, this->spec_.stride);
  }

  Tensor<Real> backward(const Tensor<Real>& grad_out, const LayerCache<Real>&,
                        LayerCarry<Real>&, bool need_input_grad) override {
    if (!need_input_grad) return {};
    return avgpool2d_backward(batched(grad_out.dim(0), this->spec_.in_shape),
                              this->spec_.kernel, this->spec_.stride, grad_out);
  }
};

/// Two conv + neuron stages with an additive shortcut before the second
/// neuron. The shortcut is a 1x1 projection when channels or stride change.
template <class Real>
class ResidualBlock : public Layer<Real> {
 public:
  ResidualBlock(const LayerSpec& spec, const NeuronConfig& cfg, Rng rng,
                const InitOptions& init)
      : Layer<Real>(spec), cfg_(cfg) {
    const std::size_t cin = spec.in_shape.at(0);
    const std::size_t c = spec.channels;
    project_ = cin != c || spec.stride != 1;
    this->params_.reserve(4);
    Rng r1 = rng.split("conv1"), r2 = rng.split("conv2"), rp = rng.split("proj");
    this->params_.emplace_back("conv1",
                               detail::kaiming<Real>({c, cin, 3, 3}, cin * 9, init.gain, r1));
    this->params_.emplace_back("conv2",
                               detail::kaiming<Real>({c, c, 3, 3}, c * 9, init.gain, r2));
    if (project_) {
      this->params_.emplace_back("proj",
                                 detail::kaiming<Real>({c, cin, 1, 1}, cin, init.gain, rp));
    }
    if (cfg.model == NeuronModel::plif) {
      decay_index_ = this->params_.size();
      this->params_.push_back(detail::plif_param<Real>(cfg));
    }
  }

  LayerState<Real> initial_state(std::size_t batch) const override {
    const Shape s = batched(batch, this->spec_.out_shape);
    return {{NeuronState<Real>::zeros(s, cfg_.model), NeuronState<Real>::zeros(s, cfg_.model)}};
  }
  LayerCarry<Real> initial_carry() const override {
    return {{NeuronCarry<Real>{}, NeuronCarry<Real>{}}};
  }

  Tensor<Real> forward(const Tensor<Real>& x, LayerState<Real>& state,
                       LayerCache<Real>* cache) override {
    this->batch_of(x);
    const std::size_t stride = this->spec_.stride;
    NeuronCache<Real> c1, c2;
    auto s1 = unit().step(state.neurons.at(0), conv2d(x, this->params_[0].value, stride, 1),
                          cache ? &c1 : nullptr);
    Tensor<Real> current = conv2d(s1, this->params_[1].value, 1, 1);
    if (project_) {
      current += conv2d(x, this->params_[2].value, stride, 0);
    } else {
      current += x;
    }
    auto out = unit().step(state.neurons.at(1), current, cache ? &c2 : nullptr);
    if (cache != nullptr) {
      cache->tensors = {x, std::move(s1)};
      cache->neurons = {std::move(c1), std::move(c2)};
    }
    return out;
  }

  Tensor<Real> backward(const Tensor<Real>& grad_out, const LayerCache<Real>& cache,
                        LayerCarry<Real>& carry, bool need_input_grad) override {
    this->require_cache(cache, 2, 2);
    const auto& x = cache.tensors[0];
    const auto& s1 = cache.tensors[1];
    const std::size_t stride = this->spec_.stride;
    auto d2 = unit().backward(cache.neurons[1], grad_out, carry.neurons.at(1));
    Tensor<Real> gs1;
    conv2d_backward(s1, this->params_[1].value, 1, 1, d2, &gs1, &this->params_[1].grad);
    Tensor<Real> gx_short;
    if (project_) {
      conv2d_backward(x, this->params_[2].value, stride, 0, d2,
                      need_input_grad ? &gx_short : nullptr, &this->params_[2].grad);
    } else if (need_input_grad) {
      gx_short = d2;
    }
    auto d1 = unit().backward(cache.neurons[0], gs1, carry.neurons.at(0));
    Tensor<Real> gx;
    conv2d_backward(x, this->params_[0].value, stride, 1, d1,
                    need_input_grad ? &gx : nullptr, &this->params_[0].grad);
    if (need_input_grad) gx += gx_short;
    return gx;
  }

 private:
  SpikingUnit<Real> unit() {
    return {cfg_, cfg_.model == NeuronModel::plif ? &this->params_[decay_index_] : nullptr};
  }
  NeuronConfig cfg_;
  bool project_ = false;
  std::size_t decay_index_ = 0;
};

/// Frozen shape adapter. Spatial to spatial: adaptive average pooling to
/// the target grid, then a fixed channel map. Anything else: the flattened
/// input goes through the same fixed map. The map averages contiguous
/// groups when shrinking and repeats entries when growing.
template <class Real>
class Adapter : public Layer<Real> {
 public:
  explicit Adapter(const LayerSpec& spec) : Layer<Real>(spec) {
    const auto& in = spec.in_shape;
    const auto& out = spec.out_shape;
    spatial_ = in.size() == 3 && out.size() == 3;
    from_ = spatial_ ? in[0] : shape_size(in);
    to_ = spatial_ ? out[0] : shape_size(out);
    map_ = channel_map(from_, to_);
  }

  /// map[o * from + i]
  static std::vector<Real> channel_map(std::size_t from, std::size_t to) {
    std::vector<Real> m(to * from, Real(0));
    if (from >= to) {
      for (std::size_t o = 0; o < to; ++o) {
        const std::size_t lo = o * from / to;
        const std::size_t hi = (o + 1) * from / to;
        for (std::size_t i = lo; i < hi; ++i) {
          m[o * from + i] = Real(1) / static_cast<Real>(hi - lo);
        }
      }
    } else {
      for (std::size_t o = 0; o < to; ++o) m[o * from + o * from / to] = Real(1);
    }
    return m;
  }

  Tensor<Real> forward(const Tensor<Real>& x, LayerState<Real>&,
                       LayerCache<Real>* cache) override {
    const std::size_t b = this->batch_of(x);
    if (cache != nullptr) *cache = {};
    Tensor<Real> src = x;
    std::size_t pixels = 1;
    if (spatial_) {
      const auto& o = this->spec_.out_shape;
      if (x.dim(2) != o[1] || x.dim(3) != o[2]) src = adaptive_avgpool2d(x, o[1], o[2]);
      pixels = o[1] * o[2];
    }
    Tensor<Real> y(batched(b, this->spec_.out_shape));
    for (std::size_t n = 0; n < b; ++n) {
      const Real* in = src.ptr() + n * from_ * pixels;
      Real* out = y.ptr() + n * to_ * pixels;
      gemm(Trans::no, Trans::no, to_, pixels, from_, Real(1), map_.data(), in, Real(0), out);
    }
    return y;
  }

  Tensor<Real> backward(const Tensor<Real>& grad_out, const LayerCache<Real>&,
                        LayerCarry<Real>&, bool need_input_grad) override {
    if (!need_input_grad) return {};
    const std::size_t b = grad_out.dim(0);
    std::size_t pixels = 1;
    Shape mid = batched(b, this->spec_.in_shape);
    if (spatial_) {
      const auto& o = this->spec_.out_shape;
      pixels = o[1] * o[2];
      mid = {b, from_, o[1], o[2]};
    }
    Tensor<Real> gmid(mid);
    for (std::size_t n = 0; n < b; ++n) {
      gemm(Trans::yes, Trans::no, from_, pixels, to_, Real(1), map_.data(),
           grad_out.ptr() + n * to_ * pixels, Real(0), gmid.ptr() + n * from_ * pixels);
    }
    const auto& in = this->spec_.in_shape;
    if (spatial_ && (in[1] != mid[2] || in[2] != mid[3])) {
      return adaptive_avgpool2d_backward(batched(b, in), gmid);
    }
    return gmid.reshaped(batched(b, in));
  }

 private:
  bool spatial_ = false;
  std::size_t from_ = 0;
  std::size_t to_ = 0;
  std::vector<Real> map_;
};

template <class Real>
std::unique_ptr<Layer<Real>> make_layer(const LayerSpec& spec, const NeuronConfig& cfg,
                                        Rng rng, const InitOptions& init = {}) {
  switch (spec.kind) {
    case LayerKind::encode_conv:
    case LayerKind::conv:
      return std::make_unique<ConvSpiking<Real>>(spec, cfg, rng, init);
    case LayerKind::linear:
      return std::make_unique<LinearSpiking<Real>>(spec, cfg, rng, init);
    case LayerKind::avgpool:
      return std::make_unique<AvgPool<Real>>(spec);
    case LayerKind::residual_block:
      return std::make_unique<ResidualBlock<Real>>(spec, cfg, rng, init);
    case LayerKind::classifier:
      return std::make_unique<Classifier<Real>>(spec, rng, init);
    case LayerKind::adapter:
      return std::make_unique<Adapter<Real>>(spec);
  }
  throw NetworkError("unknown layer kind");
}

/// An ordered run of layers with ledger labels.
template <class Real>
struct Chain {
  std::vector<std::unique_ptr<Layer<Real>>> layers;
  std::vector<std::string> labels;

  std::size_t size() const { return layers.size(); }

  std::vector<LayerState<Real>> initial_state(std::size_t batch) const {
    std::vector<LayerState<Real>> s;
    for (const auto& l : layers) s.push_back(l->initial_state(batch));
    return s;
  }
  std::vector<LayerCarry<Real>> initial_carry() const {
    std::vector<LayerCarry<Real>> c;
    for (const auto& l : layers) c.push_back(l->initial_carry());
    return c;
  }
  std::vector<Param<Real>*> params() {
    std::vector<Param<Real>*> out;
    for (auto& l : layers) {
      for (auto& p : l->params()) out.push_back(&p);
    }
    return out;
  }
};

/// Main network plus one auxiliary chain per non-final subnetwork.
template <class Real>
class SpikingNetwork {
 public:
  SpikingNetwork(NetworkSpec spec, StdlPlan plan, std::uint64_t seed,
                 const InitOptions& init = {})
      : spec_(std::move(spec)), plan_(std::move(plan)) {
    spec_.infer();
    const Rng root(seed);
    const Rng weights = root.split("weights");
    for (std::size_t l = 1; l <= spec_.layers.size(); ++l) {
      main_.layers.push_back(make_layer<Real>(spec_.layers[l - 1], spec_.neuron,
                                              weights.split("layer" + std::to_string(l)),
                                              init));
      main_.labels.push_back(std::to_string(l));
    }
    if (plan_.auxiliaries.size() + 1 != plan_.partition.num_subnetworks()) {
      throw NetworkError("plan needs one auxiliary per non-final subnetwork");
    }
    if (plan_.partition.boundaries.empty() ||
        plan_.partition.boundaries.back() != spec_.layers.size()) {
      throw NetworkError("partition does not end at the last layer");
    }
    for (const auto& a : plan_.auxiliaries) {
      Chain<Real> chain;
      for (std::size_t i = 0; i < a.layers.size(); ++i) {
        const std::string label = "aux" + std::to_string(a.owner) + "." + std::to_string(i + 1);
        chain.layers.push_back(
            make_layer<Real>(a.layers[i], spec_.neuron, weights.split(label), init));
        chain.labels.push_back(label);
      }
      aux_.push_back(std::move(chain));
    }
  }

  SpikingNetwork(NetworkSpec spec, std::uint64_t seed, const InitOptions& init = {})
      : SpikingNetwork(inferred(spec), trivial_plan(inferred(spec), sizeof(Real)), seed,
                       init) {}

  const NetworkSpec& spec() const { return spec_; }
  const StdlPlan& plan() const { return plan_; }
  Chain<Real>& main() { return main_; }
  const Chain<Real>& main() const { return main_; }
  Chain<Real>& aux(std::size_t k) { return aux_.at(k - 1); }
  std::size_t num_subnetworks() const { return plan_.partition.num_subnetworks(); }

  std::vector<Param<Real>*> params() {
    auto out = main_.params();
    for (auto& a : aux_) {
      auto p = a.params();
      out.insert(out.end(), p.begin(), p.end());
    }
    return out;
  }

  void zero_grad() {
    for (auto* p : params()) p->grad.fill(Real(0));
  }

 private:
  static NetworkSpec inferred(NetworkSpec s) {
    s.infer();
    return s;
  }

  NetworkSpec spec_;
  StdlPlan plan_;
  Chain<Real> main_;
  std::vector<Chain<Real>> aux_;
};

}  // namespace stdl

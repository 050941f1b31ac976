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

// Declarative network description: layer list, shape inference, the cached
// state footprint of each layer, and the JSON description file format.

#pragma once

#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include "stdl/neuron.hpp"
#include "stdl/tensor.hpp"

namespace stdl {

enum class LayerKind {
  encode_conv,
  conv,
  linear,
  avgpool,
  residual_block,
  classifier,
  adapter,  // frozen shape adapter, only inside auxiliary networks
};

inline const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::encode_conv: return "encode_conv";
    case LayerKind::conv: return "conv";
    case LayerKind::linear: return "linear";
    case LayerKind::avgpool: return "avgpool";
    case LayerKind::residual_block: return "residual_block";
    case LayerKind::classifier: return "classifier";
    case LayerKind::adapter: return "adapter";
  }
  return "?";
}

inline LayerKind layer_kind_from_string(const std::string& s) {
  for (LayerKind k : {LayerKind::encode_conv, LayerKind::conv, LayerKind::linear,
                      LayerKind::avgpool, LayerKind::residual_block,
                      LayerKind::classifier, LayerKind::adapter}) {
    if (s == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown layer kind '" + s + "'");
}

inline bool is_spatial_kind(LayerKind k) {
  return k == LayerKind::encode_conv || k == LayerKind::conv ||
         k == LayerKind::avgpool || k == LayerKind::residual_block;
}

/// Layers that carry spiking neurons.
inline bool is_spiking_kind(LayerKind k) {
  return k == LayerKind::encode_conv || k == LayerKind::conv ||
         k == LayerKind::linear || k == LayerKind::residual_block;
}

/// Layers that count toward auxiliary depth and width.
inline bool is_capacity_kind(LayerKind k) { return is_spiking_kind(k); }

struct LayerSpec {
  LayerKind kind = LayerKind::conv;
  std::size_t channels = 0;  // output channels, features or classes
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t padding = 1;
  Shape target;  // adapter output shape

  // Filled by shape inference; per sample, no batch axis.
  Shape in_shape;
  Shape out_shape;
  std::size_t param_count = 0;

  bool operator==(const LayerSpec& o) const {
    return kind == o.kind && channels == o.channels && kernel == o.kernel &&
           stride == o.stride && padding == o.padding && target == o.target;
  }
};

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::size_t conv_extent(std::size_t in, std::size_t k, std::size_t s,
                               std::size_t p, const char* what) {
  const long long span = static_cast<long long>(in + 2 * p) - static_cast<long long>(k);
  if (s == 0 || span < 0) {
    throw NetworkError(std::string(what) + ": non-positive output extent (input " +
                       std::to_string(in) + ", kernel " + std::to_string(k) + ")");
  }
  return static_cast<std::size_t>(span) / s + 1;
}

inline void require_spatial(const Shape& in, const char* what) {
  if (in.size() != 3) {
    throw NetworkError(std::string(what) + " needs a CxHxW input, got " +
                       shape_str(in));
  }
}

}  // namespace detail

/// Infers out_shape and param_count of one layer from its input shape.
inline void infer_layer(LayerSpec& layer, const Shape& in) {
  layer.in_shape = in;
  switch (layer.kind) {
    case LayerKind::encode_conv:
    case LayerKind::conv: {
      detail::require_spatial(in, to_string(layer.kind));
      const auto h = detail::conv_extent(in[1], layer.kernel, layer.stride,
                                         layer.padding, "conv");
      const auto w = detail::conv_extent(in[2], layer.kernel, layer.stride,
                                         layer.padding, "conv");
      layer.out_shape = {layer.channels, h, w};
      layer.param_count = layer.channels * in[0] * layer.kernel * layer.kernel;
      break;
    }
    case LayerKind::residual_block: {
      detail::require_spatial(in, "residual_block");
      const auto h = detail::conv_extent(in[1], 3, layer.stride, 1, "residual_block");
      const auto w = detail::conv_extent(in[2], 3, layer.stride, 1, "residual_block");
      layer.out_shape = {layer.channels, h, w};
      layer.param_count = layer.channels * in[0] * 9 + layer.channels * layer.channels * 9;
      if (in[0] != layer.channels || layer.stride != 1) {
        layer.param_count += layer.channels * in[0];
      }
      break;
    }
    case LayerKind::avgpool: {
      detail::require_spatial(in, "avgpool");
      const auto h = detail::conv_extent(in[1], layer.kernel, layer.stride, 0, "avgpool");
      const auto w = detail::conv_extent(in[2], layer.kernel, layer.stride, 0, "avgpool");
      layer.out_shape = {in[0], h, w};
      layer.param_count = 0;
      break;
    }
    case LayerKind::linear:
    case LayerKind::classifier:
      layer.out_shape = {layer.channels};
      layer.param_count = layer.channels * shape_size(in);
      break;
    case LayerKind::adapter:
      if (layer.target.empty()) throw NetworkError("adapter needs a target shape");
      layer.out_shape = layer.target;
      layer.param_count = 0;  // frozen projection
      break;
  }
  if (layer.channels == 0 && layer.kind != LayerKind::avgpool &&
      layer.kind != LayerKind::adapter) {
    throw NetworkError(std::string(to_string(layer.kind)) + " needs channels > 0");
  }
}

/// Cached elements per sample needed to form this layer's weight gradient
/// for one step: afferent input plus membrane potentials (plus ALIF
/// adaptation and PLIF prior potentials).
inline std::size_t footprint_elements(const LayerSpec& layer, NeuronModel model) {
  const std::size_t in = shape_size(layer.in_shape);
  const std::size_t out = shape_size(layer.out_shape);
  std::size_t extra_per_neuron = 1;  // m
  if (model == NeuronModel::alif) ++extra_per_neuron;
  if (model == NeuronModel::plif) ++extra_per_neuron;
  switch (layer.kind) {
    case LayerKind::encode_conv:
    case LayerKind::conv:
    case LayerKind::linear:
      return in + extra_per_neuron * out;
    case LayerKind::residual_block:
      // stage 1 caches x and m1; stage 2 caches s1 and m2.
      return in + extra_per_neuron * out + out + extra_per_neuron * out;
    case LayerKind::classifier:
      return in + out;
    case LayerKind::avgpool:
    case LayerKind::adapter:
      return 0;
  }
  return 0;
}

struct NetworkSpec {
  Shape input_shape;  // C x H x W
  std::size_t num_classes = 10;
  std::size_t timesteps = 4;
  std::size_t reference_batch = 1;
  NeuronConfig neuron;
  std::vector<LayerSpec> layers;

  std::size_t num_layers() const { return layers.size(); }

  /// Validates structure and fills every layer's shapes.
  void infer() {
    if (layers.empty()) throw NetworkError("network has no layers");
    if (input_shape.empty()) throw NetworkError("network needs an input shape");
    if (timesteps == 0) throw NetworkError("timesteps must be >= 1");
    if (reference_batch == 0) throw NetworkError("reference batch must be >= 1");
    neuron.validate();
    if (layers.back().kind != LayerKind::classifier) {
      throw NetworkError("last layer must be a classifier");
    }
    if (layers.back().channels != num_classes) {
      throw NetworkError("classifier width " + std::to_string(layers.back().channels) +
                         " differs from num_classes " + std::to_string(num_classes));
    }
    Shape cur = input_shape;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      auto& l = layers[i];
      if (l.kind == LayerKind::encode_conv && i != 0) {
        throw NetworkError("encode_conv is only valid as the first layer");
      }
      if (l.kind == LayerKind::classifier && i + 1 != layers.size()) {
        throw NetworkError("classifier is only valid as the last layer");
      }
      if (l.kind == LayerKind::adapter) {
        throw NetworkError("adapter layers are reserved for auxiliary networks");
      }
      try {
        infer_layer(l, cur);
      } catch (const NetworkError& e) {
        throw NetworkError("layer " + std::to_string(i + 1) + ": " + e.what());
      }
      cur = l.out_shape;
    }
  }

  const Shape& output_shape_of(std::size_t layer_1based) const {
    return layers.at(layer_1based - 1).out_shape;
  }
};

/// Bytes of cached state for layer `layer` (1-based) at the reference batch.
inline std::size_t layer_footprint(const NetworkSpec& net, std::size_t layer,
                                   std::size_t element_width) {
  if (layer < 1 || layer > net.layers.size()) {
    throw std::out_of_range("layer index " + std::to_string(layer) +
                            " outside 1.." + std::to_string(net.layers.size()));
  }
  return footprint_elements(net.layers[layer - 1], net.neuron.model) *
         net.reference_batch * element_width;
}

inline std::vector<std::size_t> layer_footprints(const NetworkSpec& net,
                                                 std::size_t element_width) {
  std::vector<std::size_t> out;
  for (std::size_t l = 1; l <= net.layers.size(); ++l) {
    out.push_back(layer_footprint(net, l, element_width));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Description file format (JSON).

inline const char* to_string(NeuronModel m) {
  switch (m) {
    case NeuronModel::lif: return "lif";
    case NeuronModel::plif: return "plif";
    case NeuronModel::alif: return "alif";
  }
  return "?";
}

inline NeuronModel neuron_model_from_string(const std::string& s) {
  if (s == "lif") return NeuronModel::lif;
  if (s == "plif") return NeuronModel::plif;
  if (s == "alif") return NeuronModel::alif;
  throw std::invalid_argument("unknown neuron model '" + s + "'");
}

inline const char* to_string(ResetGrad r) {
  return r == ResetGrad::detached ? "detached" : "exact";
}

inline ResetGrad reset_grad_from_string(const std::string& s) {
  if (s == "detached") return ResetGrad::detached;
  if (s == "exact") return ResetGrad::exact;
  throw std::invalid_argument("unknown reset_grad '" + s + "'");
}

inline nlohmann::json to_json(const NeuronConfig& c) {
  nlohmann::json j{{"model", to_string(c.model)},
                   {"lambda", c.lambda},
                   {"v_th", c.v_th},
                   {"gamma", c.gamma},
                   {"reset_grad", to_string(c.reset_grad)}};
  if (c.model == NeuronModel::alif) {
    j["alif_beta"] = c.alif_beta;
    j["alif_rho"] = c.alif_rho;
  }
  if (c.spike_fn == SpikeFn::sigmoid) {
    j["spike_fn"] = "sigmoid";
    j["sigmoid_slope"] = c.sigmoid_slope;
  }
  return j;
}

inline NeuronConfig neuron_config_from_json(const nlohmann::json& j) {
  NeuronConfig c;
  c.model = neuron_model_from_string(j.value("model", "lif"));
  c.lambda = j.value("lambda", c.lambda);
  c.v_th = j.value("v_th", c.v_th);
  c.gamma = j.value("gamma", c.gamma);
  c.reset_grad = reset_grad_from_string(j.value("reset_grad", "detached"));
  c.alif_beta = j.value("alif_beta", c.alif_beta);
  c.alif_rho = j.value("alif_rho", c.alif_rho);
  const std::string fn = j.value("spike_fn", "heaviside");
  if (fn == "sigmoid") {
    c.spike_fn = SpikeFn::sigmoid;
  } else if (fn != "heaviside") {
    throw std::invalid_argument("unknown spike_fn '" + fn + "'");
  }
  c.sigmoid_slope = j.value("sigmoid_slope", c.sigmoid_slope);
  return c;
}

inline nlohmann::json to_json(const LayerSpec& l) {
  nlohmann::json j{{"kind", to_string(l.kind)}};
  switch (l.kind) {
    case LayerKind::encode_conv:
    case LayerKind::conv:
      j["channels"] = l.channels;
      j["kernel"] = l.kernel;
      j["stride"] = l.stride;
      j["padding"] = l.padding;
      break;
    case LayerKind::residual_block:
      j["channels"] = l.channels;
      j["stride"] = l.stride;
      break;
    case LayerKind::avgpool:
      j["kernel"] = l.kernel;
      j["stride"] = l.stride;
      break;
    case LayerKind::linear:
    case LayerKind::classifier:
      j["channels"] = l.channels;
      break;
    case LayerKind::adapter:
      j["target"] = l.target;
      break;
  }
  return j;
}

inline LayerSpec layer_spec_from_json(const nlohmann::json& j) {
  LayerSpec l;
  l.kind = layer_kind_from_string(j.at("kind").get<std::string>());
  l.channels = j.value("channels", std::size_t{0});
  switch (l.kind) {
    case LayerKind::avgpool:
      l.kernel = j.value("kernel", std::size_t{2});
      l.stride = j.value("stride", l.kernel);
      l.padding = 0;
      break;
    case LayerKind::residual_block:
      l.kernel = 3;
      l.stride = j.value("stride", std::size_t{1});
      l.padding = 1;
      break;
    case LayerKind::linear:
    case LayerKind::classifier:
    case LayerKind::adapter:
      l.kernel = 3;
      l.stride = 1;
      l.padding = 1;
      break;
    default:
      l.kernel = j.value("kernel", std::size_t{3});
      l.stride = j.value("stride", std::size_t{1});
      l.padding = j.value("padding", l.kernel / 2);
  }
  if (j.contains("target")) l.target = j.at("target").get<Shape>();
  return l;
}

inline nlohmann::json to_json(const NetworkSpec& n) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : n.layers) layers.push_back(to_json(l));
  return {{"input", n.input_shape},
          {"num_classes", n.num_classes},
          {"timesteps", n.timesteps},
          {"reference_batch", n.reference_batch},
          {"neuron", to_json(n.neuron)},
          {"layers", layers}};
}

inline NetworkSpec network_from_json(const nlohmann::json& j) {
  NetworkSpec n;
  n.input_shape = j.at("input").get<Shape>();
  n.num_classes = j.at("num_classes").get<std::size_t>();
  n.timesteps = j.value("timesteps", std::size_t{4});
  n.reference_batch = j.value("reference_batch", std::size_t{1});
  if (j.contains("neuron")) n.neuron = neuron_config_from_json(j.at("neuron"));
  for (const auto& lj : j.at("layers")) n.layers.push_back(layer_spec_from_json(lj));
  n.infer();
  return n;
}

inline NetworkSpec parse_network(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw NetworkError(std::string("network description: ") + e.what());
  }
  try {
    return network_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw NetworkError(std::string("network description: ") + e.what());
  }
}

inline NetworkSpec load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NetworkError("cannot open network file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_network(ss.str());
}

inline std::string dump_network(const NetworkSpec& n) { return to_json(n).dump(2) + "\n"; }

}  // namespace stdl

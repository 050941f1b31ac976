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

// JSON checkpoints of the main network. Auxiliary networks are training
// scaffolding and are not saved. Values are written as doubles, which
// round-trip float and double exactly.

#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "stdl/model.hpp"
#include "stdl/network.hpp"

namespace stdl {

inline constexpr const char* kCheckpointFormat = "stdl-checkpoint-1";

template <class Real>
nlohmann::json checkpoint_json(SpikingNetwork<Real>& net) {
  nlohmann::json params = nlohmann::json::array();
  auto& chain = net.main();
  for (std::size_t l = 0; l < chain.size(); ++l) {
    for (const auto& p : chain.layers[l]->params()) {
      std::vector<double> values(p.value.vec().begin(), p.value.vec().end());
      params.push_back({{"layer", chain.labels[l]},
                        {"name", p.name},
                        {"shape", p.value.shape()},
                        {"values", values}});
    }
  }
  return {{"format", kCheckpointFormat},
          {"precision", sizeof(Real) == 8 ? "float64" : "float32"},
          {"network", to_json(net.spec())},
          {"params", params}};
}

template <class Real>
void save_checkpoint(SpikingNetwork<Real>& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  out << checkpoint_json(net).dump() << '\n';
}

inline nlohmann::json read_checkpoint_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("checkpoint '" + path + "': " + e.what());
  }
  if (j.value("format", "") != kCheckpointFormat) {
    throw std::runtime_error("checkpoint '" + path + "': unknown format");
  }
  return j;
}

/// Rebuilds the main network (single scope) with the saved parameters.
template <class Real>
SpikingNetwork<Real> load_checkpoint(const std::string& path) {
  const auto j = read_checkpoint_json(path);
  SpikingNetwork<Real> net(network_from_json(j.at("network")), 0);
  auto& chain = net.main();
  std::size_t next = 0;
  const auto& params = j.at("params");
  for (std::size_t l = 0; l < chain.size(); ++l) {
    for (auto& p : chain.layers[l]->params()) {
      if (next >= params.size()) throw std::runtime_error("checkpoint has too few parameters");
      const auto& pj = params[next++];
      if (pj.at("layer").get<std::string>() != chain.labels[l] ||
          pj.at("name").get<std::string>() != p.name ||
          pj.at("shape").get<Shape>() != p.value.shape()) {
        throw std::runtime_error("checkpoint parameter " + std::to_string(next) +
                                 " does not match the network");
      }
      const auto values = pj.at("values").get<std::vector<double>>();
      for (std::size_t i = 0; i < values.size(); ++i) p.value[i] = static_cast<Real>(values[i]);
    }
  }
  if (next != params.size()) throw std::runtime_error("checkpoint has extra parameters");
  return net;
}

}  // namespace stdl

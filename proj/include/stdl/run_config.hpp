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

// Run configuration for the command-line tool: one JSON file per run,
// overridable by flags.

#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "stdl/partition.hpp"
#include "stdl/trainer.hpp"

namespace stdl {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// Bad configuration. `field` is a dotted path ("train.lr"); `line` is set
/// for syntax errors (1-based, 0 when unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, std::size_t line, const std::string& msg)
      : std::runtime_error(msg), field_(std::move(field)), line_(line) {}
  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

struct RunConfig {
  std::string network;                  // network JSON path
  std::vector<std::size_t> footprints;  // raw per-layer footprints (partition only)
  std::string dataset = "mnist";        // mnist | synth
  std::string data_root;                // empty: $STDL_DATA_ROOT or build default
  std::size_t synth_samples = 400;
  std::size_t synth_classes = 2;
  double synth_noise = 0.05;
  Regime regime = Regime::stdl;
  PartitionBudget budget = PartitionBudget::of_ratio(0.7);
  std::size_t timesteps = 0;  // 0: the network file's value
  TrainConfig train;
  std::string precision = "float32";
  std::string output_dir = "runs/latest";
  std::string checkpoint;  // probe / cka
  std::string against;     // cka: second checkpoint
  std::uint64_t seed = 0;

  std::size_t element_width() const { return precision == "float64" ? 8 : 4; }

  void validate() const {
    if (dataset != "mnist" && dataset != "synth") {
      throw ConfigError("dataset.name", 0, "dataset must be 'mnist' or 'synth', got '" + dataset + "'");
    }
    if (precision != "float32" && precision != "float64") {
      throw ConfigError("precision", 0, "precision must be float32 or float64");
    }
    if (synth_samples == 0 || synth_classes < 2) {
      throw ConfigError("dataset", 0, "synth needs samples >= 1 and classes >= 2");
    }
    if (output_dir.empty()) throw ConfigError("output_dir", 0, "output_dir is empty");
    try {
      train.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("train", 0, e.what());
    }
    // The budget only matters for stdl and for partition reports.
    try {
      budget.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("budget", 0, e.what());
    }
  }
};

namespace detail {

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

template <class T>
T field_as(const nlohmann::json& j, const std::string& path) {
  // nlohmann would wrap -1 into a huge unsigned value.
  if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
    if (!j.is_number_unsigned()) {
      throw ConfigError(path, 0, "field '" + path + "' must be a non-negative integer");
    }
  }
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(path, 0, "field '" + path + "' has the wrong type (" +
                                   std::string(j.type_name()) + ")");
  }
}

inline void reject_unknown(const nlohmann::json& j, const std::string& where,
                           const std::set<std::string>& known) {
  if (!j.is_object()) throw ConfigError(where, 0, "'" + where + "' must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) {
      const std::string path = where.empty() ? k : where + "." + k;
      throw ConfigError(path, 0, "unknown field '" + path + "'");
    }
  }
}

}  // namespace detail

/// Applies the fields present in `j` on top of `cfg`.
inline void merge_run_config(RunConfig& cfg, const nlohmann::json& j) {
  using detail::field_as;
  detail::reject_unknown(j, "", {"network", "footprints", "dataset", "regime", "budget",
                                 "timesteps", "train", "precision", "output_dir", "seed",
                                 "checkpoint", "against"});
  if (j.contains("network")) cfg.network = field_as<std::string>(j["network"], "network");
  if (j.contains("footprints")) {
    cfg.footprints = field_as<std::vector<std::size_t>>(j["footprints"], "footprints");
  }
  if (j.contains("dataset")) {
    const auto& d = j["dataset"];
    if (d.is_string()) {
      cfg.dataset = d.get<std::string>();
    } else {
      detail::reject_unknown(d, "dataset",
                             {"name", "root", "train_limit", "test_limit", "samples", "classes",
                              "noise"});
      if (d.contains("name")) cfg.dataset = field_as<std::string>(d["name"], "dataset.name");
      if (d.contains("root")) cfg.data_root = field_as<std::string>(d["root"], "dataset.root");
      if (d.contains("train_limit")) {
        cfg.train.train_limit = field_as<std::size_t>(d["train_limit"], "dataset.train_limit");
      }
      if (d.contains("test_limit")) {
        cfg.train.test_limit = field_as<std::size_t>(d["test_limit"], "dataset.test_limit");
      }
      if (d.contains("samples")) cfg.synth_samples = field_as<std::size_t>(d["samples"], "dataset.samples");
      if (d.contains("classes")) cfg.synth_classes = field_as<std::size_t>(d["classes"], "dataset.classes");
      if (d.contains("noise")) cfg.synth_noise = field_as<double>(d["noise"], "dataset.noise");
    }
  }
  if (j.contains("regime")) {
    try {
      cfg.regime = regime_from_string(field_as<std::string>(j["regime"], "regime"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("regime", 0, e.what());
    }
  }
  if (j.contains("budget")) {
    const auto& b = j["budget"];
    detail::reject_unknown(b, "budget", {"mode", "value"});
    const auto mode = field_as<std::string>(b.at("mode"), "budget.mode");
    if (!b.contains("value")) throw ConfigError("budget.value", 0, "budget.value is missing");
    if (mode == "ratio") {
      cfg.budget = PartitionBudget::of_ratio(field_as<double>(b["value"], "budget.value"));
    } else if (mode == "bytes") {
      cfg.budget = PartitionBudget::absolute(field_as<std::size_t>(b["value"], "budget.value"));
    } else {
      throw ConfigError("budget.mode", 0, "budget.mode must be 'ratio' or 'bytes'");
    }
  }
  if (j.contains("timesteps")) cfg.timesteps = field_as<std::size_t>(j["timesteps"], "timesteps");
  if (j.contains("train")) {
    const auto& t = j["train"];
    detail::reject_unknown(t, "train", {"epochs", "batch_size", "lr", "momentum", "weight_decay"});
    if (t.contains("epochs")) cfg.train.epochs = field_as<std::size_t>(t["epochs"], "train.epochs");
    if (t.contains("batch_size")) {
      cfg.train.batch_size = field_as<std::size_t>(t["batch_size"], "train.batch_size");
    }
    if (t.contains("lr")) cfg.train.lr = field_as<double>(t["lr"], "train.lr");
    if (t.contains("momentum")) cfg.train.momentum = field_as<double>(t["momentum"], "train.momentum");
    if (t.contains("weight_decay")) {
      cfg.train.weight_decay = field_as<double>(t["weight_decay"], "train.weight_decay");
    }
  }
  if (j.contains("precision")) cfg.precision = field_as<std::string>(j["precision"], "precision");
  if (j.contains("output_dir")) cfg.output_dir = field_as<std::string>(j["output_dir"], "output_dir");
  if (j.contains("checkpoint")) cfg.checkpoint = field_as<std::string>(j["checkpoint"], "checkpoint");
  if (j.contains("against")) cfg.against = field_as<std::string>(j["against"], "against");
  if (j.contains("seed")) cfg.seed = field_as<std::uint64_t>(j["seed"], "seed");
  cfg.train.seed = cfg.seed;
}

inline RunConfig parse_run_config(const std::string& text, const std::string& source = "config") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t line = detail::line_of(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError("", line, source + ":" + std::to_string(line) + ": " + e.what());
  }
  RunConfig cfg;
  merge_run_config(cfg, j);
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path);
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json budget;
  if (c.budget.mode == PartitionBudget::Mode::ratio) {
    budget = {{"mode", "ratio"}, {"value", c.budget.ratio}};
  } else {
    budget = {{"mode", "bytes"}, {"value", c.budget.bytes}};
  }
  nlohmann::json j = {
      {"network", c.network},
      {"dataset",
       {{"name", c.dataset},
        {"root", c.data_root},
        {"train_limit", c.train.train_limit},
        {"test_limit", c.train.test_limit},
        {"samples", c.synth_samples},
        {"classes", c.synth_classes},
        {"noise", c.synth_noise}}},
      {"regime", to_string(c.regime)},
      {"budget", budget},
      {"timesteps", c.timesteps},
      {"train",
       {{"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"lr", c.train.lr},
        {"momentum", c.train.momentum},
        {"weight_decay", c.train.weight_decay}}},
      {"precision", c.precision},
      {"output_dir", c.output_dir},
      {"checkpoint", c.checkpoint},
      {"against", c.against},
      {"seed", c.seed}};
  if (!c.footprints.empty()) j["footprints"] = c.footprints;
  return j;
}

}  // namespace stdl

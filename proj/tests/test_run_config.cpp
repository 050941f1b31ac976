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

#include "stdl/run_config.hpp"

namespace stdl {
namespace {

TEST(RunConfig, DefaultsWhenEmpty) {
  const auto c = parse_run_config("{}");
  EXPECT_EQ(c.regime, Regime::stdl);
  EXPECT_EQ(c.budget.mode, PartitionBudget::Mode::ratio);
  EXPECT_EQ(c.element_width(), 4u);
}

TEST(RunConfig, FieldsParse) {
  const auto c = parse_run_config(R"({
    "network": "n.json", "dataset": {"name": "synth", "samples": 10, "train_limit": 5},
    "regime": "bptt", "budget": {"mode": "bytes", "value": 4096}, "timesteps": 6,
    "train": {"epochs": 2, "lr": 0.01}, "precision": "float64", "seed": 9})");
  EXPECT_EQ(c.network, "n.json");
  EXPECT_EQ(c.dataset, "synth");
  EXPECT_EQ(c.synth_samples, 10u);
  EXPECT_EQ(c.train.train_limit, 5u);
  EXPECT_EQ(c.regime, Regime::bptt);
  EXPECT_EQ(c.budget.bytes, 4096u);
  EXPECT_EQ(c.timesteps, 6u);
  EXPECT_EQ(c.train.epochs, 2u);
  EXPECT_DOUBLE_EQ(c.train.lr, 0.01);
  EXPECT_EQ(c.element_width(), 8u);
  EXPECT_EQ(c.train.seed, 9u);
}

TEST(RunConfig, LaterLayerWins) {
  auto c = parse_run_config(R"({"train": {"lr": 0.1, "epochs": 3}, "seed": 1})");
  merge_run_config(c, nlohmann::json::parse(R"({"train": {"lr": 0.5}})"));
  EXPECT_DOUBLE_EQ(c.train.lr, 0.5);
  EXPECT_EQ(c.train.epochs, 3u);
  EXPECT_EQ(c.seed, 1u);
}

TEST(RunConfig, ResolvedConfigRoundTrips) {
  const auto c = parse_run_config(R"({"regime": "sltt", "budget": {"mode": "ratio", "value": 0.5},
                                      "footprints": [1, 2]})");
  const auto back = parse_run_config(to_json(c).dump());
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(RunConfig, SyntaxErrorReportsLine) {
  try {
    parse_run_config("{\n  \"seed\": 1,\n  ,\n}", "x.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("x.json:3"), std::string::npos);
  }
}

TEST(RunConfig, FieldErrorsNameTheField) {
  auto field_of = [](const std::string& text) {
    try {
      parse_run_config(text).validate();
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of(R"({"train": {"lr": "x"}})"), "train.lr");
  EXPECT_EQ(field_of(R"({"train": {"momentum": 2}})"), "train");
  EXPECT_EQ(field_of(R"({"regime": "slow"})"), "regime");
  EXPECT_EQ(field_of(R"({"budget": {"mode": "ratio", "value": 1.5}})"), "budget");
  EXPECT_EQ(field_of(R"({"budget": {"mode": "pages", "value": 1}})"), "budget.mode");
  EXPECT_EQ(field_of(R"({"dataset": {"nmae": "mnist"}})"), "dataset.nmae");
  EXPECT_EQ(field_of(R"({"precision": "half"})"), "precision");
  EXPECT_EQ(field_of(R"({"seed": -1})"), "seed");
}

}  // namespace
}  // namespace stdl

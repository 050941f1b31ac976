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

#include <numeric>

#include "stdl/partition.hpp"
#include "stdl/rng.hpp"

namespace stdl {
namespace {

using Fps = std::vector<std::size_t>;

TEST(Greedy, WorkedExample) {
  const Fps f{3, 1, 2, 2, 4};
  const auto p = greedy_partition(f, 4);
  EXPECT_EQ(p.boundaries, (Fps{2, 4, 5}));
  EXPECT_EQ(p.num_subnetworks(), 3u);
  EXPECT_EQ(p.footprints, (Fps{4, 4, 4}));
  EXPECT_EQ(brute_force_partition(f, 4).num_subnetworks(), 3u);
}

TEST(Greedy, EverythingFits) {
  const Fps f{1, 2, 3};
  EXPECT_EQ(greedy_partition(f, 6).boundaries, (Fps{3}));
}

TEST(Greedy, InfeasibleNamesLayer) {
  const Fps f{5, 1};
  try {
    greedy_partition(f, 4);
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_EQ(e.layer(), 1u);
  }
  const Fps g{1, 2, 9, 1};
  try {
    brute_force_partition(g, 4);
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_EQ(e.layer(), 3u);
  }
}

TEST(Greedy, TieStaysInCurrentSubnetwork) {
  const Fps f{2, 2, 1};
  EXPECT_EQ(greedy_partition(f, 4).boundaries, (Fps{2, 3}));
}

TEST(Greedy, EqualFootprintsAtBudgetGiveOnePerLayer) {
  const Fps f(7, 5);
  EXPECT_EQ(greedy_partition(f, 5).num_subnetworks(), 7u);
  EXPECT_EQ(brute_force_partition(f, 5).num_subnetworks(), 7u);
}

TEST(Greedy, OnePassOfAdditions) {
  Rng rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    Fps f(1 + rng.below(30));
    for (auto& v : f) v = 1 + rng.below(8);
    std::size_t adds = 0;
    greedy_partition(f, 8, &adds);
    EXPECT_EQ(adds, f.size());
  }
}

TEST(BruteForce, SizeGuard) {
  const Fps f(21, 1);
  EXPECT_THROW(brute_force_partition(f, 3), SizeGuardError);
  EXPECT_NO_THROW(brute_force_partition(Fps(20, 1), 3));
}

TEST(BruteForce, EmptyIsRejected) {
  EXPECT_THROW(greedy_partition(Fps{}, 3), std::invalid_argument);
}

class RandomInstances : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(RandomInstances, GreedyIsOptimalAndDominatesEveryOptimum) {
  Rng rng(GetParam());
  for (int rep = 0; rep < 40; ++rep) {
    Fps f(1 + rng.below(12));
    for (auto& v : f) v = 1 + rng.below(8);
    const std::size_t mx = *std::max_element(f.begin(), f.end());
    const std::size_t total = std::accumulate(f.begin(), f.end(), std::size_t{0});
    const std::size_t budget = mx + rng.below(total - mx + 1);
    const auto g = greedy_partition(f, budget);
    const auto opts = optimal_partitions(f, budget);
    ASSERT_FALSE(opts.empty());
    EXPECT_EQ(g.num_subnetworks(), opts.front().num_subnetworks());
    for (auto fp : g.footprints) EXPECT_LE(fp, budget);
    for (std::size_t k = 1; k < g.boundaries.size(); ++k) {
      EXPECT_LT(g.boundaries[k - 1], g.boundaries[k]);
    }
    EXPECT_EQ(g.boundaries.back(), f.size());
    for (const auto& o : opts) {
      for (std::size_t k = 0; k < o.boundaries.size(); ++k) {
        EXPECT_GE(g.boundaries[k], o.boundaries[k]);
      }
    }
    // Monotone in the budget.
    EXPECT_LE(greedy_partition(f, budget + 1 + rng.below(5)).num_subnetworks(),
              g.num_subnetworks());
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomInstances, ::testing::Values(1, 2, 3, 4, 5));

TEST(Budget, RatioResolvesAgainstTotal) {
  EXPECT_EQ(PartitionBudget::of_ratio(0.5).resolve(1000), 500u);
  EXPECT_EQ(PartitionBudget::absolute(77).resolve(1000), 77u);
  EXPECT_THROW(PartitionBudget::of_ratio(0.0).resolve(10), std::invalid_argument);
  EXPECT_THROW(PartitionBudget::of_ratio(1.5).resolve(10), std::invalid_argument);
  EXPECT_THROW(PartitionBudget::absolute(0).resolve(10), std::invalid_argument);
}

TEST(PartitionIndices, FirstAndLastLayer) {
  const Fps f{3, 1, 2, 2, 4};
  const auto p = greedy_partition(f, 4);
  EXPECT_EQ(p.first_layer(1), 1u);
  EXPECT_EQ(p.last_layer(1), 2u);
  EXPECT_EQ(p.first_layer(2), 3u);
  EXPECT_EQ(p.first_layer(3), 5u);
}

}  // namespace
}  // namespace stdl

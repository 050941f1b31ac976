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

// Splitting a layer sequence into the fewest contiguous subnetworks whose
// summed footprint stays within a per-subnetwork budget.

#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stdl {

class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(std::size_t layer, std::size_t footprint, std::size_t budget)
      : std::runtime_error("infeasible: layer " + std::to_string(layer) +
                           " needs " + std::to_string(footprint) +
                           " bytes, budget is " + std::to_string(budget)),
        layer_(layer) {}
  /// 1-based index of the first layer that cannot fit on its own.
  std::size_t layer() const { return layer_; }

 private:
  std::size_t layer_;
};

class SizeGuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

struct PartitionBudget {
  enum class Mode { absolute_bytes, ratio };
  Mode mode = Mode::absolute_bytes;
  std::size_t bytes = 0;
  double ratio = 1.0;

  static PartitionBudget absolute(std::size_t b) { return {Mode::absolute_bytes, b, 1.0}; }
  static PartitionBudget of_ratio(double r) { return {Mode::ratio, 0, r}; }

  void validate() const {
    if (mode == Mode::absolute_bytes && bytes == 0) {
      throw std::invalid_argument("absolute budget must be > 0 bytes");
    }
    if (mode == Mode::ratio && !(ratio > 0.0 && ratio <= 1.0)) {
      throw std::invalid_argument("budget ratio must lie in (0, 1]");
    }
  }

  /// Per-subnetwork bytes given the whole network's single-step footprint.
  std::size_t resolve(std::size_t total_footprint) const {
    validate();
    if (mode == Mode::absolute_bytes) return bytes;
    return static_cast<std::size_t>(ratio * static_cast<double>(total_footprint));
  }
};

struct Partition {
  /// 1-based index of the last layer of each subnetwork; back() == L.
  std::vector<std::size_t> boundaries;
  std::vector<std::size_t> footprints;  // per subnetwork
  std::size_t budget = 0;

  std::size_t num_subnetworks() const { return boundaries.size(); }
  /// First layer (1-based) of subnetwork k (1-based).
  std::size_t first_layer(std::size_t k) const {
    return k == 1 ? 1 : boundaries.at(k - 2) + 1;
  }
  std::size_t last_layer(std::size_t k) const { return boundaries.at(k - 1); }

  bool operator==(const Partition&) const = default;
};

inline Partition make_partition(std::span<const std::size_t> footprints,
                                std::vector<std::size_t> boundaries,
                                std::size_t budget) {
  Partition p{std::move(boundaries), {}, budget};
  std::size_t start = 0;
  for (std::size_t b : p.boundaries) {
    std::size_t sum = 0;
    for (std::size_t i = start; i < b; ++i) sum += footprints[i];
    p.footprints.push_back(sum);
    start = b;
  }
  return p;
}

inline void check_layers_fit(std::span<const std::size_t> footprints, std::size_t budget) {
  if (footprints.empty()) throw std::invalid_argument("partition of an empty network");
  for (std::size_t i = 0; i < footprints.size(); ++i) {
    if (footprints[i] > budget) throw InfeasibleError(i + 1, footprints[i], budget);
  }
}

/// Single left-to-right pass: a layer that would push the running sum past
/// the budget closes the current subnetwork before it. A sum equal to the
/// budget still fits. `additions`, when given, counts footprint additions.
inline Partition greedy_partition(std::span<const std::size_t> footprints,
                                  std::size_t budget,
                                  std::size_t* additions = nullptr) {
  check_layers_fit(footprints, budget);
  std::vector<std::size_t> boundaries;
  std::size_t current = 0;
  std::size_t adds = 0;
  for (std::size_t l = 1; l <= footprints.size(); ++l) {
    current += footprints[l - 1];
    ++adds;
    if (current > budget) {
      boundaries.push_back(l - 1);
      current = footprints[l - 1];
    }
  }
  boundaries.push_back(footprints.size());
  if (additions != nullptr) *additions = adds;
  return make_partition(footprints, std::move(boundaries), budget);
}

inline constexpr std::size_t kBruteForceMaxLayers = 20;

namespace detail {

template <class Visit>
void for_each_feasible_partition(std::span<const std::size_t> footprints,
                                 std::size_t budget, Visit&& visit) {
  const std::size_t L = footprints.size();
  if (L > kBruteForceMaxLayers) {
    throw SizeGuardError("brute-force partition limited to " +
                         std::to_string(kBruteForceMaxLayers) + " layers, got " +
                         std::to_string(L));
  }
  check_layers_fit(footprints, budget);
  // Bit i set: a subnetwork ends after layer i+1 (i in 0..L-2).
  const std::uint32_t cuts = L > 1 ? (1u << (L - 1)) : 1u;
  std::vector<std::size_t> boundaries;
  for (std::uint32_t mask = 0; mask < cuts; ++mask) {
    boundaries.clear();
    bool ok = true;
    std::size_t sum = 0;
    for (std::size_t l = 1; l <= L && ok; ++l) {
      sum += footprints[l - 1];
      if (sum > budget) ok = false;
      const bool cut = l == L || ((mask >> (l - 1)) & 1u);
      if (cut) {
        boundaries.push_back(l);
        sum = 0;
      }
    }
    if (ok) visit(boundaries);
  }
}

}  // namespace detail

/// Exhaustive search over all 2^(L-1) boundary sets. Independent verifier of
/// greedy_partition; returns the first minimal partition in mask order.
inline Partition brute_force_partition(std::span<const std::size_t> footprints,
                                       std::size_t budget) {
  std::vector<std::size_t> best;
  detail::for_each_feasible_partition(
      footprints, budget, [&](const std::vector<std::size_t>& b) {
        if (best.empty() || b.size() < best.size()) best = b;
      });
  return make_partition(footprints, std::move(best), budget);
}

/// Every partition of minimal subnetwork count.
inline std::vector<Partition> optimal_partitions(std::span<const std::size_t> footprints,
                                                 std::size_t budget) {
  std::vector<std::vector<std::size_t>> all;
  std::size_t best = SIZE_MAX;
  detail::for_each_feasible_partition(
      footprints, budget, [&](const std::vector<std::size_t>& b) {
        if (b.size() < best) {
          best = b.size();
          all.clear();
        }
        if (b.size() == best) all.push_back(b);
      });
  std::vector<Partition> out;
  for (auto& b : all) out.push_back(make_partition(footprints, std::move(b), budget));
  return out;
}

}  // namespace stdl

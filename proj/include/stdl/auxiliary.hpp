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

// Auxiliary network construction. Each non-final subnetwork gets an
// auxiliary network made of an order-preserving subset of the layers that
// follow it, plus a classifier head. Among subsets that fit the memory
// budget the builder takes the deepest one, then the widest one, then the
// one whose layer indices are lexicographically smallest.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include "stdl/network.hpp"
#include "stdl/partition.hpp"

namespace stdl {

class BudgetTooSmall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Abstract selection problem.

struct AuxCandidate {
  std::size_t footprint = 0;
  std::size_t width = 0;
  /// Head footprint when this candidate is the last selected layer.
  std::size_t head_footprint = 0;
};

struct AuxProblem {
  std::vector<AuxCandidate> layers;
  /// Head footprint when no layer is selected.
  std::size_t empty_head_footprint = 0;
  std::size_t budget = 0;
};

struct AuxSelection {
  std::vector<std::size_t> chosen;  // 0-based candidate indices, increasing
  std::size_t depth = 0;
  std::size_t width = 0;
  std::size_t footprint = 0;  // layers plus head

  bool operator==(const AuxSelection&) const = default;
};

/// True when a is strictly preferred to b: deeper, then wider, then
/// lexicographically earlier indices.
inline bool aux_preferred(const AuxSelection& a, const AuxSelection& b) {
  if (a.depth != b.depth) return a.depth > b.depth;
  if (a.width != b.width) return a.width > b.width;
  return a.chosen < b.chosen;
}

inline std::size_t head_cost(const AuxProblem& p, const std::vector<std::size_t>& chosen) {
  return chosen.empty() ? p.empty_head_footprint : p.layers[chosen.back()].head_footprint;
}

inline constexpr std::size_t kAuxEnumerationMaxLayers = 16;

/// Oracle: every order-preserving subset whose footprint fits the budget.
inline std::vector<AuxSelection> enumerate_candidates(const AuxProblem& p) {
  const std::size_t n = p.layers.size();
  if (n > kAuxEnumerationMaxLayers) {
    throw SizeGuardError("auxiliary enumeration limited to " +
                         std::to_string(kAuxEnumerationMaxLayers) +
                         " subsequent layers, got " + std::to_string(n));
  }
  std::vector<AuxSelection> out;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    AuxSelection s;
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1u) {
        s.chosen.push_back(i);
        s.footprint += p.layers[i].footprint;
        s.width += p.layers[i].width;
      }
    }
    s.depth = s.chosen.size();
    s.footprint += head_cost(p, s.chosen);
    if (s.footprint <= p.budget) out.push_back(std::move(s));
  }
  return out;
}

/// Two-phase selection. Phase one finds the largest feasible depth: for each
/// possible last layer, fill the remaining slots with the cheapest earlier
/// layers. Phase two runs a dominance-pruned dynamic program over layers in
/// order to find the widest subset of exactly that depth. Returns nullopt
/// when not even a bare head fits.
inline std::optional<AuxSelection> select_auxiliary(const AuxProblem& p) {
  const std::size_t n = p.layers.size();

  // Phase one: maximal depth.
  std::optional<std::size_t> depth;
  if (p.empty_head_footprint <= p.budget) depth = 0;
  std::vector<std::size_t> earlier;
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t cost = p.layers[j].footprint + p.layers[j].head_footprint;
    if (cost <= p.budget) {
      std::size_t d = 1;
      std::sort(earlier.begin(), earlier.end());
      for (std::size_t f : earlier) {
        if (cost + f > p.budget) break;
        cost += f;
        ++d;
      }
      if (!depth || d > *depth) depth = d;
    }
    earlier.push_back(p.layers[j].footprint);
  }
  if (!depth) return std::nullopt;
  const std::size_t target = *depth;
  if (target == 0) return AuxSelection{{}, 0, 0, p.empty_head_footprint};

  // Phase two: widest subset of the target depth.
  struct Partial {
    std::vector<std::size_t> chosen;
    std::size_t cost = 0;
    std::size_t width = 0;
  };
  auto dominates = [](const Partial& b, const Partial& a) {
    if (b.cost > a.cost || b.width < a.width) return false;
    return b.width > a.width || b.chosen < a.chosen;
  };
  // open[c]: non-dominated partial selections holding c layers.
  std::vector<std::vector<Partial>> open(target);
  open[0].push_back({});
  std::optional<AuxSelection> best;
  for (std::size_t j = 0; j < n; ++j) {
    const auto& cand = p.layers[j];
    const std::size_t remaining_after = n - j - 1;
    std::vector<std::vector<Partial>> grown(target);
    for (std::size_t c = 0; c < target; ++c) {
      for (const auto& part : open[c]) {
        Partial next{part.chosen, part.cost + cand.footprint, part.width + cand.width};
        next.chosen.push_back(j);
        if (next.cost > p.budget) continue;
        if (c + 1 == target) {
          const std::size_t total = next.cost + cand.head_footprint;
          if (total > p.budget) continue;
          AuxSelection sel{next.chosen, target, next.width, total};
          if (!best || aux_preferred(sel, *best)) best = std::move(sel);
        } else if (c + 1 + remaining_after >= target) {
          grown[c + 1].push_back(std::move(next));
        }
      }
    }
    for (std::size_t c = 1; c < target; ++c) {
      auto& bucket = open[c];
      for (auto& g : grown[c]) bucket.push_back(std::move(g));
      std::vector<Partial> kept;
      for (std::size_t a = 0; a < bucket.size(); ++a) {
        bool dominated = false;
        for (std::size_t b = 0; b < bucket.size() && !dominated; ++b) {
          if (a != b && dominates(bucket[b], bucket[a])) dominated = true;
        }
        if (!dominated) kept.push_back(bucket[a]);
      }
      bucket = std::move(kept);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Network-level construction.

struct AuxOptions {
  /// Downsampling factors tried in order when no layer fits at factor 1.
  std::vector<std::size_t> factors{1, 2, 4, 8, 16};
};

struct AuxiliarySpec {
  std::size_t owner = 0;        // subnetwork index k, 1-based
  std::size_t downsample = 1;   // average-pool prefix factor
  std::vector<std::size_t> selected;  // 1-based indices into the network
  Shape input_shape;            // output shape of the owning subnetwork
  std::size_t num_classes = 0;
  std::vector<LayerSpec> layers;  // realized: [pool] {[adapter] layer}* [adapter] head
  std::size_t footprint = 0;    // bytes at the reference batch
  std::size_t depth = 0;
  std::size_t width = 0;
};

namespace detail {

inline Shape scaled_input(const Shape& in, std::size_t factor) {
  if (in.size() != 3 || factor == 1) return in;
  return {in[0], std::max<std::size_t>(1, in[1] / factor),
          std::max<std::size_t>(1, in[2] / factor)};
}

inline bool factor_divides(const Shape& s, std::size_t factor) {
  if (factor == 1) return true;
  return s.size() == 3 && s[1] % factor == 0 && s[2] % factor == 0;
}

/// A network layer re-inferred on its input scaled down by `factor`.
inline LayerSpec scaled_layer(const LayerSpec& original, std::size_t factor) {
  LayerSpec l = original;
  infer_layer(l, scaled_input(original.in_shape, factor));
  return l;
}

inline LayerSpec make_head(const Shape& in, std::size_t classes) {
  LayerSpec head;
  head.kind = LayerKind::classifier;
  head.channels = classes;
  infer_layer(head, in);
  return head;
}

inline std::vector<std::size_t> subsequent_candidates(const NetworkSpec& net,
                                                      std::size_t last_of_subnet) {
  std::vector<std::size_t> idx;
  for (std::size_t l = last_of_subnet + 1; l < net.layers.size(); ++l) {
    if (is_capacity_kind(net.layers[l - 1].kind)) idx.push_back(l);
  }
  return idx;
}

inline AuxProblem aux_problem(const NetworkSpec& net, const Shape& subnet_out,
                              const std::vector<std::size_t>& candidates,
                              std::size_t factor, std::size_t budget,
                              std::size_t element_width) {
  const std::size_t unit = net.reference_batch * element_width;
  AuxProblem p;
  p.budget = budget;
  const Shape pooled = scaled_input(subnet_out, factor);
  p.empty_head_footprint =
      footprint_elements(make_head(pooled, net.num_classes), net.neuron.model) * unit;
  for (std::size_t l : candidates) {
    const LayerSpec s = scaled_layer(net.layers[l - 1], factor);
    const LayerSpec head = make_head(s.out_shape, net.num_classes);
    p.layers.push_back({footprint_elements(s, net.neuron.model) * unit, s.channels,
                        footprint_elements(head, net.neuron.model) * unit});
  }
  return p;
}

}  // namespace detail

/// Realizes an auxiliary network for subnetwork `owner` from a selection of
/// original layers at a downsampling factor. Adapters are inserted wherever
/// the incoming shape differs from what the next selected layer expects.
inline AuxiliarySpec realize_auxiliary(const NetworkSpec& net, std::size_t owner,
                                       const Shape& subnet_out,
                                       const std::vector<std::size_t>& selected,
                                       std::size_t factor, std::size_t element_width) {
  if (!detail::factor_divides(subnet_out, factor)) {
    throw NetworkError("downsample factor " + std::to_string(factor) +
                       " does not divide " + shape_str(subnet_out));
  }
  AuxiliarySpec aux;
  aux.owner = owner;
  aux.downsample = factor;
  aux.selected = selected;
  aux.input_shape = subnet_out;
  aux.num_classes = net.num_classes;
  Shape cur = subnet_out;
  if (factor > 1) {
    LayerSpec pool;
    pool.kind = LayerKind::avgpool;
    pool.kernel = factor;
    pool.stride = factor;
    pool.padding = 0;
    infer_layer(pool, cur);
    cur = pool.out_shape;
    aux.layers.push_back(pool);
  }
  auto adapt_to = [&](const Shape& want) {
    if (cur == want) return;
    LayerSpec a;
    a.kind = LayerKind::adapter;
    a.target = want;
    infer_layer(a, cur);
    aux.layers.push_back(a);
    cur = want;
  };
  for (std::size_t l : selected) {
    LayerSpec s = detail::scaled_layer(net.layers.at(l - 1), factor);
    adapt_to(s.in_shape);
    aux.layers.push_back(s);
    cur = s.out_shape;
    ++aux.depth;
    aux.width += s.channels;
  }
  aux.layers.push_back(detail::make_head(cur, net.num_classes));
  std::size_t elems = 0;
  for (const auto& l : aux.layers) elems += footprint_elements(l, net.neuron.model);
  aux.footprint = elems * net.reference_batch * element_width;
  return aux;
}

/// Re-realizes `aux` behind an average-pool prefix of `factor`.
inline AuxiliarySpec attach_downsample(const NetworkSpec& net, const AuxiliarySpec& aux,
                                       std::size_t factor, std::size_t element_width) {
  if (factor == 0) throw std::invalid_argument("downsample factor must be >= 1");
  return realize_auxiliary(net, aux.owner, aux.input_shape, aux.selected,
                           aux.downsample * factor, element_width);
}

inline std::size_t subnetwork_footprint(const NetworkSpec& net, const Partition& part,
                                        std::size_t k, std::size_t element_width) {
  std::size_t sum = 0;
  for (std::size_t l = part.first_layer(k); l <= part.last_layer(k); ++l) {
    sum += layer_footprint(net, l, element_width);
  }
  return sum;
}

/// Auxiliary network for subnetwork k (1 <= k < K). `scope_budget` bounds the
/// subnetwork plus its auxiliary; the auxiliary gets what the subnetwork
/// leaves. Factor 1 is tried first; larger pooling factors only when no
/// layer fits at factor 1.
inline AuxiliarySpec build_auxiliary(const NetworkSpec& net, const Partition& part,
                                     std::size_t k, std::size_t scope_budget,
                                     std::size_t element_width,
                                     const AuxOptions& opts = {}) {
  const std::size_t K = part.num_subnetworks();
  if (k < 1 || k >= K) {
    throw std::out_of_range("auxiliary networks exist for subnetworks 1.." +
                            std::to_string(K - 1) + ", asked for " + std::to_string(k));
  }
  const std::size_t own = subnetwork_footprint(net, part, k, element_width);
  if (own > scope_budget) {
    throw BudgetTooSmall("subnetwork " + std::to_string(k) + " alone exceeds budget");
  }
  const std::size_t aux_budget = scope_budget - own;
  const Shape& subnet_out = net.output_shape_of(part.last_layer(k));
  const auto candidates = detail::subsequent_candidates(net, part.last_layer(k));

  std::optional<std::pair<std::size_t, AuxSelection>> head_only;
  for (std::size_t f : opts.factors) {
    if (!detail::factor_divides(subnet_out, f)) continue;
    const auto problem =
        detail::aux_problem(net, subnet_out, candidates, f, aux_budget, element_width);
    const auto sel = select_auxiliary(problem);
    if (!sel) continue;
    if (sel->depth >= 1) {
      std::vector<std::size_t> chosen;
      for (std::size_t i : sel->chosen) chosen.push_back(candidates[i]);
      return realize_auxiliary(net, k, subnet_out, chosen, f, element_width);
    }
    if (!head_only) head_only = std::make_pair(f, *sel);
  }
  if (head_only) {
    return realize_auxiliary(net, k, subnet_out, {}, head_only->first, element_width);
  }
  throw BudgetTooSmall("auxiliary budget " + std::to_string(aux_budget) +
                       " bytes cannot host a classifier head for subnetwork " +
                       std::to_string(k));
}

/// Memory set aside for auxiliaries before partitioning: the cheapest
/// one-layer auxiliary (layer plus head) over all candidate layers and
/// pooling factors. Networks without candidate layers reserve the
/// classifier's own footprint.
inline std::size_t auxiliary_reserve(const NetworkSpec& net, std::size_t element_width,
                                     const AuxOptions& opts = {}) {
  const std::size_t unit = net.reference_batch * element_width;
  std::optional<std::size_t> best;
  for (std::size_t l = 2; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l - 1];
    if (!is_capacity_kind(layer.kind)) continue;
    for (std::size_t f : opts.factors) {
      if (!detail::factor_divides(layer.in_shape, f)) continue;
      const LayerSpec s = detail::scaled_layer(layer, f);
      const std::size_t cost =
          (footprint_elements(s, net.neuron.model) +
           footprint_elements(detail::make_head(s.out_shape, net.num_classes),
                              net.neuron.model)) *
          unit;
      if (!best || cost < *best) best = cost;
    }
  }
  if (!best) best = layer_footprint(net, net.layers.size(), element_width);
  return *best;
}

struct StdlPlan {
  std::size_t scope_budget = 0;
  std::size_t reserve = 0;
  Partition partition;
  std::vector<AuxiliarySpec> auxiliaries;  // one per subnetwork 1..K-1
};

/// Partition plus auxiliaries: subtract the auxiliary reserve from the
/// per-scope budget, partition greedily, then build each auxiliary within
/// what its subnetwork leaves of the scope budget.
inline StdlPlan plan_stdl(const NetworkSpec& net, const PartitionBudget& budget,
                          std::size_t element_width, const AuxOptions& opts = {}) {
  const auto fps = layer_footprints(net, element_width);
  std::size_t total = 0;
  for (auto f : fps) total += f;
  StdlPlan plan;
  plan.scope_budget = budget.resolve(total);
  plan.reserve = net.layers.size() > 1 ? auxiliary_reserve(net, element_width, opts) : 0;
  if (plan.reserve >= plan.scope_budget) {
    throw BudgetTooSmall("budget " + std::to_string(plan.scope_budget) +
                         " bytes does not exceed the auxiliary reserve of " +
                         std::to_string(plan.reserve) + " bytes");
  }
  plan.partition = greedy_partition(fps, plan.scope_budget - plan.reserve);
  for (std::size_t k = 1; k < plan.partition.num_subnetworks(); ++k) {
    plan.auxiliaries.push_back(
        build_auxiliary(net, plan.partition, k, plan.scope_budget, element_width, opts));
  }
  return plan;
}

/// Plan with a single subnetwork and no auxiliaries (BPTT / SLTT scopes).
inline StdlPlan trivial_plan(const NetworkSpec& net, std::size_t element_width) {
  const auto fps = layer_footprints(net, element_width);
  StdlPlan plan;
  plan.partition = make_partition(fps, {net.layers.size()}, 0);
  plan.partition.budget = plan.partition.footprints.front();
  plan.scope_budget = plan.partition.budget;
  return plan;
}

inline nlohmann::json to_json(const AuxiliarySpec& a) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : a.layers) layers.push_back(to_json(l));
  return {{"owner", a.owner},       {"downsample", a.downsample},
          {"selected", a.selected}, {"input", a.input_shape},
          {"num_classes", a.num_classes}, {"footprint_bytes", a.footprint},
          {"depth", a.depth},       {"width", a.width},
          {"layers", layers}};
}

inline nlohmann::json to_json(const Partition& p) {
  return {{"boundaries", p.boundaries},
          {"num_subnetworks", p.num_subnetworks()},
          {"subnetwork_footprints", p.footprints},
          {"budget", p.budget}};
}

}  // namespace stdl

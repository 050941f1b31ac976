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

// Scalar reverse-mode tape. Every scalar of an unrolled computation is a
// node holding its value and the local partial derivative towards each
// parent. Slow and obvious on purpose: it is the reference the layer code
// is checked against.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace stdl::verify {

class Tape {
 public:
  using Id = std::size_t;

  Id leaf(double v) { return push(v, {}); }

  /// Node with explicit local derivatives; used for spikes, whose "local
  /// derivative" is the surrogate rather than the true one.
  Id node(double v, std::vector<std::pair<Id, double>> parents) {
    return push(v, std::move(parents));
  }

  Id add(Id a, Id b) { return push(value(a) + value(b), {{a, 1.0}, {b, 1.0}}); }
  Id sub(Id a, Id b) { return push(value(a) - value(b), {{a, 1.0}, {b, -1.0}}); }
  Id mul(Id a, Id b) { return push(value(a) * value(b), {{a, value(b)}, {b, value(a)}}); }
  Id scale(Id a, double c) { return push(c * value(a), {{a, c}}); }
  Id exp(Id a) {
    const double e = std::exp(value(a));
    return push(e, {{a, e}});
  }
  Id log(Id a) { return push(std::log(value(a)), {{a, 1.0 / value(a)}}); }
  Id sigmoid(Id a) {
    const double s = 1.0 / (1.0 + std::exp(-value(a)));
    return push(s, {{a, s * (1.0 - s)}});
  }
  Id sum(const std::vector<Id>& xs) {
    double v = 0;
    std::vector<std::pair<Id, double>> ps;
    for (Id x : xs) {
      v += value(x);
      ps.emplace_back(x, 1.0);
    }
    return push(v, std::move(ps));
  }
  /// sum_i w_i * x_i where the weights are themselves nodes.
  Id dot(const std::vector<Id>& w, const std::vector<Id>& x) {
    if (w.size() != x.size()) throw std::invalid_argument("tape dot: length mismatch");
    std::vector<Id> terms;
    for (std::size_t i = 0; i < w.size(); ++i) terms.push_back(mul(w[i], x[i]));
    return sum(terms);
  }

  double value(Id id) const { return nodes_.at(id).value; }
  std::size_t size() const { return nodes_.size(); }

  /// d output / d node for every node.
  std::vector<double> gradient(Id output) const {
    std::vector<double> g(nodes_.size(), 0.0);
    g.at(output) = 1.0;
    for (std::size_t i = output + 1; i-- > 0;) {
      if (g[i] == 0.0) continue;
      for (const auto& [p, d] : nodes_[i].parents) g[p] += g[i] * d;
    }
    return g;
  }

 private:
  struct Node {
    double value;
    std::vector<std::pair<Id, double>> parents;
  };

  Id push(double v, std::vector<std::pair<Id, double>> parents) {
    nodes_.push_back({v, std::move(parents)});
    return nodes_.size() - 1;
  }

  std::vector<Node> nodes_;
};

}  // namespace stdl::verify

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

// Representation diagnostics over firing rates: linear CKA and linear
// probing.

#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "stdl/data.hpp"
#include "stdl/model.hpp"
#include "stdl/trainer.hpp"

namespace stdl {

class DegenerateInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-layer N x D firing rates (mean spike count over T) of every spiking
/// layer of the main network, keyed by the layer's ledger label.
template <class Real>
std::map<std::string, Tensor<double>> collect_rates(SpikingNetwork<Real>& net,
                                                    const Dataset& ds, std::size_t T,
                                                    std::size_t batch_size = 256) {
  auto& chain = net.main();
  std::map<std::string, Tensor<double>> out;
  std::vector<std::size_t> dims(chain.size(), 0);
  for (std::size_t l = 0; l < chain.size(); ++l) {
    const auto& s = chain.layers[l]->spec();
    if (!is_spiking_kind(s.kind)) continue;
    dims[l] = shape_size(s.out_shape);
    out.emplace(chain.labels[l], Tensor<double>({ds.size(), dims[l]}));
  }
  const auto order = epoch_order(ds.size(), 0, 0, false);
  for (std::size_t i = 0; i < ds.size(); i += batch_size) {
    auto b = make_batch<Real>(ds, order, i, i + batch_size);
    const std::size_t B = b.y.size();
    auto states = chain.initial_state(B);
    for (std::size_t t = 0; t < T; ++t) {
      Tensor<Real> h = b.x;
      for (std::size_t l = 0; l < chain.size(); ++l) {
        h = chain.layers[l]->forward(h, states[l], nullptr);
        if (dims[l] == 0) continue;
        auto& r = out.at(chain.labels[l]);
        for (std::size_t j = 0; j < B * dims[l]; ++j) {
          r[i * dims[l] + j] += static_cast<double>(h[j]) / static_cast<double>(T);
        }
      }
    }
  }
  return out;
}

namespace detail {

inline Tensor<double> center_columns(const Tensor<double>& X, const char* name) {
  if (X.rank() != 2 || X.dim(0) < 2) {
    throw ShapeError(std::string(name) + " must be N x D with N >= 2");
  }
  const std::size_t N = X.dim(0), D = X.dim(1);
  Tensor<double> c = X;
  bool any_variance = false;
  for (std::size_t j = 0; j < D; ++j) {
    double mean = 0;
    for (std::size_t i = 0; i < N; ++i) mean += X[i * D + j];
    mean /= static_cast<double>(N);
    for (std::size_t i = 0; i < N; ++i) {
      c[i * D + j] -= mean;
      if (c[i * D + j] != 0.0) any_variance = true;
    }
  }
  if (!any_variance) {
    throw DegenerateInput(std::string(name) + " is constant across samples");
  }
  return c;
}

// Frobenius inner product <A^T B, A^T B> style helpers in whichever space is
// smaller.
inline Tensor<double> cross(const Tensor<double>& A, const Tensor<double>& B) {
  Tensor<double> out({A.dim(1), B.dim(1)});
  gemm(Trans::yes, Trans::no, A.dim(1), B.dim(1), A.dim(0), 1.0, A.ptr(), B.ptr(), 0.0,
       out.ptr());
  return out;
}

inline Tensor<double> gram(const Tensor<double>& A) {
  Tensor<double> out({A.dim(0), A.dim(0)});
  gemm(Trans::no, Trans::yes, A.dim(0), A.dim(0), A.dim(1), 1.0, A.ptr(), A.ptr(), 0.0,
       out.ptr());
  return out;
}

}  // namespace detail

/// Linear CKA with column-centred inputs:
/// ||Yc^T Xc||_F^2 / (||Xc^T Xc||_F ||Yc^T Yc||_F).
inline double linear_cka(const Tensor<double>& X, const Tensor<double>& Y) {
  if (X.rank() != 2 || Y.rank() != 2 || X.dim(0) != Y.dim(0)) {
    throw ShapeError("linear_cka needs N x D1 and N x D2 with the same N");
  }
  const auto xc = detail::center_columns(X, "X");
  const auto yc = detail::center_columns(Y, "Y");
  const std::size_t N = X.dim(0);
  double num, dx, dy;
  if (X.dim(1) + Y.dim(1) <= 2 * N) {
    num = squared_norm(detail::cross(yc, xc));
    dx = std::sqrt(squared_norm(detail::cross(xc, xc)));
    dy = std::sqrt(squared_norm(detail::cross(yc, yc)));
  } else {
    // Sample space: <K, L> with K = Xc Xc^T.
    const auto K = detail::gram(xc);
    const auto L = detail::gram(yc);
    num = 0;
    for (std::size_t i = 0; i < K.size(); ++i) num += K[i] * L[i];
    dx = std::sqrt(squared_norm(K));
    dy = std::sqrt(squared_norm(L));
  }
  return num / (dx * dy);
}

struct ProbeConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double lr = 0.05;
  double momentum = 0.9;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
};

/// Trains a linear classifier (weight and bias) on frozen features with the
/// library's SGD and cosine schedule; returns held-out accuracy.
inline double linear_probe(const Tensor<double>& X_train, const std::vector<int>& y_train,
                           const Tensor<double>& X_test, const std::vector<int>& y_test,
                           std::size_t num_classes, const ProbeConfig& cfg = {}) {
  if (X_train.rank() != 2 || X_train.dim(0) != y_train.size() || X_test.rank() != 2 ||
      X_test.dim(0) != y_test.size() || X_train.dim(1) != X_test.dim(1)) {
    throw ShapeError("linear_probe: feature / label shapes disagree");
  }
  if (std::set<int>(y_train.begin(), y_train.end()).size() < 2) {
    throw DegenerateInput("linear_probe needs at least two classes in the training split");
  }
  const std::size_t N = X_train.dim(0), D = X_train.dim(1), C = num_classes;
  Param<double> w("probe.weight", Tensor<double>({C, D}));
  Param<double> bias("probe.bias", Tensor<double>({C}));
  const std::vector<Param<double>*> params{&w, &bias};
  const std::size_t batches = (N + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total = batches * cfg.epochs;
  std::size_t step = 0;

  auto logits_of = [&](const Tensor<double>& X, const std::vector<std::size_t>& rows) {
    Tensor<double> x({rows.size(), D});
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t j = 0; j < D; ++j) x[r * D + j] = X[rows[r] * D + j];
    }
    Tensor<double> z({rows.size(), C});
    gemm(Trans::no, Trans::yes, rows.size(), C, D, 1.0, x.ptr(), w.value.ptr(), 0.0, z.ptr());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < C; ++c) z[r * C + c] += bias.value[c];
    }
    return std::make_pair(std::move(x), std::move(z));
  };

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = epoch_order(N, cfg.seed, epoch);
    for (std::size_t b = 0; b < batches; ++b) {
      std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(b * cfg.batch_size),
                                    order.begin() + static_cast<std::ptrdiff_t>(
                                                        std::min(N, (b + 1) * cfg.batch_size)));
      auto [x, z] = logits_of(X_train, rows);
      std::vector<int> y;
      for (auto r : rows) y.push_back(y_train[r]);
      auto ce = cross_entropy(z, y);
      w.grad.fill(0);
      bias.grad.fill(0);
      gemm(Trans::yes, Trans::no, C, D, rows.size(), 1.0, ce.grad.ptr(), x.ptr(), 0.0,
           w.grad.ptr());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < C; ++c) bias.grad[c] += ce.grad[r * C + c];
      }
      sgd_update(params, cosine_lr(cfg.lr, step++, total), cfg.momentum, cfg.weight_decay);
    }
  }
  std::vector<std::size_t> all(X_test.dim(0));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  auto [x, z] = logits_of(X_test, all);
  return static_cast<double>(count_correct(z, y_test)) / static_cast<double>(all.size());
}

}  // namespace stdl

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

// IDX files (MNIST layout), synthetic blob tasks, batching and the
// replicate-over-time input encoding.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "stdl/rng.hpp"
#include "stdl/tensor.hpp"

namespace stdl {

class IdxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class BadMagic : public IdxError {
 public:
  using IdxError::IdxError;
};
class TruncatedFile : public IdxError {
 public:
  using IdxError::IdxError;
};
class DimensionMismatch : public IdxError {
 public:
  using IdxError::IdxError;
};

inline constexpr std::uint32_t kIdxImagesMagic = 2051;  // ubyte, 3 dims
inline constexpr std::uint32_t kIdxLabelsMagic = 2049;  // ubyte, 1 dim

/// Raw unsigned-byte IDX content.
struct IdxArray {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;

  bool operator==(const IdxArray&) const = default;
};

namespace detail {

inline std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

inline void write_be32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  b.push_back(static_cast<std::uint8_t>(v >> 24));
  b.push_back(static_cast<std::uint8_t>(v >> 16));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
  b.push_back(static_cast<std::uint8_t>(v));
}

inline std::vector<std::uint8_t> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

/// Parses unsigned-byte IDX content; `expected_magic` of 0 accepts any
/// ubyte magic (0x0000 08 nn).
inline IdxArray parse_idx(const std::vector<std::uint8_t>& bytes, std::uint32_t expected_magic,
                          const std::string& what = "idx") {
  if (bytes.size() < 4) throw TruncatedFile(what + ": shorter than the magic number");
  IdxArray a;
  a.magic = detail::read_be32(bytes, 0);
  const bool ubyte = (a.magic >> 8) == 0x08 && (a.magic & 0xff) >= 1;
  if (!ubyte || (expected_magic != 0 && a.magic != expected_magic)) {
    throw BadMagic(what + ": magic " + std::to_string(a.magic) +
                   (expected_magic ? ", expected " + std::to_string(expected_magic) : ""));
  }
  const std::size_t ndims = a.magic & 0xff;
  if (bytes.size() < 4 + 4 * ndims) throw TruncatedFile(what + ": header cut short");
  std::size_t count = 1;
  for (std::size_t d = 0; d < ndims; ++d) {
    a.dims.push_back(detail::read_be32(bytes, 4 + 4 * d));
    count *= a.dims.back();
  }
  const std::size_t start = 4 + 4 * ndims;
  if (bytes.size() - start < count) {
    throw TruncatedFile(what + ": " + std::to_string(bytes.size() - start) +
                        " payload bytes, header promises " + std::to_string(count));
  }
  if (bytes.size() - start > count) {
    throw DimensionMismatch(what + ": trailing bytes after payload");
  }
  a.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(start), bytes.end());
  return a;
}

inline std::vector<std::uint8_t> serialize_idx(const IdxArray& a) {
  std::vector<std::uint8_t> out;
  detail::write_be32(out, a.magic);
  for (auto d : a.dims) detail::write_be32(out, d);
  out.insert(out.end(), a.data.begin(), a.data.end());
  return out;
}

inline IdxArray read_idx(const std::string& path, std::uint32_t expected_magic = 0) {
  return parse_idx(detail::slurp(path), expected_magic, path);
}

inline void write_idx(const std::string& path, const IdxArray& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  const auto bytes = serialize_idx(a);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

/// Images in [0, 1] as float regardless of the run's precision; batches
/// are converted on extraction.
struct Dataset {
  Tensor<float> images;  // N x C x H x W
  std::vector<int> labels;
  std::size_t num_classes = 0;
  std::string split;

  std::size_t size() const { return labels.size(); }
  Shape sample_shape() const { return Shape(images.shape().begin() + 1, images.shape().end()); }

  void validate() const {
    if (labels.empty()) throw std::invalid_argument("dataset is empty");
    if (images.rank() < 2 || images.dim(0) != labels.size()) {
      throw DimensionMismatch("dataset has " + std::to_string(labels.size()) +
                              " labels for images " + shape_str(images.shape()));
    }
    for (int y : labels) {
      if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
        throw std::out_of_range("label " + std::to_string(y) + " outside [0, " +
                                std::to_string(num_classes) + ")");
      }
    }
  }
};

inline Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                        std::size_t num_classes = 10, const std::string& split = "") {
  const auto img = read_idx(images_path, kIdxImagesMagic);
  const auto lab = read_idx(labels_path, kIdxLabelsMagic);
  if (img.dims.at(0) != lab.dims.at(0)) {
    throw DimensionMismatch(std::to_string(img.dims[0]) + " images but " +
                            std::to_string(lab.dims[0]) + " labels");
  }
  Dataset ds;
  ds.split = split;
  ds.num_classes = num_classes;
  ds.images = Tensor<float>({img.dims[0], 1, img.dims[1], img.dims[2]});
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    ds.images[i] = static_cast<float>(img.data[i]) / 255.0f;
  }
  ds.labels.assign(lab.data.begin(), lab.data.end());
  ds.validate();
  return ds;
}

#ifndef STDL_DEFAULT_DATA_ROOT
#define STDL_DEFAULT_DATA_ROOT "data/mnist"
#endif

/// Flag value if given, else $STDL_DATA_ROOT, else the build default.
inline std::string data_root(const std::string& flag = "") {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("STDL_DATA_ROOT"); env != nullptr && *env != '\0') {
    return env;
  }
  return STDL_DEFAULT_DATA_ROOT;
}

inline bool mnist_available(const std::string& root) {
  namespace fs = std::filesystem;
  for (const char* f : {"train-images-idx3-ubyte", "train-labels-idx1-ubyte",
                        "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"}) {
    if (!fs::exists(fs::path(root) / f)) return false;
  }
  return true;
}

inline Dataset load_mnist(const std::string& root, bool train) {
  namespace fs = std::filesystem;
  const std::string prefix = train ? "train" : "t10k";
  return load_idx((fs::path(root) / (prefix + "-images-idx3-ubyte")).string(),
                  (fs::path(root) / (prefix + "-labels-idx1-ubyte")).string(), 10,
                  train ? "train" : "test");
}

struct SynthSpec {
  std::size_t samples = 400;
  std::size_t classes = 2;
  Shape shape{1, 4, 4};
  double noise = 0.05;  // per-pixel standard deviation around the class centre
};

/// Gaussian blobs clipped to [0, 1]. Labels cycle through the classes so
/// class counts differ by at most one, then the order is shuffled.
inline Dataset synth_blobs(std::uint64_t seed, const SynthSpec& spec) {
  if (spec.samples == 0 || spec.classes == 0) throw std::invalid_argument("empty synth spec");
  Rng root(seed);
  Rng centre_rng = root.split("centres");
  Rng noise_rng = root.split("noise");
  Rng order_rng = root.split("order");
  const std::size_t d = shape_size(spec.shape);
  std::vector<double> centres(spec.classes * d);
  for (auto& c : centres) c = centre_rng.uniform(0.1, 0.9);

  std::vector<int> labels(spec.samples);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    labels[i] = static_cast<int>(i % spec.classes);
  }
  order_rng.shuffle(labels);

  Dataset ds;
  ds.num_classes = spec.classes;
  ds.split = "synthetic";
  Shape full{spec.samples};
  full.insert(full.end(), spec.shape.begin(), spec.shape.end());
  ds.images = Tensor<float>(full);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const double* c = centres.data() + static_cast<std::size_t>(labels[i]) * d;
    for (std::size_t j = 0; j < d; ++j) {
      const double v = c[j] + spec.noise * noise_rng.normal();
      ds.images[i * d + j] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  ds.labels = std::move(labels);
  ds.validate();
  return ds;
}

/// First n samples (or all when n is 0 or too large).
inline Dataset take(const Dataset& ds, std::size_t n) {
  if (n == 0 || n >= ds.size()) return ds;
  Dataset out;
  out.num_classes = ds.num_classes;
  out.split = ds.split;
  Shape s = ds.images.shape();
  const std::size_t per = ds.images.size() / s[0];
  s[0] = n;
  out.images = Tensor<float>(s, std::vector<float>(ds.images.ptr(), ds.images.ptr() + n * per));
  out.labels.assign(ds.labels.begin(), ds.labels.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

template <class Real>
struct Batch {
  Tensor<Real> x;  // B x sample shape
  std::vector<int> y;
};

template <class Real>
Batch<Real> make_batch(const Dataset& ds, const std::vector<std::size_t>& order,
                       std::size_t begin, std::size_t end) {
  end = std::min(end, order.size());
  const std::size_t per = ds.images.size() / ds.size();
  Shape s = ds.images.shape();
  s[0] = end - begin;
  Batch<Real> b{Tensor<Real>(s), {}};
  for (std::size_t i = begin; i < end; ++i) {
    const std::size_t idx = order[i];
    const float* src = ds.images.ptr() + idx * per;
    Real* dst = b.x.ptr() + (i - begin) * per;
    for (std::size_t j = 0; j < per; ++j) dst[j] = static_cast<Real>(src[j]);
    b.y.push_back(ds.labels[idx]);
  }
  return b;
}

/// Sample order for one epoch; each epoch draws from its own stream.
inline std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed,
                                            std::size_t epoch, bool shuffle = true) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (shuffle) {
    Rng rng = Rng(seed).split("shuffle").split(static_cast<std::uint64_t>(epoch));
    rng.shuffle(order);
  }
  return order;
}

/// T identical frames. Spikes are produced by the network's encoding layer.
template <class Real>
std::vector<Tensor<Real>> replicate_encode(const Tensor<Real>& x, std::size_t T) {
  if (T == 0) throw std::invalid_argument("replicate_encode needs T >= 1");
  return std::vector<Tensor<Real>>(T, x);
}

}  // namespace stdl

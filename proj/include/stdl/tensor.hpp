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

// Dense row-major tensors and the handful of kernels the engine needs:
// GEMM, 2-D convolution, average pooling, each with its backward pass.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stdl {

using Shape = std::vector<std::size_t>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

template <class Real>
class Tensor {
 public:
  using value_type = Real;

  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = Real(0))
      : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}
  Tensor(Shape shape, std::vector<Real> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_size(shape_) != data_.size()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_str(shape_));
    }
  }

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  std::size_t bytes() const { return data_.size() * sizeof(Real); }

  std::span<Real> data() { return data_; }
  std::span<const Real> data() const { return data_; }
  Real* ptr() { return data_.data(); }
  const Real* ptr() const { return data_.data(); }
  const std::vector<Real>& vec() const { return data_; }

  Real& operator[](std::size_t i) { return data_[i]; }
  const Real& operator[](std::size_t i) const { return data_[i]; }

  Real& at(std::initializer_list<std::size_t> idx) { return data_[offset(idx)]; }
  const Real& at(std::initializer_list<std::size_t> idx) const {
    return data_[offset(idx)];
  }

  void fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

  Tensor reshaped(Shape shape) const& {
    Tensor out = *this;
    out.reshape(std::move(shape));
    return out;
  }
  Tensor reshaped(Shape shape) && {
    reshape(std::move(shape));
    return std::move(*this);
  }
  void reshape(Shape shape) {
    if (shape_size(shape) != data_.size()) {
      throw ShapeError("cannot reshape " + shape_str(shape_) + " to " +
                       shape_str(shape));
    }
    shape_ = std::move(shape);
  }

  Tensor& operator+=(const Tensor& o) {
    check_same(o, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    check_same(o, "-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Tensor& operator*=(Real s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  bool operator==(const Tensor& o) const = default;

  void check_same(const Tensor& o, const char* what) const {
    if (shape_ != o.shape_) {
      throw ShapeError(std::string(what) + ": shape mismatch " +
                       shape_str(shape_) + " vs " + shape_str(o.shape_));
    }
  }

 private:
  std::size_t offset(std::initializer_list<std::size_t> idx) const {
    if (idx.size() != shape_.size()) {
      throw ShapeError("index rank does not match tensor rank");
    }
    std::size_t off = 0;
    std::size_t d = 0;
    for (auto i : idx) {
      if (i >= shape_[d]) throw std::out_of_range("tensor index out of range");
      off = off * shape_[d] + i;
      ++d;
    }
    return off;
  }

  Shape shape_;
  std::vector<Real> data_;
};

template <class Real>
Tensor<Real> operator+(Tensor<Real> a, const Tensor<Real>& b) {
  a += b;
  return a;
}
template <class Real>
Tensor<Real> operator-(Tensor<Real> a, const Tensor<Real>& b) {
  a -= b;
  return a;
}

template <class Real>
Real max_abs_diff(const Tensor<Real>& a, const Tensor<Real>& b) {
  a.check_same(b, "max_abs_diff");
  Real m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

template <class Real>
Real squared_norm(const Tensor<Real>& a) {
  Real s = 0;
  for (Real v : a.data()) s += v * v;
  return s;
}

enum class Trans { no, yes };

namespace detail {

// Copies an op(X) view into a dense rows x cols row-major buffer.
template <class Real>
void pack(Trans t, std::size_t rows, std::size_t cols, const Real* src,
          std::vector<Real>& dst) {
  dst.resize(rows * cols);
  if (t == Trans::no) {
    std::copy(src, src + rows * cols, dst.begin());
    return;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) dst[r * cols + c] = src[c * rows + r];
  }
}

}  // namespace detail

/// C = alpha * op(A) * op(B) + beta * C, all row-major. op(A) is M x K and
/// op(B) is K x N. Rows of op(A) are scanned for zeros, so binary spike
/// operands belong on the left.
template <class Real>
void gemm(Trans ta, Trans tb, std::size_t M, std::size_t N, std::size_t K,
          Real alpha, const Real* A, const Real* B, Real beta, Real* C) {
  if (beta == Real(0)) {
    std::fill(C, C + M * N, Real(0));
  } else if (beta != Real(1)) {
    for (std::size_t i = 0; i < M * N; ++i) C[i] *= beta;
  }
  if (M == 0 || N == 0 || K == 0) return;

  std::vector<Real> abuf;
  std::vector<Real> bbuf;
  const Real* a = A;
  const Real* b = B;
  if (ta == Trans::yes) {
    detail::pack(ta, M, K, A, abuf);
    a = abuf.data();
  }
  if (tb == Trans::yes) {
    detail::pack(tb, K, N, B, bbuf);
    b = bbuf.data();
  }
  for (std::size_t i = 0; i < M; ++i) {
    Real* crow = C + i * N;
    const Real* arow = a + i * K;
    for (std::size_t k = 0; k < K; ++k) {
      const Real av = arow[k];
      if (av == Real(0)) continue;
      const Real s = alpha * av;
      const Real* brow = b + k * N;
      for (std::size_t j = 0; j < N; ++j) crow[j] += s * brow[j];
    }
  }
}

template <class Real>
Tensor<Real> matmul(const Tensor<Real>& a, const Tensor<Real>& b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw ShapeError("matmul expects rank-2 operands, got " +
                     shape_str(a.shape()) + " and " + shape_str(b.shape()));
  }
  if (a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul inner extents differ: " + shape_str(a.shape()) +
                     " . " + shape_str(b.shape()));
  }
  Tensor<Real> c({a.dim(0), b.dim(1)});
  gemm(Trans::no, Trans::no, a.dim(0), b.dim(1), a.dim(1), Real(1), a.ptr(),
       b.ptr(), Real(0), c.ptr());
  return c;
}

/// Spatial geometry of a 2-D window operation.
struct Window2d {
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;

  static std::size_t out_extent(std::size_t in, std::size_t k, std::size_t stride,
                                std::size_t pad) {
    const long long span = static_cast<long long>(in + 2 * pad) -
                           static_cast<long long>(k);
    if (stride == 0 || span < 0) {
      throw ShapeError("window " + std::to_string(k) + " with padding " +
                       std::to_string(pad) + " does not fit extent " +
                       std::to_string(in));
    }
    return static_cast<std::size_t>(span) / stride + 1;
  }
  std::size_t out_h(std::size_t h) const {
    return out_extent(h, kernel_h, stride, padding);
  }
  std::size_t out_w(std::size_t w) const {
    return out_extent(w, kernel_w, stride, padding);
  }
};

namespace detail {

struct ImageDims {
  std::size_t batch, channels, height, width;
};

template <class Real>
ImageDims image_dims(const Tensor<Real>& x, const char* op) {
  if (x.rank() == 3) return {1, x.dim(0), x.dim(1), x.dim(2)};
  if (x.rank() == 4) return {x.dim(0), x.dim(1), x.dim(2), x.dim(3)};
  throw ShapeError(std::string(op) + " expects CxHxW or BxCxHxW, got " +
                   shape_str(x.shape()));
}

inline Shape image_shape(bool batched, std::size_t b, std::size_t c,
                         std::size_t h, std::size_t w) {
  return batched ? Shape{b, c, h, w} : Shape{c, h, w};
}

// Pixel-major patch matrix: row (b, oy, ox), column (c, ky, kx).
template <class Real>
void im2col(const ImageDims& d, const Real* x, const Window2d& win,
            std::size_t oh, std::size_t ow, std::vector<Real>& cols) {
  const std::size_t patch = d.channels * win.kernel_h * win.kernel_w;
  cols.assign(d.batch * oh * ow * patch, Real(0));
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        Real* row = cols.data() + ((b * oh + oy) * ow + ox) * patch;
        for (std::size_t c = 0; c < d.channels; ++c) {
          const Real* plane = x + (b * d.channels + c) * d.height * d.width;
          for (std::size_t ky = 0; ky < win.kernel_h; ++ky) {
            const long long iy = static_cast<long long>(oy * win.stride + ky) -
                                 static_cast<long long>(win.padding);
            if (iy < 0 || iy >= static_cast<long long>(d.height)) continue;
            for (std::size_t kx = 0; kx < win.kernel_w; ++kx) {
              const long long ix = static_cast<long long>(ox * win.stride + kx) -
                                   static_cast<long long>(win.padding);
              if (ix < 0 || ix >= static_cast<long long>(d.width)) continue;
              row[(c * win.kernel_h + ky) * win.kernel_w + kx] =
                  plane[iy * d.width + ix];
            }
          }
        }
      }
    }
  }
}

template <class Real>
void col2im(const ImageDims& d, const std::vector<Real>& cols,
            const Window2d& win, std::size_t oh, std::size_t ow, Real* gx) {
  const std::size_t patch = d.channels * win.kernel_h * win.kernel_w;
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const Real* row = cols.data() + ((b * oh + oy) * ow + ox) * patch;
        for (std::size_t c = 0; c < d.channels; ++c) {
          Real* plane = gx + (b * d.channels + c) * d.height * d.width;
          for (std::size_t ky = 0; ky < win.kernel_h; ++ky) {
            const long long iy = static_cast<long long>(oy * win.stride + ky) -
                                 static_cast<long long>(win.padding);
            if (iy < 0 || iy >= static_cast<long long>(d.height)) continue;
            for (std::size_t kx = 0; kx < win.kernel_w; ++kx) {
              const long long ix = static_cast<long long>(ox * win.stride + kx) -
                                   static_cast<long long>(win.padding);
              if (ix < 0 || ix >= static_cast<long long>(d.width)) continue;
              plane[iy * d.width + ix] +=
                  row[(c * win.kernel_h + ky) * win.kernel_w + kx];
            }
          }
        }
      }
    }
  }
}

// [B, P, C] <-> [B, C, P]
template <class Real>
void swap_last_two(std::size_t batch, std::size_t rows, std::size_t cols,
                   const Real* src, Real* dst) {
  for (std::size_t b = 0; b < batch; ++b) {
    const Real* s = src + b * rows * cols;
    Real* o = dst + b * rows * cols;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) o[c * rows + r] = s[r * cols + c];
    }
  }
}

template <class Real>
void check_kernel(const ImageDims& d, const Tensor<Real>& k) {
  if (k.rank() != 4 || k.dim(1) != d.channels) {
    throw ShapeError("conv2d kernel " + shape_str(k.shape()) +
                     " incompatible with input channels " +
                     std::to_string(d.channels));
  }
}

}  // namespace detail

/// Cross-correlation of x (CxHxW or BxCxHxW) with k (CoutxCinxKhxKw).
template <class Real>
Tensor<Real> conv2d(const Tensor<Real>& x, const Tensor<Real>& k,
                    std::size_t stride, std::size_t padding) {
  const auto d = detail::image_dims(x, "conv2d");
  detail::check_kernel(d, k);
  const Window2d win{k.dim(2), k.dim(3), stride, padding};
  const std::size_t oh = win.out_h(d.height);
  const std::size_t ow = win.out_w(d.width);
  const std::size_t cout = k.dim(0);
  const std::size_t patch = d.channels * win.kernel_h * win.kernel_w;
  const std::size_t pixels = oh * ow;

  std::vector<Real> cols;
  detail::im2col(d, x.ptr(), win, oh, ow, cols);
  std::vector<Real> out_pix(d.batch * pixels * cout);
  gemm(Trans::no, Trans::yes, d.batch * pixels, cout, patch, Real(1),
       cols.data(), k.ptr(), Real(0), out_pix.data());
  Tensor<Real> out(detail::image_shape(x.rank() == 4, d.batch, cout, oh, ow));
  detail::swap_last_two(d.batch, pixels, cout, out_pix.data(), out.ptr());
  return out;
}

/// Gradients of conv2d. grad_out has the forward output's shape. Either
/// output pointer may be null when that gradient is not wanted; the kernel
/// gradient is accumulated, the input gradient overwritten.
template <class Real>
void conv2d_backward(const Tensor<Real>& x, const Tensor<Real>& k,
                     std::size_t stride, std::size_t padding,
                     const Tensor<Real>& grad_out, Tensor<Real>* grad_input,
                     Tensor<Real>* grad_kernel) {
  const auto d = detail::image_dims(x, "conv2d_backward");
  detail::check_kernel(d, k);
  const Window2d win{k.dim(2), k.dim(3), stride, padding};
  const std::size_t oh = win.out_h(d.height);
  const std::size_t ow = win.out_w(d.width);
  const std::size_t cout = k.dim(0);
  const std::size_t patch = d.channels * win.kernel_h * win.kernel_w;
  const std::size_t pixels = oh * ow;
  if (grad_out.size() != d.batch * cout * pixels) {
    throw ShapeError("conv2d_backward: grad_out " + shape_str(grad_out.shape()) +
                     " does not match forward output");
  }

  std::vector<Real> gout_pix(d.batch * pixels * cout);
  detail::swap_last_two(d.batch, cout, pixels, grad_out.ptr(), gout_pix.data());

  if (grad_kernel != nullptr) {
    if (grad_kernel->shape() != k.shape()) {
      throw ShapeError("conv2d_backward: grad_kernel shape mismatch");
    }
    std::vector<Real> cols;
    detail::im2col(d, x.ptr(), win, oh, ow, cols);
    // gK^T [patch x cout] = cols^T [patch x BP] * gout_pix [BP x cout]
    std::vector<Real> gkt(patch * cout);
    gemm(Trans::yes, Trans::no, patch, cout, d.batch * pixels, Real(1),
         cols.data(), gout_pix.data(), Real(0), gkt.data());
    Real* gk = grad_kernel->ptr();
    for (std::size_t o = 0; o < cout; ++o) {
      for (std::size_t p = 0; p < patch; ++p) gk[o * patch + p] += gkt[p * cout + o];
    }
  }
  if (grad_input != nullptr) {
    std::vector<Real> gcols(d.batch * pixels * patch);
    gemm(Trans::no, Trans::no, d.batch * pixels, patch, cout, Real(1),
         gout_pix.data(), k.ptr(), Real(0), gcols.data());
    *grad_input = Tensor<Real>(x.shape());
    detail::col2im(d, gcols, win, oh, ow, grad_input->ptr());
  }
}

template <class Real>
Tensor<Real> avgpool2d(const Tensor<Real>& x, std::size_t kernel,
                       std::size_t stride) {
  const auto d = detail::image_dims(x, "avgpool2d");
  const Window2d win{kernel, kernel, stride, 0};
  const std::size_t oh = win.out_h(d.height);
  const std::size_t ow = win.out_w(d.width);
  Tensor<Real> out(detail::image_shape(x.rank() == 4, d.batch, d.channels, oh, ow));
  const Real inv = Real(1) / static_cast<Real>(kernel * kernel);
  for (std::size_t bc = 0; bc < d.batch * d.channels; ++bc) {
    const Real* plane = x.ptr() + bc * d.height * d.width;
    Real* o = out.ptr() + bc * oh * ow;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        Real s = 0;
        for (std::size_t ky = 0; ky < kernel; ++ky) {
          for (std::size_t kx = 0; kx < kernel; ++kx) {
            s += plane[(oy * stride + ky) * d.width + ox * stride + kx];
          }
        }
        o[oy * ow + ox] = s * inv;
      }
    }
  }
  return out;
}

template <class Real>
Tensor<Real> avgpool2d_backward(const Shape& input_shape, std::size_t kernel,
                                std::size_t stride, const Tensor<Real>& grad_out) {
  const Tensor<Real> probe(input_shape);
  const auto d = detail::image_dims(probe, "avgpool2d_backward");
  const Window2d win{kernel, kernel, stride, 0};
  const std::size_t oh = win.out_h(d.height);
  const std::size_t ow = win.out_w(d.width);
  if (grad_out.size() != d.batch * d.channels * oh * ow) {
    throw ShapeError("avgpool2d_backward: grad_out shape mismatch");
  }
  Tensor<Real> gx(input_shape);
  const Real inv = Real(1) / static_cast<Real>(kernel * kernel);
  for (std::size_t bc = 0; bc < d.batch * d.channels; ++bc) {
    Real* plane = gx.ptr() + bc * d.height * d.width;
    const Real* g = grad_out.ptr() + bc * oh * ow;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const Real v = g[oy * ow + ox] * inv;
        for (std::size_t ky = 0; ky < kernel; ++ky) {
          for (std::size_t kx = 0; kx < kernel; ++kx) {
            plane[(oy * stride + ky) * d.width + ox * stride + kx] += v;
          }
        }
      }
    }
  }
  return gx;
}

namespace detail {
inline std::pair<std::size_t, std::size_t> adaptive_bin(std::size_t i,
                                                        std::size_t in,
                                                        std::size_t out) {
  const std::size_t lo = (i * in) / out;
  const std::size_t hi = ((i + 1) * in + out - 1) / out;
  return {lo, hi};
}
}  // namespace detail

/// Average pooling onto a fixed output grid; bins may overlap when the output
/// is larger than the input.
template <class Real>
Tensor<Real> adaptive_avgpool2d(const Tensor<Real>& x, std::size_t oh,
                                std::size_t ow) {
  const auto d = detail::image_dims(x, "adaptive_avgpool2d");
  if (oh == 0 || ow == 0) throw ShapeError("adaptive_avgpool2d: empty output");
  Tensor<Real> out(detail::image_shape(x.rank() == 4, d.batch, d.channels, oh, ow));
  for (std::size_t bc = 0; bc < d.batch * d.channels; ++bc) {
    const Real* plane = x.ptr() + bc * d.height * d.width;
    Real* o = out.ptr() + bc * oh * ow;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      const auto [y0, y1] = detail::adaptive_bin(oy, d.height, oh);
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const auto [x0, x1] = detail::adaptive_bin(ox, d.width, ow);
        Real s = 0;
        for (std::size_t y = y0; y < y1; ++y) {
          for (std::size_t xx = x0; xx < x1; ++xx) s += plane[y * d.width + xx];
        }
        o[oy * ow + ox] = s / static_cast<Real>((y1 - y0) * (x1 - x0));
      }
    }
  }
  return out;
}

template <class Real>
Tensor<Real> adaptive_avgpool2d_backward(const Shape& input_shape,
                                         const Tensor<Real>& grad_out) {
  const Tensor<Real> probe(input_shape);
  const auto d = detail::image_dims(probe, "adaptive_avgpool2d_backward");
  const auto g = detail::image_dims(grad_out, "adaptive_avgpool2d_backward");
  const std::size_t oh = g.height;
  const std::size_t ow = g.width;
  Tensor<Real> gx(input_shape);
  for (std::size_t bc = 0; bc < d.batch * d.channels; ++bc) {
    Real* plane = gx.ptr() + bc * d.height * d.width;
    const Real* go = grad_out.ptr() + bc * oh * ow;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      const auto [y0, y1] = detail::adaptive_bin(oy, d.height, oh);
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const auto [x0, x1] = detail::adaptive_bin(ox, d.width, ow);
        const Real v =
            go[oy * ow + ox] / static_cast<Real>((y1 - y0) * (x1 - x0));
        for (std::size_t y = y0; y < y1; ++y) {
          for (std::size_t xx = x0; xx < x1; ++xx) plane[y * d.width + xx] += v;
        }
      }
    }
  }
  return gx;
}

}  // namespace stdl

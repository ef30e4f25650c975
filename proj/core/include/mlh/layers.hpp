#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "mlh/parallel.hpp"
#include "mlh/rng.hpp"
#include "mlh/tensor.hpp"

namespace mlh {

enum class LayerKind : std::uint8_t {
  Conv2D = 0,
  ReLU = 1,
  MaxPool2x2 = 2,
  BatchNorm2D = 3,
  Flatten = 4,
  Linear = 5,
};

/// Dot product with eight fixed accumulation lanes (lane j sums the indices
/// congruent to j mod 8, combined pairwise). The order never depends on
/// thread count or data, so results are reproducible while the lanes still
/// vectorize.
template <typename T>
T dot_lanes(const T* a, const T* b, std::size_t n) {
  T lanes[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) lanes[j] += a[i + j] * b[i + j];
  }
  for (std::size_t j = 0; i + j < n; ++j) lanes[j] += a[i + j] * b[i + j];
  return ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) +
         ((lanes[4] + lanes[5]) + (lanes[6] + lanes[7]));
}

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor<T> forward(const Tensor<T>& x, bool train) = 0;
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
  virtual LayerKind kind() const = 0;
  /// Trainable parameters and their gradients, index-aligned.
  virtual std::vector<Tensor<T>*> params() { return {}; }
  virtual std::vector<Tensor<T>*> grads() { return {}; }
  /// Everything a checkpoint must carry (params plus running statistics).
  virtual std::vector<Tensor<T>*> state() { return params(); }
};

/// 2D convolution in the cross-correlation convention (no kernel flip).
/// Output height is (H + 2 * pad - kh) / stride + 1.
template <typename T>
class Conv2D final : public Layer<T> {
 public:
  /// use_bias is off for convolutions feeding a batch norm: the mean
  /// subtraction cancels any constant shift, which would leave the bias with
  /// an exactly-zero gradient.
  Conv2D(std::size_t in_ch, std::size_t out_ch, std::size_t kh, std::size_t kw,
         std::size_t stride = 1, std::size_t pad = 0, bool use_bias = true)
      : weight({out_ch, in_ch, kh, kw}),
        bias({out_ch}),
        grad_weight({out_ch, in_ch, kh, kw}),
        grad_bias({out_ch}),
        in_ch_(in_ch),
        out_ch_(out_ch),
        kh_(kh),
        kw_(kw),
        stride_(stride),
        pad_(pad),
        use_bias_(use_bias) {
    if (stride == 0) throw ShapeMismatch("conv stride must be positive");
  }

  void init(Rng& rng) {
    const double fan_in = static_cast<double>(in_ch_ * kh_ * kw_);
    const double wb = std::sqrt(6.0 / fan_in);
    for (T& v : weight.data) v = static_cast<T>(rng.uniform(-wb, wb));
    if (use_bias_) {
      const double bb = 1.0 / std::sqrt(fan_in);
      for (T& v : bias.data) v = static_cast<T>(rng.uniform(-bb, bb));
    }
  }

  Tensor<T> forward(const Tensor<T>& x, bool /*train*/) override {
    check_input(x);
    in_shape_ = x.shape;
    const std::size_t batch = x.dim(0), h = x.dim(2), w = x.dim(3);
    const std::size_t oh = out_size(h, kh_), ow = out_size(w, kw_);
    const std::size_t taps = in_ch_ * kh_ * kw_;
    const std::size_t positions = oh * ow;

    // im2col in [tap][position] layout: gathers are contiguous on both sides
    // and every output channel reuses the same columns.
    cols_.assign(batch * taps * positions, T(0));
    const T* xd = x.data.data();
    parallel_for(batch, [&](std::size_t b_begin, std::size_t b_end) {
      for (std::size_t b = b_begin; b < b_end; ++b) {
        T* col_base = cols_.data() + b * taps * positions;
        for (std::size_t ci = 0; ci < in_ch_; ++ci) {
          const T* in_base = xd + (b * in_ch_ + ci) * h * w;
          for (std::size_t ky = 0; ky < kh_; ++ky) {
            const auto [oy_lo, oy_hi] = tap_range(oh, h, ky);
            for (std::size_t kx = 0; kx < kw_; ++kx) {
              const auto [ox_lo, ox_hi] = tap_range(ow, w, kx);
              T* col = col_base + ((ci * kh_ + ky) * kw_ + kx) * positions;
              for (std::size_t oy = oy_lo; oy < oy_hi; ++oy) {
                const T* in_row = in_base + (oy * stride_ + ky - pad_) * w;
                T* col_row = col + oy * ow;
                if (stride_ == 1) {
                  const T* src = in_row + kx - pad_;
                  for (std::size_t ox = ox_lo; ox < ox_hi; ++ox) col_row[ox] = src[ox];
                } else {
                  for (std::size_t ox = ox_lo; ox < ox_hi; ++ox) {
                    col_row[ox] = in_row[ox * stride_ + kx - pad_];
                  }
                }
              }
            }
          }
        }
      }
    });

    Tensor<T> y({batch, out_ch_, oh, ow});
    T* yd = y.data.data();
    const T* wd = weight.data.data();
    parallel_for(batch * out_ch_, [&](std::size_t begin, std::size_t end) {
      for (std::size_t t = begin; t < end; ++t) {
        const std::size_t b = t / out_ch_, co = t % out_ch_;
        const T* col_base = cols_.data() + b * taps * positions;
        const T* w_row = wd + co * taps;
        T* out = yd + (b * out_ch_ + co) * positions;
        for (std::size_t pos = 0; pos < positions; ++pos) out[pos] = bias[co];
        for (std::size_t k = 0; k < taps; ++k) {
          const T wv = w_row[k];
          const T* col = col_base + k * positions;
          for (std::size_t pos = 0; pos < positions; ++pos) out[pos] += wv * col[pos];
        }
      }
    });
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    if (in_shape_.empty()) throw ShapeMismatch("conv backward before forward");
    const std::size_t batch = in_shape_[0], h = in_shape_[2], w = in_shape_[3];
    const std::size_t oh = out_size(h, kh_), ow = out_size(w, kw_);
    const std::size_t taps = in_ch_ * kh_ * kw_;
    const std::size_t positions = oh * ow;
    if (gy.shape != std::vector<std::size_t>{batch, out_ch_, oh, ow}) {
      throw ShapeMismatch("conv backward: unexpected gradient shape " + shape_string(gy));
    }

    const T* gyd = gy.data.data();
    const T* cols = cols_.data();

    // Parameter gradients, one output channel per task.
    T* gwd = grad_weight.data.data();
    T* gbd = grad_bias.data.data();
    parallel_for(out_ch_, [&](std::size_t begin, std::size_t end) {
      for (std::size_t co = begin; co < end; ++co) {
        T* gw = gwd + co * taps;
        T gb{};
        for (std::size_t i = 0; i < taps; ++i) gw[i] = T(0);
        for (std::size_t b = 0; b < batch; ++b) {
          const T* gy_row = gyd + (b * out_ch_ + co) * positions;
          const T* col_base = cols + b * taps * positions;
          for (std::size_t pos = 0; pos < positions; ++pos) gb += gy_row[pos];
          for (std::size_t k = 0; k < taps; ++k) {
            gw[k] += dot_lanes(gy_row, col_base + k * positions, positions);
          }
        }
        gbd[co] = gb;
      }
    });

    // Input gradient: gradient columns, then a col2im scatter per sample.
    Tensor<T> gx({batch, in_ch_, h, w});
    T* gxd = gx.data.data();
    const T* wd = weight.data.data();
    parallel_for(batch, [&](std::size_t b_begin, std::size_t b_end) {
      std::vector<T> gcols(taps * positions);
      for (std::size_t b = b_begin; b < b_end; ++b) {
        std::fill(gcols.begin(), gcols.end(), T(0));
        for (std::size_t co = 0; co < out_ch_; ++co) {
          const T* gy_row = gyd + (b * out_ch_ + co) * positions;
          const T* w_row = wd + co * taps;
          for (std::size_t k = 0; k < taps; ++k) {
            const T wv = w_row[k];
            T* gcol = gcols.data() + k * positions;
            for (std::size_t pos = 0; pos < positions; ++pos) gcol[pos] += wv * gy_row[pos];
          }
        }
        T* gx_base = gxd + b * in_ch_ * h * w;
        for (std::size_t ci = 0; ci < in_ch_; ++ci) {
          T* gx_plane = gx_base + ci * h * w;
          for (std::size_t ky = 0; ky < kh_; ++ky) {
            const auto [oy_lo, oy_hi] = tap_range(oh, h, ky);
            for (std::size_t kx = 0; kx < kw_; ++kx) {
              const auto [ox_lo, ox_hi] = tap_range(ow, w, kx);
              const T* gcol = gcols.data() + ((ci * kh_ + ky) * kw_ + kx) * positions;
              for (std::size_t oy = oy_lo; oy < oy_hi; ++oy) {
                T* gx_row = gx_plane + (oy * stride_ + ky - pad_) * w;
                const T* gcol_row = gcol + oy * ow;
                if (stride_ == 1) {
                  T* dst = gx_row + kx - pad_;
                  for (std::size_t ox = ox_lo; ox < ox_hi; ++ox) dst[ox] += gcol_row[ox];
                } else {
                  for (std::size_t ox = ox_lo; ox < ox_hi; ++ox) {
                    gx_row[ox * stride_ + kx - pad_] += gcol_row[ox];
                  }
                }
              }
            }
          }
        }
      }
    });
    return gx;
  }

  LayerKind kind() const override { return LayerKind::Conv2D; }
  std::vector<Tensor<T>*> params() override {
    if (!use_bias_) return {&weight};
    return {&weight, &bias};
  }
  std::vector<Tensor<T>*> grads() override {
    if (!use_bias_) return {&grad_weight};
    return {&grad_weight, &grad_bias};
  }

  std::size_t in_channels() const { return in_ch_; }
  std::size_t out_channels() const { return out_ch_; }

  Tensor<T> weight, bias, grad_weight, grad_bias;

 private:
  void check_input(const Tensor<T>& x) const {
    if (x.rank() != 4 || x.dim(1) != in_ch_) {
      throw ShapeMismatch("conv expects [B, " + std::to_string(in_ch_) + ", H, W], got " +
                          shape_string(x));
    }
    if (x.dim(2) + 2 * pad_ < kh_ || x.dim(3) + 2 * pad_ < kw_) {
      throw ShapeMismatch("conv kernel larger than padded input");
    }
  }
  std::size_t out_size(std::size_t in, std::size_t kernel) const {
    return (in + 2 * pad_ - kernel) / stride_ + 1;
  }

  /// Output indices o for which o * stride + k - pad stays inside [0, in).
  std::pair<std::size_t, std::size_t> tap_range(std::size_t out, std::size_t in,
                                                std::size_t k) const {
    const auto shift = static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(pad_);
    const auto s = static_cast<std::ptrdiff_t>(stride_);
    const std::ptrdiff_t lo = shift < 0 ? (-shift + s - 1) / s : 0;
    const std::ptrdiff_t last_in = static_cast<std::ptrdiff_t>(in) - 1 - shift;
    std::ptrdiff_t hi = last_in < 0 ? 0 : last_in / s + 1;
    hi = std::min(hi, static_cast<std::ptrdiff_t>(out));
    return {static_cast<std::size_t>(std::min(lo, hi)), static_cast<std::size_t>(hi)};
  }

  std::size_t in_ch_, out_ch_, kh_, kw_, stride_, pad_;
  bool use_bias_;
  std::vector<std::size_t> in_shape_;
  std::vector<T> cols_;  // im2col patches of the last forward
};

template <typename T>
class ReLU final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool /*train*/) override {
    mask_.resize(x.numel());
    Tensor<T> y(x.shape);
    const T* xd = x.data.data();
    T* yd = y.data.data();
    std::uint8_t* mask = mask_.data();
    parallel_for(x.numel(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const bool positive = xd[i] > T(0);
        mask[i] = positive;
        yd[i] = positive ? xd[i] : T(0);  // subgradient 0 at x == 0
      }
    });
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    if (gy.numel() != mask_.size()) throw ShapeMismatch("relu backward shape");
    Tensor<T> gx(gy.shape);
    const T* gyd = gy.data.data();
    T* gxd = gx.data.data();
    const std::uint8_t* mask = mask_.data();
    parallel_for(gy.numel(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) gxd[i] = mask[i] ? gyd[i] : T(0);
    });
    return gx;
  }

  LayerKind kind() const override { return LayerKind::ReLU; }

 private:
  std::vector<std::uint8_t> mask_;
};

template <typename T>
class MaxPool2x2 final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool /*train*/) override {
    if (x.rank() != 4 || x.dim(2) % 2 != 0 || x.dim(3) % 2 != 0) {
      throw ShapeMismatch("maxpool2x2 expects even spatial dims, got " + shape_string(x));
    }
    in_shape_ = x.shape;
    const std::size_t batch = x.dim(0), ch = x.dim(1), h = x.dim(2), w = x.dim(3);
    Tensor<T> y({batch, ch, h / 2, w / 2});
    argmax_.resize(y.numel());
    const std::size_t out_plane = (h / 2) * (w / 2);
    parallel_for(batch * ch, [&](std::size_t begin, std::size_t end) {
      for (std::size_t bc = begin; bc < end; ++bc) {
        const T* plane = x.data.data() + bc * h * w;
        std::size_t o = bc * out_plane;
        for (std::size_t oy = 0; oy < h / 2; ++oy) {
          for (std::size_t ox = 0; ox < w / 2; ++ox) {
            // First maximum in scan order wins ties.
            std::size_t best = (2 * oy) * w + 2 * ox;
            T best_v = plane[best];
            const std::size_t cand[3] = {best + 1, best + w, best + w + 1};
            for (std::size_t c : cand) {
              if (plane[c] > best_v) {
                best_v = plane[c];
                best = c;
              }
            }
            y[o] = best_v;
            argmax_[o++] = bc * h * w + best;
          }
        }
      }
    });
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    if (gy.numel() != argmax_.size()) throw ShapeMismatch("maxpool backward shape");
    Tensor<T> gx(in_shape_);
    for (std::size_t i = 0; i < gy.numel(); ++i) gx[argmax_[i]] += gy[i];
    return gx;
  }

  LayerKind kind() const override { return LayerKind::MaxPool2x2; }

 private:
  std::vector<std::size_t> in_shape_;
  std::vector<std::size_t> argmax_;
};

/// Per-channel batch normalization over [B, C, H, W]. Training mode uses
/// biased batch statistics and updates the running estimates; eval mode is a
/// pure affine map from the running estimates.
template <typename T>
class BatchNorm2D final : public Layer<T> {
 public:
  explicit BatchNorm2D(std::size_t channels, T eps = T(1e-5), T momentum = T(0.1))
      : gamma({channels}),
        beta({channels}),
        running_mean({channels}),
        running_var({channels}),
        grad_gamma({channels}),
        grad_beta({channels}),
        channels_(channels),
        eps_(eps),
        momentum_(momentum) {
    gamma.fill(T(1));
    running_var.fill(T(1));
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) override {
    if (x.rank() != 4 || x.dim(1) != channels_) {
      throw ShapeMismatch("batchnorm expects [B, " + std::to_string(channels_) + ", H, W], got " +
                          shape_string(x));
    }
    const std::size_t batch = x.dim(0), h = x.dim(2), w = x.dim(3);
    const std::size_t plane = h * w;
    const T count = static_cast<T>(batch * plane);
    Tensor<T> y(x.shape);

    if (train) {
      x_cache_ = x;
      mean_.assign(channels_, T(0));
      inv_std_.assign(channels_, T(0));
      parallel_for(channels_, [&](std::size_t c_begin, std::size_t c_end) {
        for (std::size_t c = c_begin; c < c_end; ++c) {
          T sum{};
          for (std::size_t b = 0; b < batch; ++b) {
            const T* row = x.data.data() + (b * channels_ + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) sum += row[i];
          }
          const T mean = sum / count;
          T var_sum{};
          for (std::size_t b = 0; b < batch; ++b) {
            const T* row = x.data.data() + (b * channels_ + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
              const T d = row[i] - mean;
              var_sum += d * d;
            }
          }
          const T var = var_sum / count;
          mean_[c] = mean;
          inv_std_[c] = T(1) / std::sqrt(var + eps_);
          running_mean[c] = (T(1) - momentum_) * running_mean[c] + momentum_ * mean;
          running_var[c] = (T(1) - momentum_) * running_var[c] + momentum_ * var;
          for (std::size_t b = 0; b < batch; ++b) {
            const T* row = x.data.data() + (b * channels_ + c) * plane;
            T* out = y.data.data() + (b * channels_ + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
              out[i] = gamma[c] * ((row[i] - mean) * inv_std_[c]) + beta[c];
            }
          }
        }
      });
    } else {
      parallel_for(channels_, [&](std::size_t c_begin, std::size_t c_end) {
        for (std::size_t c = c_begin; c < c_end; ++c) {
          const T scale = gamma[c] / std::sqrt(running_var[c] + eps_);
          const T shift = beta[c] - scale * running_mean[c];
          for (std::size_t b = 0; b < batch; ++b) {
            const T* row = x.data.data() + (b * channels_ + c) * plane;
            T* out = y.data.data() + (b * channels_ + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) out[i] = scale * row[i] + shift;
          }
        }
      });
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const Tensor<T>& x = x_cache_;
    require_same_shape(gy, x, "batchnorm backward");
    const std::size_t batch = x.dim(0), plane = x.dim(2) * x.dim(3);
    const T count = static_cast<T>(batch * plane);
    Tensor<T> gx(x.shape);
    parallel_for(channels_, [&](std::size_t c_begin, std::size_t c_end) {
      for (std::size_t c = c_begin; c < c_end; ++c) {
        T sum_gy{}, sum_gy_xhat{};
        for (std::size_t b = 0; b < batch; ++b) {
          const T* xr = x.data.data() + (b * channels_ + c) * plane;
          const T* gr = gy.data.data() + (b * channels_ + c) * plane;
          for (std::size_t i = 0; i < plane; ++i) {
            const T xhat = (xr[i] - mean_[c]) * inv_std_[c];
            sum_gy += gr[i];
            sum_gy_xhat += gr[i] * xhat;
          }
        }
        grad_beta[c] = sum_gy;
        grad_gamma[c] = sum_gy_xhat;
        const T mean_gy = sum_gy / count;
        const T mean_gy_xhat = sum_gy_xhat / count;
        for (std::size_t b = 0; b < batch; ++b) {
          const T* xr = x.data.data() + (b * channels_ + c) * plane;
          const T* gr = gy.data.data() + (b * channels_ + c) * plane;
          T* out = gx.data.data() + (b * channels_ + c) * plane;
          for (std::size_t i = 0; i < plane; ++i) {
            const T xhat = (xr[i] - mean_[c]) * inv_std_[c];
            out[i] = gamma[c] * inv_std_[c] * (gr[i] - mean_gy - xhat * mean_gy_xhat);
          }
        }
      }
    });
    return gx;
  }

  LayerKind kind() const override { return LayerKind::BatchNorm2D; }
  std::vector<Tensor<T>*> params() override { return {&gamma, &beta}; }
  std::vector<Tensor<T>*> grads() override { return {&grad_gamma, &grad_beta}; }
  std::vector<Tensor<T>*> state() override {
    return {&gamma, &beta, &running_mean, &running_var};
  }

  Tensor<T> gamma, beta, running_mean, running_var, grad_gamma, grad_beta;

 private:
  std::size_t channels_;
  T eps_, momentum_;
  Tensor<T> x_cache_;
  std::vector<T> mean_, inv_std_;
};

template <typename T>
class Flatten final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool /*train*/) override {
    in_shape_ = x.shape;
    return x.reshaped({x.dim(0), x.numel() / x.dim(0)});
  }
  Tensor<T> backward(const Tensor<T>& gy) override { return gy.reshaped(in_shape_); }
  LayerKind kind() const override { return LayerKind::Flatten; }

 private:
  std::vector<std::size_t> in_shape_;
};

template <typename T>
class Linear final : public Layer<T> {
 public:
  Linear(std::size_t in, std::size_t out)
      : weight({out, in}), bias({out}), grad_weight({out, in}), grad_bias({out}), in_(in),
        out_(out) {}

  void init(Rng& rng) {
    const double wb = std::sqrt(6.0 / static_cast<double>(in_));
    for (T& v : weight.data) v = static_cast<T>(rng.uniform(-wb, wb));
    const double bb = 1.0 / std::sqrt(static_cast<double>(in_));
    for (T& v : bias.data) v = static_cast<T>(rng.uniform(-bb, bb));
  }

  Tensor<T> forward(const Tensor<T>& x, bool /*train*/) override {
    if (x.rank() != 2 || x.dim(1) != in_) {
      throw ShapeMismatch("linear expects [B, " + std::to_string(in_) + "], got " +
                          shape_string(x));
    }
    x_cache_ = x;
    const std::size_t batch = x.dim(0);
    Tensor<T> y({batch, out_});
    parallel_for(batch, [&](std::size_t begin, std::size_t end) {
      for (std::size_t b = begin; b < end; ++b) {
        const T* xr = x.data.data() + b * in_;
        T* yr = y.data.data() + b * out_;
        for (std::size_t o = 0; o < out_; ++o) {
          yr[o] = bias[o] + dot_lanes(xr, weight.data.data() + o * in_, in_);
        }
      }
    });
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const std::size_t batch = x_cache_.dim(0);
    if (gy.shape != std::vector<std::size_t>{batch, out_}) {
      throw ShapeMismatch("linear backward: unexpected gradient shape " + shape_string(gy));
    }
    parallel_for(out_, [&](std::size_t begin, std::size_t end) {
      for (std::size_t o = begin; o < end; ++o) {
        T gb{};
        T* gw = grad_weight.data.data() + o * in_;
        for (std::size_t i = 0; i < in_; ++i) gw[i] = T(0);
        for (std::size_t b = 0; b < batch; ++b) {
          const T g = gy.at2(b, o);
          gb += g;
          const T* xr = x_cache_.data.data() + b * in_;
          for (std::size_t i = 0; i < in_; ++i) gw[i] += g * xr[i];
        }
        grad_bias[o] = gb;
      }
    });
    Tensor<T> gx({batch, in_});
    parallel_for(batch, [&](std::size_t begin, std::size_t end) {
      for (std::size_t b = begin; b < end; ++b) {
        T* gr = gx.data.data() + b * in_;
        for (std::size_t o = 0; o < out_; ++o) {
          const T g = gy.at2(b, o);
          const T* wr = weight.data.data() + o * in_;
          for (std::size_t i = 0; i < in_; ++i) gr[i] += g * wr[i];
        }
      }
    });
    return gx;
  }

  LayerKind kind() const override { return LayerKind::Linear; }
  std::vector<Tensor<T>*> params() override { return {&weight, &bias}; }
  std::vector<Tensor<T>*> grads() override { return {&grad_weight, &grad_bias}; }

  Tensor<T> weight, bias, grad_weight, grad_bias;

 private:
  std::size_t in_, out_;
  Tensor<T> x_cache_;
};

/// Ordered layer stack.
template <typename T>
class Sequential {
 public:
  template <typename L, typename... Args>
  L& add(Args&&... args) {
    layers_.push_back(std::make_unique<L>(std::forward<Args>(args)...));
    return static_cast<L&>(*layers_.back());
  }

  Tensor<T> forward(Tensor<T> x, bool train) {
    const bool check = nan_checks_enabled();
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      x = layers_[i]->forward(x, train);
      if (check && !all_finite(x)) {
        throw Error("non-finite activation after layer " + std::to_string(i));
      }
    }
    return x;
  }

  Tensor<T> backward(Tensor<T> gy) {
    const bool check = nan_checks_enabled();
    for (std::size_t i = layers_.size(); i-- > 0;) {
      gy = layers_[i]->backward(gy);
      if (check && !all_finite(gy)) {
        throw Error("non-finite gradient before layer " + std::to_string(i));
      }
    }
    return gy;
  }

  std::vector<Tensor<T>*> params() {
    std::vector<Tensor<T>*> out;
    for (auto& l : layers_) {
      for (auto* t : l->params()) out.push_back(t);
    }
    return out;
  }
  std::vector<Tensor<T>*> grads() {
    std::vector<Tensor<T>*> out;
    for (auto& l : layers_) {
      for (auto* t : l->grads()) out.push_back(t);
    }
    return out;
  }
  std::vector<Tensor<T>*> state() {
    std::vector<Tensor<T>*> out;
    for (auto& l : layers_) {
      for (auto* t : l->state()) out.push_back(t);
    }
    return out;
  }

  std::size_t size() const { return layers_.size(); }
  Layer<T>& operator[](std::size_t i) { return *layers_[i]; }
  const Layer<T>& operator[](std::size_t i) const { return *layers_[i]; }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

template <typename T>
struct LossResult {
  T loss{};
  Tensor<T> grad_logits;
};

/// Mean cross entropy over the batch with the softmax folded in; returns the
/// logits gradient. Throws LabelOutOfRange.
template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, const std::vector<std::size_t>& labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw ShapeMismatch("cross entropy expects [B, C] logits with one label per row");
  }
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  LossResult<T> result;
  result.grad_logits = Tensor<T>(logits.shape);
  T loss{};
  for (std::size_t b = 0; b < batch; ++b) {
    if (labels[b] >= classes) {
      throw LabelOutOfRange("label " + std::to_string(labels[b]) + " >= " +
                            std::to_string(classes));
    }
    const T* row = logits.data.data() + b * classes;
    T max_logit = row[0];
    for (std::size_t c = 1; c < classes; ++c) max_logit = std::max(max_logit, row[c]);
    T sum_exp{};
    for (std::size_t c = 0; c < classes; ++c) sum_exp += std::exp(row[c] - max_logit);
    const T log_sum = std::log(sum_exp) + max_logit;
    loss += log_sum - row[labels[b]];
    T* grad = result.grad_logits.data.data() + b * classes;
    for (std::size_t c = 0; c < classes; ++c) {
      grad[c] = std::exp(row[c] - log_sum) / static_cast<T>(batch);
    }
    grad[labels[b]] -= T(1) / static_cast<T>(batch);
  }
  result.loss = loss / static_cast<T>(batch);
  return result;
}

}  // namespace mlh

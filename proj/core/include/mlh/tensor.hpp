#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mlh/errors.hpp"

namespace mlh {

namespace detail {
inline std::atomic<bool> g_nan_checks{false};
}

/// When enabled, layer containers verify that every layer output stays
/// finite and throw Error on the first NaN/Inf. Off by default; intended for
/// debugging diverging trainings.
inline void set_nan_checks(bool enabled) {
  detail::g_nan_checks.store(enabled, std::memory_order_relaxed);
}
inline bool nan_checks_enabled() {
  return detail::g_nan_checks.load(std::memory_order_relaxed);
}

/// Dense row-major n-dimensional array. The scalar type is a template
/// parameter: tests and gradient checks run in double, training in float.
template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims)
      : shape(std::move(dims)), data(count(shape), T(0)) {}
  Tensor(std::vector<std::size_t> dims, std::vector<T> values)
      : shape(std::move(dims)), data(std::move(values)) {
    if (data.size() != count(shape)) {
      throw ShapeMismatch("tensor data length does not match its shape");
    }
  }

  static std::size_t count(const std::vector<std::size_t>& dims) {
    std::size_t n = 1;
    for (std::size_t d : dims) n *= d;
    return n;
  }

  std::size_t numel() const { return data.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  std::size_t rank() const { return shape.size(); }

  T& operator[](std::size_t i) { return data[i]; }
  const T& operator[](std::size_t i) const { return data[i]; }

  // Rank-specific accessors; layers know their ranks statically.
  T& at2(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
  const T& at2(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }
  T& at4(std::size_t b, std::size_t c, std::size_t y, std::size_t x) {
    return data[((b * shape[1] + c) * shape[2] + y) * shape[3] + x];
  }
  const T& at4(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
    return data[((b * shape[1] + c) * shape[2] + y) * shape[3] + x];
  }

  Tensor reshaped(std::vector<std::size_t> dims) const {
    if (count(dims) != numel()) throw ShapeMismatch("reshape changes the element count");
    Tensor out;
    out.shape = std::move(dims);
    out.data = data;
    return out;
  }

  void fill(T value) { std::fill(data.begin(), data.end(), value); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool operator==(const Tensor& o) const = default;
};

template <typename T>
std::string shape_string(const Tensor<T>& t) {
  std::string s = "[";
  for (std::size_t i = 0; i < t.shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(t.shape[i]);
  }
  return s + "]";
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeMismatch(std::string(what) + ": " + shape_string(a) + " vs " + shape_string(b));
  }
}

template <typename T>
bool all_finite(const Tensor<T>& t) {
  for (const T& v : t.data) {
    if (!std::isfinite(static_cast<double>(v))) return false;
  }
  return true;
}

}  // namespace mlh

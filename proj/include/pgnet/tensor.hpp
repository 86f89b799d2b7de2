#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pgnet/util.hpp"

namespace pgnet::ad {

// Dense row-major array. Rank is 1 or 2 in practice; every model quantity is
// a matrix whose rows are either batch examples or source positions.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    v.assign(static_cast<size_t>(numel_of(shape)), T(0));
  }
  Tensor(std::vector<int> s, std::vector<T> values)
      : shape(std::move(s)), v(std::move(values)) {
    if (static_cast<int64_t>(v.size()) != numel_of(shape))
      fail("tensor: ", v.size(), " values for shape ", shape_str());
  }

  static int64_t numel_of(const std::vector<int>& s) {
    int64_t n = 1;
    for (int d : s) {
      if (d <= 0) fail("tensor: nonpositive dimension in shape");
      n *= d;
    }
    return s.empty() ? 0 : n;
  }

  int64_t numel() const { return static_cast<int64_t>(v.size()); }
  int rows() const { return shape.empty() ? 0 : shape[0]; }
  int cols() const { return shape.size() < 2 ? (shape.empty() ? 0 : 1) : shape[1]; }

  T& at(int r, int c) { return v[static_cast<size_t>(r) * cols() + c]; }
  T at(int r, int c) const { return v[static_cast<size_t>(r) * cols() + c]; }

  bool finite() const {
    for (T x : v)
      if (!std::isfinite(static_cast<double>(x))) return false;
    return true;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape[i]);
    }
    return s + "]";
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.v.reserve(v.size());
    for (T x : v) out.v.push_back(static_cast<U>(x));
    return out;
  }

  static Tensor zeros(int r, int c) { return Tensor({r, c}); }
  static Tensor full(int r, int c, T value) {
    Tensor t({r, c});
    for (auto& x : t.v) x = value;
    return t;
  }
  static Tensor row(std::vector<T> values) {
    int n = static_cast<int>(values.size());
    return Tensor({1, n}, std::move(values));
  }
  static Tensor uniform(int r, int c, T lo, T hi, Rng& rng) {
    Tensor t({r, c});
    for (auto& x : t.v) x = static_cast<T>(rng.uniform(lo, hi));
    return t;
  }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace pgnet::ad

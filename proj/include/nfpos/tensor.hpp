#ifndef NFPOS_TENSOR_HPP
#define NFPOS_TENSOR_HPP

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "nfpos/common.hpp"

namespace nfpos {

// Dense row-major tensor. Rank is dynamic; the NN code uses rank-4
// [B, C, H, W] and rank-2 [B, F] almost exclusively.
template <typename T>
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int64_t> s) : shape(std::move(s)) {
    data.assign(static_cast<size_t>(numel_of(shape)), T(0));
  }

  static int64_t numel_of(const std::vector<int64_t>& s) {
    int64_t n = 1;
    for (int64_t d : s) {
      if (d < 0) throw ShapeError("negative tensor dimension");
      n *= d;
    }
    return n;
  }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int64_t dim(int i) const { return shape.at(static_cast<size_t>(i)); }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  T& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

  // Rank-4 accessor.
  T& at4(int64_t b, int64_t c, int64_t h, int64_t w) {
    return data[static_cast<size_t>(((b * shape[1] + c) * shape[2] + h) * shape[3] + w)];
  }
  const T& at4(int64_t b, int64_t c, int64_t h, int64_t w) const {
    return data[static_cast<size_t>(((b * shape[1] + c) * shape[2] + h) * shape[3] + w)];
  }

  // Rank-2 accessor.
  T& at2(int64_t i, int64_t j) { return data[static_cast<size_t>(i * shape[1] + j)]; }
  const T& at2(int64_t i, int64_t j) const { return data[static_cast<size_t>(i * shape[1] + j)]; }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  void reshape(std::vector<int64_t> s) {
    if (numel_of(s) != numel()) throw ShapeError("reshape changes element count");
    shape = std::move(s);
  }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape[i]);
    }
    return s + "]";
  }
};

template <typename T>
void require_shape(const Tensor<T>& t, const std::vector<int64_t>& expect,
                   const std::string& what) {
  if (t.shape != expect) {
    Tensor<T> e;
    e.shape = expect;
    throw ShapeError(what + ": expected " + e.shape_str() + ", got " + t.shape_str());
  }
}

}  // namespace nfpos

#endif

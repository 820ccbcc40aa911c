#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "ccnet/error.hpp"

namespace ccnet {

// Dense row-major tensor. Rank 1-4 in practice: images are [h,w,c], conv
// kernel banks [oc,kh,kw,ic], dense weights [out,in], biases [n].
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    std::size_t n = 1;
    if (shape_.empty()) throw InputError("tensor shape must have at least one extent");
    for (int d : shape_) {
      if (d < 1) throw InputError("tensor extent must be >= 1, got " + std::to_string(d));
      n *= static_cast<std::size_t>(d);
    }
    data_.assign(n, T(0));
  }

  Tensor(std::initializer_list<int> shape) : Tensor(std::vector<int>(shape)) {}

  static Tensor full(std::vector<int> shape, T value) {
    Tensor t(std::move(shape));
    for (auto& v : t.data_) v = value;
    return t;
  }

  const std::vector<int>& shape() const { return shape_; }
  int extent(int axis) const { return shape_[static_cast<std::size_t>(axis)]; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::size_t size() const { return data_.size(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  T& operator[](std::size_t flat) { return data_[flat]; }
  const T& operator[](std::size_t flat) const { return data_[flat]; }

  T& operator()(int i) { return data_[static_cast<std::size_t>(i)]; }
  const T& operator()(int i) const { return data_[static_cast<std::size_t>(i)]; }

  T& operator()(int i, int j) { return data_[flat2(i, j)]; }
  const T& operator()(int i, int j) const { return data_[flat2(i, j)]; }

  T& operator()(int i, int j, int k) { return data_[flat3(i, j, k)]; }
  const T& operator()(int i, int j, int k) const { return data_[flat3(i, j, k)]; }

  T& operator()(int i, int j, int k, int l) { return data_[flat4(i, j, k, l)]; }
  const T& operator()(int i, int j, int k, int l) const { return data_[flat4(i, j, k, l)]; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::size_t flat2(int i, int j) const {
    return (static_cast<std::size_t>(i) * shape_[1]) + static_cast<std::size_t>(j);
  }
  std::size_t flat3(int i, int j, int k) const {
    return ((static_cast<std::size_t>(i) * shape_[1]) + static_cast<std::size_t>(j)) * shape_[2] +
           static_cast<std::size_t>(k);
  }
  std::size_t flat4(int i, int j, int k, int l) const {
    return (((static_cast<std::size_t>(i) * shape_[1]) + static_cast<std::size_t>(j)) * shape_[2] +
            static_cast<std::size_t>(k)) *
               shape_[3] +
           static_cast<std::size_t>(l);
  }

  std::vector<int> shape_;
  std::vector<T> data_;
};

inline std::string shape_string(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace ccnet

// Copyright 2026 The CCGVAE Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CCGVAE_TENSOR_H_
#define CCGVAE_TENSOR_H_

#include <Eigen/Core>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccgvae {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dense row-major matrix. Vectors are 1 x n rows and scalars are 1 x 1, so
// every tensor in the models is rank 2.
template <typename T>
class BasicTensor {
 public:
  using Scalar = T;
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MapType = Eigen::Map<Matrix>;
  using ConstMapType = Eigen::Map<const Matrix>;

  BasicTensor() = default;
  BasicTensor(int rows, int cols, T fill = T(0))
      : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw ShapeError("negative tensor dimension");
    data_.assign(static_cast<std::size_t>(rows) * cols, fill);
  }
  BasicTensor(int rows, int cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows < 0 || cols < 0 ||
        data_.size() != static_cast<std::size_t>(rows) * cols) {
      throw ShapeError("tensor data length does not match shape " +
                       std::to_string(rows) + "x" + std::to_string(cols));
    }
  }

  static BasicTensor zeros(int rows, int cols) { return {rows, cols}; }
  static BasicTensor row(std::vector<T> values) {
    const int n = static_cast<int>(values.size());
    return {1, n, std::move(values)};
  }
  static BasicTensor scalar(T v) { return {1, 1, v}; }
  static BasicTensor identity(int n) {
    BasicTensor t(n, n);
    for (int i = 0; i < n; ++i) t(i, i) = T(1);
    return t;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::vector<int> shape() const { return {rows_, cols_}; }
  std::size_t size() const { return data_.size(); }
  bool sameShape(const BasicTensor& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  T operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  T operator[](std::size_t i) const { return data_[i]; }
  T item() const {
    if (data_.size() != 1) throw ShapeError("item() on a non-scalar tensor");
    return data_[0];
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  MapType mat() { return MapType(data_.data(), rows_, cols_); }
  ConstMapType mat() const { return ConstMapType(data_.data(), rows_, cols_); }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  std::string shapeString() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  template <typename U>
  BasicTensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return BasicTensor<U>(rows_, cols_, std::move(out));
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;

}  // namespace ccgvae

#endif  // CCGVAE_TENSOR_H_

/* Copyright 2026 The DICM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef DICM_NUMERICS_TENSOR_H_
#define DICM_NUMERICS_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace dicm::numerics {

// Dense row-major tensor of 64-bit floats. Scalars are shape {1}; vectors are
// rank 1; matrices are rank 2 with shape {rows, cols}.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<size_t> shape);
  Tensor(std::vector<size_t> shape, std::vector<double> data);

  static Tensor Scalar(double v) { return Tensor({1}, {v}); }
  static Tensor Vector(std::vector<double> v);
  static Tensor Vector(std::initializer_list<double> v) {
    return Vector(std::vector<double>(v));
  }
  static Tensor Zeros(size_t n) { return Tensor({n}); }
  static Tensor Matrix(size_t rows, size_t cols, std::vector<double> data);
  static Tensor Identity(size_t n);

  const std::vector<size_t>& shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool is_scalar() const { return data_.size() == 1 && shape_.size() <= 1; }
  size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }
  double& at(size_t r, size_t c) { return data_[r * cols() + c]; }
  double at(size_t r, size_t c) const { return data_[r * cols() + c]; }

  std::span<double> row(size_t r) {
    return std::span<double>(data_).subspan(r * cols(), cols());
  }
  std::span<const double> row(size_t r) const {
    return std::span<const double>(data_).subspan(r * cols(), cols());
  }

  double item() const;  // value of a scalar
  bool AllFinite() const;
  void SetZero();
  void Fill(double v);
  void AddInPlace(const Tensor& other);
  void ScaleInPlace(double s);
  bool SameShape(const Tensor& other) const { return shape_ == other.shape_; }

  std::string ShapeString() const;

 private:
  std::vector<size_t> shape_;
  std::vector<double> data_;
};

std::string ShapeString(const std::vector<size_t>& shape);

// Exact bitwise comparison of shape and every element.
bool BitEqual(const Tensor& a, const Tensor& b);

double MaxAbsDiff(const Tensor& a, const Tensor& b);

}  // namespace dicm::numerics

#endif  // DICM_NUMERICS_TENSOR_H_

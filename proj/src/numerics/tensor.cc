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

#include "dicm/numerics/tensor.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>

#include "dicm/common/error.h"

namespace dicm::numerics {

namespace {

size_t Product(const std::vector<size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), size_t{1},
                         std::multiplies<size_t>());
}

}  // namespace

std::string ShapeString(const std::vector<size_t>& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(std::vector<size_t> shape)
    : shape_(std::move(shape)), data_(Product(shape_), 0.0) {}

Tensor::Tensor(std::vector<size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (Product(shape_) != data_.size()) {
    throw DimensionError("tensor shape " + dicm::numerics::ShapeString(shape_) +
                         " does not match " + std::to_string(data_.size()) +
                         " elements");
  }
}

Tensor Tensor::Vector(std::vector<double> v) {
  size_t n = v.size();
  return Tensor({n}, std::move(v));
}

Tensor Tensor::Matrix(size_t rows, size_t cols, std::vector<double> data) {
  return Tensor({rows, cols}, std::move(data));
}

Tensor Tensor::Identity(size_t n) {
  Tensor t({n, n});
  for (size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

double Tensor::item() const {
  if (!is_scalar()) {
    throw ContractError("item() on non-scalar tensor " + ShapeString());
  }
  return data_[0];
}

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tensor::SetZero() { std::fill(data_.begin(), data_.end(), 0.0); }

void Tensor::Fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::AddInPlace(const Tensor& other) {
  if (other.size() != size()) {
    throw DimensionError("cannot add " + other.ShapeString() + " into " +
                         ShapeString());
  }
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
}

void Tensor::ScaleInPlace(double s) {
  for (double& v : data_) v *= s;
}

std::string Tensor::ShapeString() const {
  return dicm::numerics::ShapeString(shape_);
}

bool BitEqual(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  return a.size() == 0 ||
         std::memcmp(a.data().data(), b.data().data(),
                     a.size() * sizeof(double)) == 0;
}

double MaxAbsDiff(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) {
    throw DimensionError("MaxAbsDiff shape mismatch " + a.ShapeString() +
                         " vs " + b.ShapeString());
  }
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace dicm::numerics

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

#include "dicm/numerics/ops.h"

#include <algorithm>
#include <cmath>

#include "dicm/common/error.h"

namespace dicm::numerics {

Tensor Linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  const bool batched = x.rank() == 2;
  const size_t in = batched ? x.cols() : x.size();
  if (weight.rank() != 2 || (x.rank() != 1 && !batched) || bias.rank() != 1 ||
      weight.cols() != in || weight.rows() != bias.size()) {
    throw DimensionError("linear: weight " + weight.ShapeString() +
                         " incompatible with input " + x.ShapeString() +
                         " and bias " + bias.ShapeString());
  }
  const size_t m = weight.rows();
  const size_t n = weight.cols();
  const size_t batch = batched ? x.rows() : 1;
  Tensor y = batched ? Tensor({batch, m}) : bias;
  const double* w = weight.data().data();
  for (size_t r = 0; r < batch; ++r) {
    const double* xp = x.data().data() + r * n;
    double* yp = y.data().data() + r * m;
    for (size_t i = 0; i < m; ++i) {
      const double* wr = w + i * n;
      double acc = 0.0;
      for (size_t j = 0; j < n; ++j) acc += wr[j] * xp[j];
      if (batched) {
        yp[i] = bias[i] + acc;
      } else {
        yp[i] += acc;
      }
    }
  }
  return y;
}

Tensor PRelu(const Tensor& x, const Tensor& alpha) {
  const size_t period = PReluPeriod(x, alpha);
  Tensor y = x;
  for (size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0.0) y[i] *= alpha[i % period];
  }
  return y;
}

size_t PReluPeriod(const Tensor& x, const Tensor& alpha) {
  if (alpha.size() == 1) return 1;
  if (alpha.size() == x.size()) return x.size();
  if (x.rank() == 2 && alpha.size() == x.cols()) return x.cols();
  throw DimensionError("prelu: slope " + alpha.ShapeString() +
                       " incompatible with input " + x.ShapeString());
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double SigmoidCrossEntropy(double logit, double label) {
  return std::max(logit, 0.0) - logit * label +
         std::log1p(std::exp(-std::abs(logit)));
}

Tensor Softmax(const Tensor& v) {
  if (v.size() == 0) throw DimensionError("softmax of empty vector");
  double mx = *std::max_element(v.data().begin(), v.data().end());
  Tensor y(v.shape());
  double total = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    y[i] = std::exp(v[i] - mx);
    total += y[i];
  }
  for (size_t i = 0; i < v.size(); ++i) y[i] /= total;
  return y;
}

Tensor GatherSum(const Tensor& table, std::span<const uint64_t> rows) {
  if (table.rank() != 2) {
    throw DimensionError("gather: table must be a matrix, got " +
                         table.ShapeString());
  }
  Tensor out({table.cols()});
  for (uint64_t r : rows) {
    if (r >= table.rows()) {
      throw OutOfVocabularyError("id " + std::to_string(r) +
                                 " out of vocabulary of size " +
                                 std::to_string(table.rows()));
    }
    auto src = table.row(static_cast<size_t>(r));
    for (size_t j = 0; j < out.size(); ++j) out[j] += src[j];
  }
  return out;
}

double Dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) {
    throw DimensionError("dot: " + a.ShapeString() + " vs " + b.ShapeString());
  }
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace dicm::numerics

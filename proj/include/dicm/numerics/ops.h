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

#ifndef DICM_NUMERICS_OPS_H_
#define DICM_NUMERICS_OPS_H_

#include <cstdint>
#include <span>

#include "dicm/numerics/tensor.h"

namespace dicm::numerics {

// Forward kernels. Graph nodes evaluate through these same functions, so a
// value computed outside a graph is bit-identical to the recorded one.

// W * x + b for x[n], W[m x n], b[m]. A matrix input X[r x n] is treated as
// r independent rows and yields [r x m].
Tensor Linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

// max(0, x) + alpha * min(0, x). alpha has one slope per element, one per
// column of a matrix input, or a single shared slope.
Tensor PRelu(const Tensor& x, const Tensor& alpha);

// Index period of the slope vector: element i uses alpha[i % period].
size_t PReluPeriod(const Tensor& x, const Tensor& alpha);

double Sigmoid(double z);

// max(z, 0) - z * y + log(1 + exp(-|z|)).
double SigmoidCrossEntropy(double logit, double label);

Tensor Softmax(const Tensor& v);

// Sum of the listed rows of a [V x d] table.
Tensor GatherSum(const Tensor& table, std::span<const uint64_t> rows);

double Dot(const Tensor& a, const Tensor& b);

}  // namespace dicm::numerics

#endif  // DICM_NUMERICS_OPS_H_

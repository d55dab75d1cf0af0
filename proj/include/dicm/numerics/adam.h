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

#ifndef DICM_NUMERICS_ADAM_H_
#define DICM_NUMERICS_ADAM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "dicm/numerics/tensor.h"

namespace dicm::numerics {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moments for one parameter tensor. Dense parameters keep a single step
// counter; row-sparse tables (ID embeddings) keep one counter per row so a
// row's bias correction only advances when the row is updated.
struct AdamState {
  Tensor m;
  Tensor v;
  std::vector<int64_t> steps;

  static AdamState Dense(const Tensor& param);
  static AdamState RowSparse(const Tensor& table);
};

// One bias-corrected Adam update on a flat slice. |step| is the 1-based step
// index after incrementing.
void AdamUpdate(std::span<double> param, std::span<const double> grad,
                std::span<double> m, std::span<double> v, int64_t step,
                double lr, const AdamConfig& config);

// Dense step. A non-finite gradient throws NonFiniteError and leaves both the
// parameter and the state untouched.
void AdamStep(Tensor& param, const Tensor& grad, AdamState& state, double lr,
              const AdamConfig& config = {});

// Row-sparse step: updates only |rows| of |table|; |grads| holds one gradient
// row per listed row id, in order.
void AdamStepRows(Tensor& table, std::span<const uint64_t> rows,
                  const Tensor& grads, AdamState& state, double lr,
                  const AdamConfig& config = {});

// lr0 * decay^floor(iteration / interval).
struct LrSchedule {
  double initial = 0.001;
  double decay = 0.9;
  int64_t interval = 24000;

  double At(int64_t iteration) const;
};

}  // namespace dicm::numerics

#endif  // DICM_NUMERICS_ADAM_H_

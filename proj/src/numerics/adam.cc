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

#include "dicm/numerics/adam.h"

#include <cmath>

#include "dicm/common/error.h"

namespace dicm::numerics {

AdamState AdamState::Dense(const Tensor& param) {
  return AdamState{Tensor(param.shape()), Tensor(param.shape()), {0}};
}

AdamState AdamState::RowSparse(const Tensor& table) {
  if (table.rank() != 2) {
    throw DimensionError("row-sparse Adam state needs a matrix, got " +
                         table.ShapeString());
  }
  return AdamState{Tensor(table.shape()), Tensor(table.shape()),
                   std::vector<int64_t>(table.rows(), 0)};
}

void AdamUpdate(std::span<double> param, std::span<const double> grad,
                std::span<double> m, std::span<double> v, int64_t step,
                double lr, const AdamConfig& c) {
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(step));
  for (size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    param[i] -= lr * mhat / (std::sqrt(vhat) + c.epsilon);
  }
}

void AdamStep(Tensor& param, const Tensor& grad, AdamState& state, double lr,
              const AdamConfig& config) {
  if (!param.SameShape(grad) || !param.SameShape(state.m) ||
      !param.SameShape(state.v) || state.steps.size() != 1) {
    throw DimensionError("adam: parameter " + param.ShapeString() +
                         ", gradient " + grad.ShapeString() + ", moments " +
                         state.m.ShapeString());
  }
  if (!grad.AllFinite()) throw NonFiniteError("adam: non-finite gradient");
  const int64_t step = ++state.steps[0];
  AdamUpdate(param.data(), grad.data(), state.m.data(), state.v.data(), step,
             lr, config);
}

void AdamStepRows(Tensor& table, std::span<const uint64_t> rows,
                  const Tensor& grads, AdamState& state, double lr,
                  const AdamConfig& config) {
  if (table.rank() != 2 || !table.SameShape(state.m) ||
      state.steps.size() != table.rows() || grads.size() != rows.size() * table.cols()) {
    throw DimensionError("sparse adam: table " + table.ShapeString() +
                         ", gradients " + grads.ShapeString() + " for " +
                         std::to_string(rows.size()) + " rows");
  }
  if (!grads.AllFinite()) throw NonFiniteError("adam: non-finite gradient");
  for (uint64_t r : rows) {
    if (r >= table.rows()) {
      throw OutOfVocabularyError("adam row " + std::to_string(r) +
                                 " outside table of " +
                                 std::to_string(table.rows()) + " rows");
    }
  }
  const size_t d = table.cols();
  for (size_t k = 0; k < rows.size(); ++k) {
    const size_t r = static_cast<size_t>(rows[k]);
    const int64_t step = ++state.steps[r];
    AdamUpdate(table.row(r), grads.data().subspan(k * d, d), state.m.row(r),
               state.v.row(r), step, lr, config);
  }
}

double LrSchedule::At(int64_t iteration) const {
  if (iteration < 0) throw ContractError("negative iteration");
  if (interval <= 0) throw ConfigError("lr decay interval must be positive");
  return initial * std::pow(decay, static_cast<double>(iteration / interval));
}

}  // namespace dicm::numerics

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

#include "dicm/ams/reference_trainer.h"

#include <algorithm>

#include "dicm/common/error.h"

namespace dicm::ams {

using numerics::Binder;
using numerics::Graph;
using numerics::Tensor;

std::vector<std::vector<uint64_t>> TouchedRows(const model::FeatureSchema& schema,
                                               std::span<const data::Sample> batch) {
  std::vector<std::vector<uint64_t>> rows(schema.fields.size());
  for (const auto& s : batch) {
    for (size_t f = 0; f < rows.size(); ++f) {
      const auto ids = schema.FieldIds(f, s);
      rows[f].insert(rows[f].end(), ids.begin(), ids.end());
    }
  }
  for (auto& r : rows) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
  }
  return rows;
}

ReferenceTrainer::ReferenceTrainer(model::DicmModel model, const data::ImageFeatureStore& store,
                                   OptimizerConfig config, OptimizerState state)
    : model_(std::move(model)),
      extractor_(model::MakeExtractor(model_.config())),
      store_(store),
      config_(config),
      state_(std::move(state)) {
  if (state_.states.empty()) state_ = OptimizerState::Fresh(model_);
  if (!state_.Matches(model_)) throw ContractError("optimizer state does not match model");
}

double ReferenceTrainer::Step(std::span<const data::Sample> batch) {
  Graph g;
  Binder b;
  model_.BindAll(g, b, true);
  model::TableInputs inputs(model_, b, extractor_, store_);
  const auto loss =
      model::BuildBatchLoss(g, model_, b, inputs, batch, 1.0 / static_cast<double>(batch.size()));
  g.Backward(loss.loss);

  auto groups = model_.Groups();
  std::vector<std::vector<Tensor>> grads(groups.size());
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    for (const auto& p : groups[gi].params) {
      grads[gi].push_back(g.Grad(b(*p.tensor)));
      if (!grads[gi].back().AllFinite()) {
        throw NonFiniteError("non-finite gradient for " + p.name);
      }
    }
  }
  const double lr = config_.lr.At(iteration_);
  const auto touched = TouchedRows(model_.schema(), batch);
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    for (size_t pi = 0; pi < groups[gi].params.size(); ++pi) {
      Tensor& param = *groups[gi].params[pi].tensor;
      if (groups[gi].name == model::kIdGroup) {
        const auto& rows = touched[pi];
        const size_t d = param.cols();
        Tensor row_grads({rows.size(), d});
        for (size_t k = 0; k < rows.size(); ++k) {
          auto src = grads[gi][pi].row(rows[k]);
          std::copy(src.begin(), src.end(), row_grads.row(k).begin());
        }
        numerics::AdamStepRows(param, rows, row_grads, state_.states[gi][pi], lr, config_.adam);
      } else {
        numerics::AdamStep(param, grads[gi][pi], state_.states[gi][pi], lr, config_.adam);
      }
    }
  }
  ++iteration_;
  return g.Value(loss.loss).item();
}

}  // namespace dicm::ams

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

#ifndef DICM_AMS_REFERENCE_TRAINER_H_
#define DICM_AMS_REFERENCE_TRAINER_H_

#include <span>

#include "dicm/ams/optimizer.h"
#include "dicm/data/image_store.h"
#include "dicm/data/sample.h"
#include "dicm/model/dicm_model.h"

namespace dicm::ams {

// Single-process trainer: one graph over the whole batch, mean sigmoid
// cross-entropy, dense Adam on dense tensors and row-sparse Adam on the ID
// rows referenced by the batch. The oracle for the distributed runtime.
class ReferenceTrainer {
 public:
  ReferenceTrainer(model::DicmModel model, const data::ImageFeatureStore& store,
                   OptimizerConfig config, OptimizerState state = {});

  // One iteration; returns the batch mean loss before the update.
  double Step(std::span<const data::Sample> batch);

  const model::DicmModel& model() const { return model_; }
  model::DicmModel& model() { return model_; }
  const OptimizerState& optimizer() const { return state_; }
  int64_t iteration() const { return iteration_; }

 private:
  model::DicmModel model_;
  model::FixedExtractor extractor_;
  const data::ImageFeatureStore& store_;
  OptimizerConfig config_;
  OptimizerState state_;
  int64_t iteration_ = 0;
};

// Sorted distinct rows of every field referenced by |batch|.
std::vector<std::vector<uint64_t>> TouchedRows(const model::FeatureSchema& schema,
                                               std::span<const data::Sample> batch);

}  // namespace dicm::ams

#endif  // DICM_AMS_REFERENCE_TRAINER_H_

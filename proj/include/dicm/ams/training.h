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

#ifndef DICM_AMS_TRAINING_H_
#define DICM_AMS_TRAINING_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dicm/ams/cluster.h"
#include "dicm/ams/optimizer.h"
#include "dicm/data/image_store.h"
#include "dicm/data/sample.h"
#include "dicm/model/dicm_model.h"

namespace dicm::ams {

struct TrainOptions {
  size_t batch_size = 256;  // union batch for the reference trainer
  size_t epochs = 1;
  uint64_t seed = 1;
  bool shuffle = true;
  uint64_t max_iterations = 0;  // 0 = no limit
};

struct TrainLogRow {
  uint64_t iteration = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  model::DicmModel model;
  OptimizerState optimizer;
  std::vector<TrainLogRow> log;
  TrafficMeter meter;  // empty for the reference trainer
};

// Header: iteration,loss,lr
std::string LogCsv(std::span<const TrainLogRow> log);

TrainResult TrainReference(const model::DicmModel& initial, const data::ImageFeatureStore& store,
                           std::span<const data::Sample> train, const OptimizerConfig& optimizer,
                           const TrainOptions& options,
                           const OptimizerState* initial_state = nullptr);

// Union batch = workers * per_worker_batch; options.batch_size is ignored.
TrainResult TrainCluster(const ClusterConfig& cluster, const model::DicmModel& initial,
                         const data::ImageFeatureStore& store,
                         std::span<const data::Sample> train, const OptimizerConfig& optimizer,
                         const TrainOptions& options,
                         const OptimizerState* initial_state = nullptr);

}  // namespace dicm::ams

#endif  // DICM_AMS_TRAINING_H_

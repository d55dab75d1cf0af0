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

#ifndef DICM_AMS_BATCH_STATS_H_
#define DICM_AMS_BATCH_STATS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dicm/ams/message.h"
#include "dicm/data/sample.h"
#include "dicm/model/config.h"

namespace dicm::ams {

// ams: servers host raw features and the image embedding model and exchange
//      embeddings and their gradients with workers.
// ps-store-in-server: servers host raw features only and ship them to workers,
//      which run the image model themselves.
// store-in-worker: every worker keeps a replica of the raw features.
enum class Mode { kAms, kStoreInServer, kStoreInWorker };

std::string ModeName(Mode mode);
Mode ModeFromName(const std::string& name);  // ConfigError

// Sorted distinct image ids the model reads for |batch|: ad images and the
// b_max most recent behavior images, per the config's use flags.
std::vector<uint64_t> BatchImageIds(const model::ModelConfig& config,
                                    std::span<const data::Sample> batch);
// Sorted distinct ID-embedding rows referenced by |batch|.
std::vector<IdKey> BatchIdKeys(const model::FeatureSchema& schema,
                               std::span<const data::Sample> batch);

// Bytes a worker loads for |batch|: the grouped sample records, plus the raw
// feature vector of every image reference in store-in-worker mode.
struct SampleLoad {
  uint64_t bytes = 0;
  uint64_t elements = 0;
  uint64_t image_refs = 0;
};
SampleLoad SampleLoadOf(const model::ModelConfig& config, std::span<const data::Sample> batch,
                        Mode mode);

}  // namespace dicm::ams

#endif  // DICM_AMS_BATCH_STATS_H_

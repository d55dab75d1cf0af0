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

#include "dicm/ams/batch_stats.h"

#include <algorithm>

#include "dicm/common/error.h"

namespace dicm::ams {

std::string ModeName(Mode mode) {
  switch (mode) {
    case Mode::kAms: return "ams";
    case Mode::kStoreInServer: return "ps-store-in-server";
    case Mode::kStoreInWorker: return "store-in-worker";
  }
  return "";
}

Mode ModeFromName(const std::string& name) {
  for (Mode m : {Mode::kAms, Mode::kStoreInServer, Mode::kStoreInWorker}) {
    if (ModeName(m) == name) return m;
  }
  throw ConfigError("unknown mode '" + name +
                    "' (expected ams, ps-store-in-server or store-in-worker)");
}

std::vector<uint64_t> BatchImageIds(const model::ModelConfig& config,
                                    std::span<const data::Sample> batch) {
  std::vector<uint64_t> ids;
  for (const auto& s : batch) {
    if (config.use_ad_image) ids.push_back(s.ad_image);
    if (config.use_behavior_images) {
      const auto recent =
          data::FilterBehaviors<uint64_t>(s.behavior_images, config.schema.b_max);
      ids.insert(ids.end(), recent.begin(), recent.end());
    }
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<IdKey> BatchIdKeys(const model::FeatureSchema& schema,
                               std::span<const data::Sample> batch) {
  std::vector<IdKey> keys;
  for (const auto& s : batch) {
    for (size_t f = 0; f < schema.fields.size(); ++f) {
      for (uint64_t id : schema.FieldIds(f, s)) keys.push_back({static_cast<uint32_t>(f), id});
    }
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

SampleLoad SampleLoadOf(const model::ModelConfig& config, std::span<const data::Sample> batch,
                        Mode mode) {
  const auto groups = data::GroupCommonFeatures(batch);
  SampleLoad load;
  load.bytes = data::GroupedBytes(groups);
  for (const auto& g : groups) {
    if (config.use_behavior_images) {
      load.image_refs += std::min(g.behavior_images.size(), config.schema.b_max);
    }
    if (config.use_ad_image) load.image_refs += g.impressions.size();
  }
  if (mode == Mode::kStoreInWorker) {
    load.bytes += load.image_refs * config.schema.d_raw * data::kBytesPerElement;
  }
  load.elements = load.bytes / data::kBytesPerElement;
  return load;
}

}  // namespace dicm::ams

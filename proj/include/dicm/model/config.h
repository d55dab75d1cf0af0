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

#ifndef DICM_MODEL_CONFIG_H_
#define DICM_MODEL_CONFIG_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dicm/data/sample.h"
#include "dicm/data/synthetic.h"

namespace dicm::model {

enum class FieldKind { kOneHot, kMultiHot };

// Which sample attribute feeds a field.
enum class FieldSlot {
  kUser,
  kScenario,
  kAd,
  kCategory,
  kAdImage,
  kBehaviorItems,
  kBehaviorImages,
};

struct FieldSpec {
  std::string name;
  uint64_t vocab = 1;
  FieldKind kind = FieldKind::kOneHot;
  FieldSlot slot = FieldSlot::kUser;
};

// Ad-side fields describe the candidate ad; the rest describe the user and
// context.
bool IsAdSide(FieldSlot slot);

struct FeatureSchema {
  std::vector<FieldSpec> fields;
  size_t d_id = 12;
  size_t d_raw = 64;
  size_t d_img = 12;
  size_t b_max = 32;

  void Validate() const;  // SchemaError

  // Ids of field |i| for |s|. Multi-hot behavior fields keep the most recent
  // b_max entries.
  std::vector<uint64_t> FieldIds(size_t i, const data::Sample& s) const;
  // Throws SchemaError unless every id is inside its vocabulary.
  void CheckSample(const data::Sample& s) const;
};

// One field per sample attribute, sized from the dataset vocabulary. Without
// |image_id_fields| the ad and behavior image ids feed only the image path.
FeatureSchema DefaultSchema(const data::DatasetMeta& meta, bool image_id_fields = true);

enum class AggregatorKind { kConcat, kMax, kSum, kAttentive, kMultiQuery };

std::string AggregatorName(AggregatorKind kind);
AggregatorKind AggregatorFromName(const std::string& name);  // ConfigError

struct AggregatorSpec {
  AggregatorKind kind = AggregatorKind::kAttentive;
  size_t attention_hidden = 32;
  bool normalize = true;  // softmax over scores; raw scores otherwise
};

enum class ModelKind { kCtr, kPrerank };

struct ModelConfig {
  FeatureSchema schema;
  ModelKind kind = ModelKind::kCtr;
  AggregatorSpec aggregator;
  bool use_ad_image = true;
  bool use_behavior_images = true;
  std::vector<size_t> image_hidden;  // empty: DefaultImageHidden(d_raw)
  std::vector<size_t> mlp_hidden = {128, 64};
  std::vector<size_t> user_tower = {64, 16};
  std::vector<size_t> ad_tower = {64, 16};
  uint64_t extractor_seed = 7;
  size_t latent_dim = 8;
  uint64_t init_seed = 1;

  void Validate() const;  // ConfigError / SchemaError
  bool uses_images() const { return use_ad_image || use_behavior_images; }
  std::vector<size_t> ImageHidden() const;
};

// D_raw/16 and D_raw/64 with floors of 32 and 16; 4096 gives 256 and 64.
std::vector<size_t> DefaultImageHidden(size_t d_raw);

std::string ModelConfigToJson(const ModelConfig& config);
ModelConfig ModelConfigFromJson(const std::string& text);  // FormatError

}  // namespace dicm::model

#endif  // DICM_MODEL_CONFIG_H_

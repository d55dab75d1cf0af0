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

#ifndef DICM_DATA_SYNTHETIC_H_
#define DICM_DATA_SYNTHETIC_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dicm/data/image_store.h"
#include "dicm/data/sample.h"

namespace dicm::data {

// Synthetic CTR logs with a tunable visual signal.
//
// Every item has an ID latent (category center plus noise) and an image with
// its own latent; every user has an ID latent and a visual preference. The
// click logit of (user, item) is
//   bias + id_coef * <u, a_item> / sqrt(k) + visual_coef * <w, v_image> / sqrt(k)
//        + noise * N(0, 1)
// with bias solved so the mean click probability equals base_ctr. The visual
// term is only observable through image latents. Behaviors are past clicks
// sampled by Gumbel top-L on the same two affinities, so behavior images
// reveal the user's visual preference.
struct SyntheticConfig {
  uint64_t users = 400;
  uint64_t items = 400;
  uint64_t images = 400;  // items map onto images round-robin
  uint64_t categories = 16;
  uint64_t scenarios = 4;
  size_t latent_dim = 8;
  double id_coef = 1.0;
  double visual_coef = 2.0;
  double noise = 0.5;
  double base_ctr = 0.25;
  double behavior_sharpness = 2.0;
  size_t behaviors_min = 40;
  size_t behavior_cap = 200;   // history length cap before filtering
  size_t max_behaviors = 32;   // kept after recency filtering
  uint32_t days = 3;
  uint32_t test_days = 1;
  size_t impressions_per_user_day = 10;
  // Share of test impressions whose ad is a fresh item (new ad id, new image
  // id) never seen in training.
  double cold_start_fraction = 0.2;
  uint64_t seed = 1;

  void Validate() const;  // ConfigError
};

struct DatasetMeta {
  uint64_t users = 0;
  uint64_t items = 0;        // warm + cold
  uint64_t warm_items = 0;
  uint64_t images = 0;       // warm + cold
  uint64_t warm_images = 0;
  uint64_t categories = 0;
  uint64_t scenarios = 0;
  size_t latent_dim = 0;
  uint32_t days = 0;
  uint32_t test_days = 0;

  bool operator==(const DatasetMeta&) const = default;
};

// Generator latents, row-major k-wide.
struct GroundTruth {
  size_t dim = 0;
  std::vector<float> user_latent;
  std::vector<float> user_visual;
  std::vector<float> item_latent;
  std::vector<uint64_t> item_category;
  std::vector<uint64_t> item_image;
  double bias = 0.0;
};

struct Dataset {
  SyntheticConfig config;
  DatasetMeta meta;
  std::vector<Sample> train;
  std::vector<Sample> test;
  ImageFeatureStore images;
  GroundTruth truth;
};

Dataset Generate(const SyntheticConfig& config);

// Noise-free part of the click logit (without bias) under the ground truth.
double TrueAffinity(const SyntheticConfig& config, const GroundTruth& truth,
                    const ImageFeatureStore& images, const Sample& s);

}  // namespace dicm::data

#endif  // DICM_DATA_SYNTHETIC_H_

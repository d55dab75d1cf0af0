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

#ifndef DICM_MODEL_EXTRACTOR_H_
#define DICM_MODEL_EXTRACTOR_H_

#include <cstdint>
#include <span>

#include "dicm/data/image_store.h"
#include "dicm/numerics/tensor.h"

namespace dicm::model {

// Frozen stand-in for a pretrained convolutional trunk:
//   raw = tanh(P * latent / sqrt(k)),  P ~ N(0, 1) of shape [d_raw x k]
// drawn once from |seed|. Output depends only on (seed, latent).
class FixedExtractor {
 public:
  FixedExtractor(uint64_t seed, size_t latent_dim, size_t d_raw);

  size_t latent_dim() const { return latent_dim_; }
  size_t d_raw() const { return d_raw_; }

  numerics::Tensor Extract(std::span<const float> latent) const;  // DimensionError
  // UnknownImageError for ids missing from |store|.
  numerics::Tensor Extract(const data::ImageFeatureStore& store, uint64_t image_id) const;

 private:
  size_t latent_dim_;
  size_t d_raw_;
  std::vector<double> projection_;
};

}  // namespace dicm::model

#endif  // DICM_MODEL_EXTRACTOR_H_

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

#include "dicm/model/extractor.h"

#include <cmath>

#include "dicm/common/error.h"
#include "dicm/numerics/rng.h"

namespace dicm::model {

FixedExtractor::FixedExtractor(uint64_t seed, size_t latent_dim, size_t d_raw)
    : latent_dim_(latent_dim), d_raw_(d_raw), projection_(latent_dim * d_raw) {
  numerics::Rng rng(numerics::DeriveSeed(seed, "fixed-extractor"));
  for (double& p : projection_) p = rng.Normal();
}

numerics::Tensor FixedExtractor::Extract(std::span<const float> latent) const {
  if (latent.size() != latent_dim_) {
    throw DimensionError("extractor expects latent width " + std::to_string(latent_dim_) +
                         ", got " + std::to_string(latent.size()));
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(latent_dim_));
  numerics::Tensor out({d_raw_});
  for (size_t i = 0; i < d_raw_; ++i) {
    const double* p = projection_.data() + i * latent_dim_;
    double acc = 0.0;
    for (size_t j = 0; j < latent_dim_; ++j) acc += p[j] * static_cast<double>(latent[j]);
    out[i] = std::tanh(acc * scale);
  }
  return out;
}

numerics::Tensor FixedExtractor::Extract(const data::ImageFeatureStore& store,
                                         uint64_t image_id) const {
  return Extract(store.Latent(image_id));
}

}  // namespace dicm::model

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

#ifndef DICM_DEPLOYMENT_INFERENCE_H_
#define DICM_DEPLOYMENT_INFERENCE_H_

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dicm/data/image_store.h"
#include "dicm/data/sample.h"
#include "dicm/model/dicm_model.h"

namespace dicm::deployment {

// Image id -> precomputed image embedding. Saved as a float64 binary matrix
// with one row per image: column 0 holds the id, the rest the embedding.
class InferenceTable {
 public:
  InferenceTable() = default;
  explicit InferenceTable(size_t dim) : dim_(dim) {}

  // Embeds every id in |ids| with the model's image part.
  static InferenceTable Export(const model::DicmModel& model,
                               const model::FixedExtractor& extractor,
                               const data::ImageFeatureStore& store,
                               std::span<const uint64_t> ids);

  size_t dim() const { return dim_; }
  size_t size() const { return ids_.size(); }
  const std::vector<uint64_t>& ids() const { return ids_; }
  bool Contains(uint64_t id) const { return index_.count(id) > 0; }
  std::span<const double> Embedding(uint64_t id) const;  // UnknownImageError

  void Insert(uint64_t id, std::span<const double> embedding);  // DimensionError

  void Save(const std::string& path) const;
  static InferenceTable Load(const std::string& path);

 private:
  size_t dim_ = 0;
  std::vector<uint64_t> ids_;
  std::vector<double> values_;
  std::unordered_map<uint64_t, size_t> index_;
};

// Key-value predictor: image embeddings come from the table; ids outside it
// take the cold path, embedding the raw feature with the exported image part.
class KvPredictor {
 public:
  KvPredictor(model::DicmModel model, InferenceTable table, const data::ImageFeatureStore& store);

  std::vector<double> Logits(std::span<const data::Sample> samples);
  std::vector<double> Probabilities(std::span<const data::Sample> samples);

  const InferenceTable& table() const { return table_; }
  uint64_t cold_lookups() const { return cold_; }

 private:
  model::DicmModel model_;
  InferenceTable table_;
  model::FixedExtractor extractor_;
  const data::ImageFeatureStore& store_;
  uint64_t cold_ = 0;
};

}  // namespace dicm::deployment

#endif  // DICM_DEPLOYMENT_INFERENCE_H_

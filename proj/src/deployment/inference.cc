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

#include "dicm/deployment/inference.h"

#include "dicm/common/bytes.h"
#include "dicm/common/error.h"
#include "dicm/numerics/ops.h"

namespace dicm::deployment {

using numerics::Tensor;

InferenceTable InferenceTable::Export(const model::DicmModel& model,
                                      const model::FixedExtractor& extractor,
                                      const data::ImageFeatureStore& store,
                                      std::span<const uint64_t> ids) {
  InferenceTable t(model.schema().d_img);
  for (uint64_t id : ids) {
    if (t.Contains(id)) continue;
    t.Insert(id, model.EmbedImageValue(extractor.Extract(store, id)).data());
  }
  return t;
}

std::span<const double> InferenceTable::Embedding(uint64_t id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw UnknownImageError("image id " + std::to_string(id) + " not in inference table");
  }
  return std::span<const double>(values_).subspan(it->second * dim_, dim_);
}

void InferenceTable::Insert(uint64_t id, std::span<const double> embedding) {
  if (embedding.size() != dim_) {
    throw DimensionError("embedding has " + std::to_string(embedding.size()) +
                         " values, table width is " + std::to_string(dim_));
  }
  auto [it, inserted] = index_.emplace(id, ids_.size());
  if (!inserted) {
    std::copy(embedding.begin(), embedding.end(), values_.begin() + it->second * dim_);
    return;
  }
  ids_.push_back(id);
  values_.insert(values_.end(), embedding.begin(), embedding.end());
}

void InferenceTable::Save(const std::string& path) const {
  std::vector<double> rows;
  rows.reserve(ids_.size() * (dim_ + 1));
  for (size_t i = 0; i < ids_.size(); ++i) {
    rows.push_back(static_cast<double>(ids_[i]));
    rows.insert(rows.end(), values_.begin() + i * dim_, values_.begin() + (i + 1) * dim_);
  }
  WriteFileBytes(path, data::EncodeMatrix(static_cast<uint32_t>(ids_.size()),
                                          static_cast<uint32_t>(dim_ + 1), rows));
}

InferenceTable InferenceTable::Load(const std::string& path) {
  data::MatrixHeader h;
  const auto rows = data::DecodeMatrixF64(ReadFileBytes(path), &h);
  if (h.cols < 2) throw FormatError(path + ": inference table needs an id and an embedding");
  InferenceTable t(h.cols - 1);
  for (size_t r = 0; r < h.rows; ++r) {
    const auto row = std::span<const double>(rows).subspan(r * h.cols, h.cols);
    t.Insert(static_cast<uint64_t>(row[0]), row.subspan(1));
  }
  return t;
}

namespace {

class KvInputs : public model::SampleInputs {
 public:
  KvInputs(const model::DicmModel& model, const numerics::Binder& params,
           const InferenceTable& table, const model::FixedExtractor& extractor,
           const data::ImageFeatureStore& store, uint64_t* cold)
      : model_(model), params_(params), table_(table), extractor_(extractor), store_(store),
        cold_(cold) {}

  numerics::Var Field(numerics::Graph& g, size_t field, std::span<const uint64_t> ids) override {
    if (ids.empty()) return g.Constant(Tensor({model_.schema().d_id}));
    return g.GatherSum(params_(model_.id_table(field)), ids);
  }

  numerics::Var Image(numerics::Graph& g, uint64_t id) override {
    auto it = cache_.find(id);
    if (it != cache_.end()) return it->second;
    Tensor e;
    if (table_.Contains(id)) {
      const auto row = table_.Embedding(id);
      e = Tensor::Vector(std::vector<double>(row.begin(), row.end()));
    } else {
      e = model_.EmbedImageValue(extractor_.Extract(store_, id));
      ++*cold_;
    }
    return cache_[id] = g.Constant(std::move(e));
  }

 private:
  const model::DicmModel& model_;
  const numerics::Binder& params_;
  const InferenceTable& table_;
  const model::FixedExtractor& extractor_;
  const data::ImageFeatureStore& store_;
  uint64_t* cold_;
  std::unordered_map<uint64_t, numerics::Var> cache_;
};

}  // namespace

KvPredictor::KvPredictor(model::DicmModel model, InferenceTable table,
                         const data::ImageFeatureStore& store)
    : model_(std::move(model)),
      table_(std::move(table)),
      extractor_(model::MakeExtractor(model_.config())),
      store_(store) {
  if (model_.config().uses_images() && table_.dim() != model_.schema().d_img) {
    throw DimensionError("inference table width " + std::to_string(table_.dim()) +
                         " does not match d_img " + std::to_string(model_.schema().d_img));
  }
}

std::vector<double> KvPredictor::Logits(std::span<const data::Sample> samples) {
  constexpr size_t kChunk = 512;
  std::vector<double> out;
  out.reserve(samples.size());
  for (size_t start = 0; start < samples.size(); start += kChunk) {
    numerics::Graph g;
    numerics::Binder b;
    for (const auto& group : {model::kIdGroup, model::kMlpGroup, model::kAttentionGroup}) {
      model_.Bind(g, b, group, false);
    }
    KvInputs inputs(model_, b, table_, extractor_, store_, &cold_);
    const size_t end = std::min(samples.size(), start + kChunk);
    for (size_t i = start; i < end; ++i) {
      out.push_back(g.Value(model_.Forward(g, b, inputs, samples[i])).item());
    }
  }
  return out;
}

std::vector<double> KvPredictor::Probabilities(std::span<const data::Sample> samples) {
  auto p = Logits(samples);
  for (double& v : p) v = numerics::Sigmoid(v);
  return p;
}

}  // namespace dicm::deployment

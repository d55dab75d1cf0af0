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

#ifndef DICM_MODEL_DICM_MODEL_H_
#define DICM_MODEL_DICM_MODEL_H_

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dicm/data/image_store.h"
#include "dicm/data/sample.h"
#include "dicm/model/config.h"
#include "dicm/model/extractor.h"
#include "dicm/numerics/graph.h"
#include "dicm/numerics/tensor.h"

namespace dicm::model {

using numerics::Binder;
using numerics::Graph;
using numerics::Tensor;
using numerics::Var;

inline constexpr char kIdGroup[] = "id-embeddings";
inline constexpr char kImageGroup[] = "image-embedding-model";
inline constexpr char kMlpGroup[] = "mlp";
inline constexpr char kAttentionGroup[] = "aggregator-attention";

// Fully connected layer; |alpha| is empty for a linear (output) layer.
struct Dense {
  Tensor w;
  Tensor b;
  Tensor alpha;
};

// Attention score net over [query || key]: the first-layer weight is split
// into its query block |wq| and key block |wk|.
struct AttentionNet {
  Tensor wq;
  Tensor wk;
  Tensor b1;
  Tensor alpha;
  Tensor w2;
  Tensor b2;
};

template <class T>
struct BasicParamRef {
  std::string name;
  T* tensor;
};
template <class T>
struct BasicParamGroup {
  std::string name;
  std::vector<BasicParamRef<T>> params;
};
using ParamRef = BasicParamRef<Tensor>;
using ParamGroup = BasicParamGroup<Tensor>;
using ConstParamGroup = BasicParamGroup<const Tensor>;

// Source of per-sample leaves. Implementations decide whether ID rows and
// image embeddings come from local tables or from values pulled off servers.
class SampleInputs {
 public:
  virtual ~SampleInputs() = default;
  // Embedding of field |field| for |ids| (sum of rows; zeros when empty).
  virtual Var Field(Graph& g, size_t field, std::span<const uint64_t> ids) = 0;
  // Image embedding of |image_id|.
  virtual Var Image(Graph& g, uint64_t image_id) = 0;
};

class DicmModel {
 public:
  explicit DicmModel(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  const FeatureSchema& schema() const { return config_.schema; }

  // Groups in fixed order: id-embeddings, image-embedding-model, mlp,
  // aggregator-attention. Groups may be empty (e.g. no images).
  std::vector<ParamGroup> Groups();
  std::vector<ConstParamGroup> Groups() const;
  static std::vector<std::string> GroupNames();

  // Redraws one group exactly as a fresh model with the same init seed would.
  void Reinitialize(const std::string& group);

  Tensor& id_table(size_t field) { return id_tables_.at(field); }
  const Tensor& id_table(size_t field) const { return id_tables_.at(field); }

  size_t ParameterCount() const;
  size_t AggregatorWidth() const;  // 0 without behavior images
  size_t MlpInputWidth() const;
  size_t AdQueryWidth() const;     // concatenated ad-side field embeddings

  // Binds every tensor of |group| as a trainable Param or a ConstantRef.
  void Bind(Graph& g, Binder& binder, const std::string& group, bool trainable) const;
  void BindAll(Graph& g, Binder& binder, bool trainable) const;

  Var EmbedImage(Graph& g, const Binder& params, Var raw) const;
  Tensor EmbedImageValue(const Tensor& raw) const;

  // |image_query| is unused for ID-queried attention, |id_query| for
  // image-queried attention; pass an invalid Var when not available.
  Var Aggregate(Graph& g, const Binder& params, std::span<const Var> behaviors,
                Var image_query, Var id_query) const;

  // Logit of the CTR head, or the two-tower inner product for pre-rank.
  Var Forward(Graph& g, const Binder& params, SampleInputs& inputs,
              const data::Sample& s) const;

  Var UserRepresentation(Graph& g, const Binder& params, SampleInputs& inputs,
                         const data::Sample& s) const;
  Var AdRepresentation(Graph& g, const Binder& params, SampleInputs& inputs,
                       const data::Sample& s) const;

 private:
  template <class Self>
  static auto CollectGroups(Self& self);
  void InitGroup(const std::string& group);
  Var AttentionChannel(Graph& g, const Binder& params, const AttentionNet& net, Var query,
                       Var keys) const;
  Var RunStack(Graph& g, const Binder& params, const std::vector<Dense>& layers, Var x) const;
  std::vector<Var> FieldEmbeddings(Graph& g, SampleInputs& inputs, const data::Sample& s,
                                   bool ad_side) const;
  std::vector<Var> BehaviorEmbeddings(Graph& g, SampleInputs& inputs,
                                      const data::Sample& s) const;

  ModelConfig config_;
  std::vector<Tensor> id_tables_;
  std::vector<Dense> image_layers_;
  std::vector<Dense> head_;
  std::vector<Dense> user_tower_;
  std::vector<Dense> ad_tower_;
  std::vector<AttentionNet> attention_;
};

// Inputs backed by the model's own tables (bound in |params|) and the fixed
// extractor; image embeddings are computed in-graph once per image id.
class TableInputs : public SampleInputs {
 public:
  TableInputs(const DicmModel& model, const Binder& params, const FixedExtractor& extractor,
              const data::ImageFeatureStore& store)
      : model_(model), params_(params), extractor_(extractor), store_(store) {}

  Var Field(Graph& g, size_t field, std::span<const uint64_t> ids) override;
  Var Image(Graph& g, uint64_t image_id) override;

 private:
  const DicmModel& model_;
  const Binder& params_;
  const FixedExtractor& extractor_;
  const data::ImageFeatureStore& store_;
  std::unordered_map<uint64_t, Var> images_;
};

// Sum over the batch of scale * sigmoid_cross_entropy(logit_i, label_i).
struct BatchLoss {
  Var loss;
  std::vector<Var> logits;
};
BatchLoss BuildBatchLoss(Graph& g, const DicmModel& model, const Binder& params,
                         SampleInputs& inputs, std::span<const data::Sample> batch,
                         double scale);

// Forward-only logits for |samples| with the full model.
std::vector<double> PredictLogits(const DicmModel& model, const FixedExtractor& extractor,
                                  const data::ImageFeatureStore& store,
                                  std::span<const data::Sample> samples);

FixedExtractor MakeExtractor(const ModelConfig& config);

}  // namespace dicm::model

#endif  // DICM_MODEL_DICM_MODEL_H_

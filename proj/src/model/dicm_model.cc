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

#include "dicm/model/dicm_model.h"

#include <cmath>

#include "dicm/common/error.h"
#include "dicm/numerics/rng.h"

namespace dicm::model {

using numerics::Rng;

namespace {

constexpr double kEmbeddingStddev = 0.05;
constexpr double kPReluInit = 0.25;

Tensor Glorot(Rng& rng, size_t fan_out, size_t fan_in, size_t fan_in_total) {
  const double sd = std::sqrt(2.0 / static_cast<double>(fan_in_total + fan_out));
  Tensor w({fan_out, fan_in});
  for (double& v : w.data()) v = rng.Normal(0.0, sd);
  return w;
}

std::vector<Dense> MakeStack(Rng& rng, size_t in, const std::vector<size_t>& widths,
                             bool last_linear) {
  std::vector<Dense> layers;
  for (size_t i = 0; i < widths.size(); ++i) {
    Dense d;
    d.w = Glorot(rng, widths[i], in, in);
    d.b = Tensor({widths[i]});
    if (!(last_linear && i + 1 == widths.size())) {
      d.alpha = Tensor({widths[i]});
      d.alpha.Fill(kPReluInit);
    }
    layers.push_back(std::move(d));
    in = widths[i];
  }
  return layers;
}

void AddDense(std::vector<ParamRef>& out, const std::string& prefix, Dense& d) {
  out.push_back({prefix + ".w", &d.w});
  out.push_back({prefix + ".b", &d.b});
  if (!d.alpha.empty()) out.push_back({prefix + ".alpha", &d.alpha});
}

}  // namespace

FixedExtractor MakeExtractor(const ModelConfig& config) {
  return FixedExtractor(config.extractor_seed, config.latent_dim, config.schema.d_raw);
}

DicmModel::DicmModel(ModelConfig config) : config_(std::move(config)) {
  config_.Validate();
  for (const auto& name : GroupNames()) InitGroup(name);
}

std::vector<std::string> DicmModel::GroupNames() {
  return {kIdGroup, kImageGroup, kMlpGroup, kAttentionGroup};
}

size_t DicmModel::AdQueryWidth() const {
  size_t n = 0;
  for (const auto& f : schema().fields) n += IsAdSide(f.slot) ? 1 : 0;
  return n * schema().d_id;
}

size_t DicmModel::AggregatorWidth() const {
  if (!config_.use_behavior_images) return 0;
  const size_t d = schema().d_img;
  switch (config_.aggregator.kind) {
    case AggregatorKind::kConcat: return d * schema().b_max;
    case AggregatorKind::kMultiQuery: return 2 * d;
    default: return d;
  }
}

size_t DicmModel::MlpInputWidth() const {
  return schema().fields.size() * schema().d_id + (config_.use_ad_image ? schema().d_img : 0) +
         AggregatorWidth();
}

void DicmModel::InitGroup(const std::string& group) {
  Rng rng(numerics::DeriveSeed(config_.init_seed, group));
  const FeatureSchema& s = schema();
  if (group == kIdGroup) {
    id_tables_.clear();
    for (const auto& f : s.fields) {
      Tensor t({f.vocab, s.d_id});
      for (double& v : t.data()) v = rng.Normal(0.0, kEmbeddingStddev);
      id_tables_.push_back(std::move(t));
    }
  } else if (group == kImageGroup) {
    image_layers_.clear();
    if (config_.uses_images()) {
      auto widths = config_.ImageHidden();
      widths.push_back(s.d_img);
      image_layers_ = MakeStack(rng, s.d_raw, widths, true);
    }
  } else if (group == kMlpGroup) {
    head_.clear();
    user_tower_.clear();
    ad_tower_.clear();
    if (config_.kind == ModelKind::kCtr) {
      auto widths = config_.mlp_hidden;
      widths.push_back(1);
      head_ = MakeStack(rng, MlpInputWidth(), widths, true);
    } else {
      size_t user_in = 0, ad_in = 0;
      for (const auto& f : s.fields) (IsAdSide(f.slot) ? ad_in : user_in) += s.d_id;
      if (config_.use_behavior_images) user_in += s.d_img;
      if (config_.use_ad_image) ad_in += s.d_img;
      user_tower_ = MakeStack(rng, user_in, config_.user_tower, true);
      ad_tower_ = MakeStack(rng, ad_in, config_.ad_tower, true);
    }
  } else if (group == kAttentionGroup) {
    attention_.clear();
    const auto kind = config_.aggregator.kind;
    if (config_.kind != ModelKind::kCtr || !config_.use_behavior_images ||
        (kind != AggregatorKind::kAttentive && kind != AggregatorKind::kMultiQuery)) {
      return;
    }
    std::vector<size_t> query_widths;
    if (kind == AggregatorKind::kMultiQuery) {
      query_widths = {s.d_img, AdQueryWidth()};
    } else {
      query_widths = {config_.use_ad_image ? s.d_img : AdQueryWidth()};
    }
    const size_t h = config_.aggregator.attention_hidden;
    for (size_t q : query_widths) {
      AttentionNet net;
      net.wq = Glorot(rng, h, q, q + s.d_img);
      net.wk = Glorot(rng, h, s.d_img, q + s.d_img);
      net.b1 = Tensor({h});
      net.alpha = Tensor({h});
      net.alpha.Fill(kPReluInit);
      net.w2 = Glorot(rng, 1, h, h);
      net.b2 = Tensor({1});
      attention_.push_back(std::move(net));
    }
  } else {
    throw ContractError("unknown parameter group '" + group + "'");
  }
}

void DicmModel::Reinitialize(const std::string& group) { InitGroup(group); }

template <class Self>
auto DicmModel::CollectGroups(Self& self) {
  std::vector<ParamGroup> groups;
  auto& m = const_cast<DicmModel&>(self);
  ParamGroup ids{kIdGroup, {}};
  for (size_t i = 0; i < m.id_tables_.size(); ++i) {
    ids.params.push_back({"id/" + m.schema().fields[i].name, &m.id_tables_[i]});
  }
  groups.push_back(std::move(ids));
  ParamGroup image{kImageGroup, {}};
  for (size_t i = 0; i < m.image_layers_.size(); ++i) {
    AddDense(image.params, "image/l" + std::to_string(i), m.image_layers_[i]);
  }
  groups.push_back(std::move(image));
  ParamGroup mlp{kMlpGroup, {}};
  for (size_t i = 0; i < m.head_.size(); ++i) {
    AddDense(mlp.params, "mlp/l" + std::to_string(i), m.head_[i]);
  }
  for (size_t i = 0; i < m.user_tower_.size(); ++i) {
    AddDense(mlp.params, "user_tower/l" + std::to_string(i), m.user_tower_[i]);
  }
  for (size_t i = 0; i < m.ad_tower_.size(); ++i) {
    AddDense(mlp.params, "ad_tower/l" + std::to_string(i), m.ad_tower_[i]);
  }
  groups.push_back(std::move(mlp));
  ParamGroup att{kAttentionGroup, {}};
  for (size_t i = 0; i < m.attention_.size(); ++i) {
    AttentionNet& n = m.attention_[i];
    const std::string p = "attention/c" + std::to_string(i);
    att.params.push_back({p + ".wq", &n.wq});
    att.params.push_back({p + ".wk", &n.wk});
    att.params.push_back({p + ".b1", &n.b1});
    att.params.push_back({p + ".alpha", &n.alpha});
    att.params.push_back({p + ".w2", &n.w2});
    att.params.push_back({p + ".b2", &n.b2});
  }
  groups.push_back(std::move(att));
  return groups;
}

std::vector<ParamGroup> DicmModel::Groups() { return CollectGroups(*this); }

std::vector<ConstParamGroup> DicmModel::Groups() const {
  std::vector<ConstParamGroup> out;
  for (auto& g : CollectGroups(*this)) {
    ConstParamGroup c{g.name, {}};
    for (auto& p : g.params) c.params.push_back({p.name, p.tensor});
    out.push_back(std::move(c));
  }
  return out;
}

size_t DicmModel::ParameterCount() const {
  size_t n = 0;
  for (const auto& g : Groups()) {
    for (const auto& p : g.params) n += p.tensor->size();
  }
  return n;
}

void DicmModel::Bind(Graph& g, Binder& binder, const std::string& group, bool trainable) const {
  for (const auto& grp : Groups()) {
    if (grp.name != group) continue;
    for (const auto& p : grp.params) {
      binder.Bind(*p.tensor, trainable ? g.Param(*p.tensor) : g.ConstantRef(*p.tensor));
    }
  }
}

void DicmModel::BindAll(Graph& g, Binder& binder, bool trainable) const {
  for (const auto& name : GroupNames()) Bind(g, binder, name, trainable);
}

Var DicmModel::RunStack(Graph& g, const Binder& params, const std::vector<Dense>& layers,
                        Var x) const {
  for (const Dense& d : layers) {
    x = g.Linear(x, params(d.w), params(d.b));
    if (!d.alpha.empty()) x = g.PRelu(x, params(d.alpha));
  }
  return x;
}

Var DicmModel::EmbedImage(Graph& g, const Binder& params, Var raw) const {
  if (image_layers_.empty()) throw ConfigError("model has no image embedding model");
  return RunStack(g, params, image_layers_, raw);
}

Tensor DicmModel::EmbedImageValue(const Tensor& raw) const {
  Graph g;
  Binder b;
  Bind(g, b, kImageGroup, false);
  return g.Value(EmbedImage(g, b, g.ConstantRef(raw)));
}

Var DicmModel::AttentionChannel(Graph& g, const Binder& params, const AttentionNet& net,
                                Var query, Var keys) const {
  Var shift = g.Linear(query, params(net.wq), params(net.b1));
  Var hidden = g.PRelu(g.Linear(keys, params(net.wk), shift), params(net.alpha));
  Var scores = g.Flatten(g.Linear(hidden, params(net.w2), params(net.b2)));
  Var weights = config_.aggregator.normalize ? g.Softmax(scores) : scores;
  return g.WeightedRows(weights, keys);
}

Var DicmModel::Aggregate(Graph& g, const Binder& params, std::span<const Var> behaviors,
                         Var image_query, Var id_query) const {
  const size_t d = schema().d_img;
  const size_t width = AggregatorWidth();
  if (behaviors.size() > schema().b_max) {
    throw ContractError("aggregate: " + std::to_string(behaviors.size()) +
                        " behaviors exceed b_max " + std::to_string(schema().b_max));
  }
  if (behaviors.empty()) return g.Constant(Tensor({width}));
  switch (config_.aggregator.kind) {
    case AggregatorKind::kConcat: {
      std::vector<Var> parts(behaviors.begin(), behaviors.end());
      const size_t pad = (schema().b_max - behaviors.size()) * d;
      if (pad > 0) parts.push_back(g.Constant(Tensor({pad})));
      return g.Concat(parts);
    }
    case AggregatorKind::kSum:
      return g.Sum(behaviors);
    case AggregatorKind::kMax:
      return g.Max(behaviors);
    case AggregatorKind::kAttentive: {
      Var keys = g.StackRows(behaviors);
      Var q = config_.use_ad_image ? image_query : id_query;
      if (!q.valid()) throw ContractError("attentive aggregator needs a query");
      return AttentionChannel(g, params, attention_.at(0), q, keys);
    }
    case AggregatorKind::kMultiQuery: {
      if (!image_query.valid() || !id_query.valid()) {
        throw ContractError("multiquery aggregator needs image and id queries");
      }
      Var keys = g.StackRows(behaviors);
      const Var parts[] = {AttentionChannel(g, params, attention_.at(0), image_query, keys),
                           AttentionChannel(g, params, attention_.at(1), id_query, keys)};
      return g.Concat(parts);
    }
  }
  return Var{};
}

std::vector<Var> DicmModel::FieldEmbeddings(Graph& g, SampleInputs& inputs,
                                            const data::Sample& s, bool ad_side) const {
  std::vector<Var> out;
  for (size_t i = 0; i < schema().fields.size(); ++i) {
    if (IsAdSide(schema().fields[i].slot) != ad_side) continue;
    const auto ids = schema().FieldIds(i, s);
    out.push_back(inputs.Field(g, i, ids));
  }
  return out;
}

std::vector<Var> DicmModel::BehaviorEmbeddings(Graph& g, SampleInputs& inputs,
                                               const data::Sample& s) const {
  std::vector<Var> out;
  for (uint64_t id : data::FilterBehaviors<uint64_t>(s.behavior_images, schema().b_max)) {
    out.push_back(inputs.Image(g, id));
  }
  return out;
}

Var DicmModel::Forward(Graph& g, const Binder& params, SampleInputs& inputs,
                       const data::Sample& s) const {
  data::ValidateSample(s);
  if (config_.kind == ModelKind::kPrerank) {
    return g.Dot(UserRepresentation(g, params, inputs, s),
                 AdRepresentation(g, params, inputs, s));
  }
  std::vector<Var> parts;
  std::vector<Var> ad_fields;
  for (size_t i = 0; i < schema().fields.size(); ++i) {
    Var e = inputs.Field(g, i, schema().FieldIds(i, s));
    parts.push_back(e);
    if (IsAdSide(schema().fields[i].slot)) ad_fields.push_back(e);
  }
  Var ad_image;
  if (config_.use_ad_image) {
    ad_image = inputs.Image(g, s.ad_image);
    parts.push_back(ad_image);
  }
  if (config_.use_behavior_images) {
    const auto behaviors = BehaviorEmbeddings(g, inputs, s);
    Var id_query;
    const auto kind = config_.aggregator.kind;
    if (kind == AggregatorKind::kMultiQuery ||
        (kind == AggregatorKind::kAttentive && !config_.use_ad_image)) {
      id_query = g.Concat(ad_fields);
    }
    parts.push_back(Aggregate(g, params, behaviors, ad_image, id_query));
  }
  return RunStack(g, params, head_, g.Concat(parts));
}

Var DicmModel::UserRepresentation(Graph& g, const Binder& params, SampleInputs& inputs,
                                  const data::Sample& s) const {
  if (config_.kind != ModelKind::kPrerank) throw ConfigError("not a pre-rank model");
  std::vector<Var> parts = FieldEmbeddings(g, inputs, s, false);
  if (config_.use_behavior_images) {
    const auto behaviors = BehaviorEmbeddings(g, inputs, s);
    parts.push_back(behaviors.empty() ? g.Constant(Tensor({schema().d_img}))
                                      : g.Sum(behaviors));
  }
  return RunStack(g, params, user_tower_, g.Concat(parts));
}

Var DicmModel::AdRepresentation(Graph& g, const Binder& params, SampleInputs& inputs,
                                const data::Sample& s) const {
  if (config_.kind != ModelKind::kPrerank) throw ConfigError("not a pre-rank model");
  std::vector<Var> parts = FieldEmbeddings(g, inputs, s, true);
  if (config_.use_ad_image) parts.push_back(inputs.Image(g, s.ad_image));
  return RunStack(g, params, ad_tower_, g.Concat(parts));
}

Var TableInputs::Field(Graph& g, size_t field, std::span<const uint64_t> ids) {
  if (ids.empty()) return g.Constant(Tensor({model_.schema().d_id}));
  return g.GatherSum(params_(model_.id_table(field)), ids);
}

Var TableInputs::Image(Graph& g, uint64_t image_id) {
  auto it = images_.find(image_id);
  if (it != images_.end()) return it->second;
  Var raw = g.Constant(extractor_.Extract(store_, image_id));
  Var e = model_.EmbedImage(g, params_, raw);
  images_.emplace(image_id, e);
  return e;
}

BatchLoss BuildBatchLoss(Graph& g, const DicmModel& model, const Binder& params,
                         SampleInputs& inputs, std::span<const data::Sample> batch,
                         double scale) {
  if (batch.empty()) throw ContractError("empty batch");
  BatchLoss out;
  std::vector<Var> losses;
  for (const auto& s : batch) {
    Var logit = model.Forward(g, params, inputs, s);
    out.logits.push_back(logit);
    losses.push_back(g.Scale(g.SigmoidCrossEntropy(logit, s.label), scale));
  }
  out.loss = g.Sum(losses);
  return out;
}

std::vector<double> PredictLogits(const DicmModel& model, const FixedExtractor& extractor,
                                  const data::ImageFeatureStore& store,
                                  std::span<const data::Sample> samples) {
  constexpr size_t kChunk = 512;
  std::vector<double> out;
  out.reserve(samples.size());
  for (size_t start = 0; start < samples.size(); start += kChunk) {
    Graph g;
    Binder b;
    model.BindAll(g, b, false);
    TableInputs inputs(model, b, extractor, store);
    const size_t end = std::min(samples.size(), start + kChunk);
    for (size_t i = start; i < end; ++i) {
      out.push_back(g.Value(model.Forward(g, b, inputs, samples[i])).item());
    }
  }
  return out;
}

}  // namespace dicm::model

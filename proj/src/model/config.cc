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

#include "dicm/model/config.h"

#include "dicm/common/error.h"
#include "json.hpp"

namespace dicm::model {

using ordered_json = nlohmann::ordered_json;

bool IsAdSide(FieldSlot slot) {
  return slot == FieldSlot::kAd || slot == FieldSlot::kCategory ||
         slot == FieldSlot::kAdImage;
}

void FeatureSchema::Validate() const {
  if (fields.empty()) throw SchemaError("schema has no fields");
  if (d_id == 0 || d_raw == 0 || d_img == 0 || b_max == 0) {
    throw SchemaError("schema dimensions must be >= 1");
  }
  for (const auto& f : fields) {
    if (f.vocab == 0) throw SchemaError("field '" + f.name + "' has empty vocabulary");
    const bool multi = f.slot == FieldSlot::kBehaviorItems || f.slot == FieldSlot::kBehaviorImages;
    if (multi != (f.kind == FieldKind::kMultiHot)) {
      throw SchemaError("field '" + f.name + "' kind does not match its slot");
    }
  }
}

std::vector<uint64_t> FeatureSchema::FieldIds(size_t i, const data::Sample& s) const {
  switch (fields.at(i).slot) {
    case FieldSlot::kUser:
      return {s.user};
    case FieldSlot::kScenario:
      return {s.scenario};
    case FieldSlot::kAd:
      return {s.ad};
    case FieldSlot::kCategory:
      return {s.category};
    case FieldSlot::kAdImage:
      return {s.ad_image};
    case FieldSlot::kBehaviorItems:
      return data::FilterBehaviors<uint64_t>(s.behavior_items, b_max);
    case FieldSlot::kBehaviorImages:
      return data::FilterBehaviors<uint64_t>(s.behavior_images, b_max);
  }
  return {};
}

void FeatureSchema::CheckSample(const data::Sample& s) const {
  data::ValidateSample(s);
  for (size_t i = 0; i < fields.size(); ++i) {
    for (uint64_t id : FieldIds(i, s)) {
      if (id >= fields[i].vocab) {
        throw SchemaError("field '" + fields[i].name + "' id " + std::to_string(id) +
                          " outside vocabulary of size " + std::to_string(fields[i].vocab));
      }
    }
  }
}

FeatureSchema DefaultSchema(const data::DatasetMeta& meta, bool image_id_fields) {
  FeatureSchema s;
  s.fields = {
      {"user", meta.users, FieldKind::kOneHot, FieldSlot::kUser},
      {"scenario", meta.scenarios, FieldKind::kOneHot, FieldSlot::kScenario},
      {"ad", meta.items, FieldKind::kOneHot, FieldSlot::kAd},
      {"category", meta.categories, FieldKind::kOneHot, FieldSlot::kCategory},
      {"ad_image_id", meta.images, FieldKind::kOneHot, FieldSlot::kAdImage},
      {"behavior_items", meta.items, FieldKind::kMultiHot, FieldSlot::kBehaviorItems},
      {"behavior_image_ids", meta.images, FieldKind::kMultiHot, FieldSlot::kBehaviorImages},
  };
  if (!image_id_fields) {
    std::erase_if(s.fields, [](const FieldSpec& f) {
      return f.slot == FieldSlot::kAdImage || f.slot == FieldSlot::kBehaviorImages;
    });
  }
  return s;
}

namespace {

struct NamedKind {
  AggregatorKind kind;
  const char* name;
};
constexpr NamedKind kAggregatorNames[] = {
    {AggregatorKind::kConcat, "concat"},
    {AggregatorKind::kMax, "max"},
    {AggregatorKind::kSum, "sum"},
    {AggregatorKind::kAttentive, "attn"},
    {AggregatorKind::kMultiQuery, "multiquery-attn"},
};

const char* SlotName(FieldSlot slot) {
  switch (slot) {
    case FieldSlot::kUser: return "user";
    case FieldSlot::kScenario: return "scenario";
    case FieldSlot::kAd: return "ad";
    case FieldSlot::kCategory: return "category";
    case FieldSlot::kAdImage: return "ad_image";
    case FieldSlot::kBehaviorItems: return "behavior_items";
    case FieldSlot::kBehaviorImages: return "behavior_images";
  }
  return "";
}

FieldSlot SlotFromName(const std::string& name) {
  for (FieldSlot s : {FieldSlot::kUser, FieldSlot::kScenario, FieldSlot::kAd,
                      FieldSlot::kCategory, FieldSlot::kAdImage, FieldSlot::kBehaviorItems,
                      FieldSlot::kBehaviorImages}) {
    if (name == SlotName(s)) return s;
  }
  throw FormatError("unknown field slot '" + name + "'");
}

}  // namespace

std::string AggregatorName(AggregatorKind kind) {
  for (const auto& n : kAggregatorNames) {
    if (n.kind == kind) return n.name;
  }
  return "";
}

AggregatorKind AggregatorFromName(const std::string& name) {
  for (const auto& n : kAggregatorNames) {
    if (name == n.name) return n.kind;
  }
  throw ConfigError("unknown aggregator '" + name +
                    "' (expected concat, max, sum, attn or multiquery-attn)");
}

std::vector<size_t> DefaultImageHidden(size_t d_raw) {
  return {std::max<size_t>(d_raw / 16, 32), std::max<size_t>(d_raw / 64, 16)};
}

std::vector<size_t> ModelConfig::ImageHidden() const {
  return image_hidden.empty() ? DefaultImageHidden(schema.d_raw) : image_hidden;
}

void ModelConfig::Validate() const {
  schema.Validate();
  auto positive = [](const std::vector<size_t>& widths, const char* what) {
    for (size_t w : widths) {
      if (w == 0) throw ConfigError(std::string(what) + " widths must be >= 1");
    }
  };
  if (!image_hidden.empty() && image_hidden.size() != 2) {
    throw ConfigError("image model needs exactly two hidden widths (3 weight layers)");
  }
  positive(image_hidden, "image model");
  positive(mlp_hidden, "mlp");
  positive(user_tower, "user tower");
  positive(ad_tower, "ad tower");
  if (latent_dim == 0) throw ConfigError("latent_dim must be >= 1");
  if (aggregator.attention_hidden == 0) throw ConfigError("attention hidden width must be >= 1");
  if (kind == ModelKind::kCtr && use_behavior_images &&
      aggregator.kind == AggregatorKind::kMultiQuery && !use_ad_image) {
    throw ConfigError("multiquery aggregator needs the ad image query (use_ad_image)");
  }
  if (kind == ModelKind::kPrerank) {
    if (user_tower.empty() || ad_tower.empty()) throw ConfigError("towers need >= 1 layer");
    if (user_tower.back() != ad_tower.back()) {
      throw ConfigError("tower output widths differ: user " + std::to_string(user_tower.back()) +
                        " vs ad " + std::to_string(ad_tower.back()));
    }
  }
}

std::string ModelConfigToJson(const ModelConfig& c) {
  ordered_json j;
  ordered_json fields = ordered_json::array();
  for (const auto& f : c.schema.fields) {
    fields.push_back({{"name", f.name},
                      {"vocab", f.vocab},
                      {"kind", f.kind == FieldKind::kOneHot ? "one-hot" : "multi-hot"},
                      {"slot", SlotName(f.slot)}});
  }
  j["fields"] = fields;
  j["d_id"] = c.schema.d_id;
  j["d_raw"] = c.schema.d_raw;
  j["d_img"] = c.schema.d_img;
  j["b_max"] = c.schema.b_max;
  j["model"] = c.kind == ModelKind::kCtr ? "ctr" : "prerank";
  j["aggregator"] = AggregatorName(c.aggregator.kind);
  j["attention_hidden"] = c.aggregator.attention_hidden;
  j["attention_normalize"] = c.aggregator.normalize;
  j["use_ad_image"] = c.use_ad_image;
  j["use_behavior_images"] = c.use_behavior_images;
  j["image_hidden"] = c.ImageHidden();
  j["mlp_hidden"] = c.mlp_hidden;
  j["user_tower"] = c.user_tower;
  j["ad_tower"] = c.ad_tower;
  j["extractor_seed"] = c.extractor_seed;
  j["latent_dim"] = c.latent_dim;
  j["init_seed"] = c.init_seed;
  return j.dump();
}

ModelConfig ModelConfigFromJson(const std::string& text) {
  try {
    auto j = ordered_json::parse(text);
    ModelConfig c;
    for (const auto& f : j.at("fields")) {
      const std::string kind = f.at("kind");
      c.schema.fields.push_back({f.at("name"), f.at("vocab"),
                                 kind == "one-hot" ? FieldKind::kOneHot : FieldKind::kMultiHot,
                                 SlotFromName(f.at("slot"))});
    }
    c.schema.d_id = j.at("d_id");
    c.schema.d_raw = j.at("d_raw");
    c.schema.d_img = j.at("d_img");
    c.schema.b_max = j.at("b_max");
    c.kind = j.at("model") == "ctr" ? ModelKind::kCtr : ModelKind::kPrerank;
    c.aggregator.kind = AggregatorFromName(j.at("aggregator"));
    c.aggregator.attention_hidden = j.at("attention_hidden");
    c.aggregator.normalize = j.at("attention_normalize");
    c.use_ad_image = j.at("use_ad_image");
    c.use_behavior_images = j.at("use_behavior_images");
    c.image_hidden = j.at("image_hidden").get<std::vector<size_t>>();
    c.mlp_hidden = j.at("mlp_hidden").get<std::vector<size_t>>();
    c.user_tower = j.at("user_tower").get<std::vector<size_t>>();
    c.ad_tower = j.at("ad_tower").get<std::vector<size_t>>();
    c.extractor_seed = j.at("extractor_seed");
    c.latent_dim = j.at("latent_dim");
    c.init_seed = j.at("init_seed");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad model config: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("bad model config: ") + e.what());
  }
}

}  // namespace dicm::model

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

#include "dicm/data/dataset_io.h"

#include <filesystem>
#include <fstream>

#include "dicm/common/bytes.h"
#include "dicm/common/error.h"
#include "json.hpp"

namespace dicm::data {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json ConfigToJson(const SyntheticConfig& c) {
  ordered_json j;
  j["users"] = c.users;
  j["items"] = c.items;
  j["images"] = c.images;
  j["categories"] = c.categories;
  j["scenarios"] = c.scenarios;
  j["latent_dim"] = c.latent_dim;
  j["id_coef"] = c.id_coef;
  j["visual_coef"] = c.visual_coef;
  j["noise"] = c.noise;
  j["base_ctr"] = c.base_ctr;
  j["behavior_sharpness"] = c.behavior_sharpness;
  j["behaviors_min"] = c.behaviors_min;
  j["behavior_cap"] = c.behavior_cap;
  j["max_behaviors"] = c.max_behaviors;
  j["days"] = c.days;
  j["test_days"] = c.test_days;
  j["impressions_per_user_day"] = c.impressions_per_user_day;
  j["cold_start_fraction"] = c.cold_start_fraction;
  j["seed"] = c.seed;
  return j;
}

SyntheticConfig ConfigFromJson(const ordered_json& j) {
  SyntheticConfig c;
  c.users = j.at("users");
  c.items = j.at("items");
  c.images = j.at("images");
  c.categories = j.at("categories");
  c.scenarios = j.at("scenarios");
  c.latent_dim = j.at("latent_dim");
  c.id_coef = j.at("id_coef");
  c.visual_coef = j.at("visual_coef");
  c.noise = j.at("noise");
  c.base_ctr = j.at("base_ctr");
  c.behavior_sharpness = j.at("behavior_sharpness");
  c.behaviors_min = j.at("behaviors_min");
  c.behavior_cap = j.at("behavior_cap");
  c.max_behaviors = j.at("max_behaviors");
  c.days = j.at("days");
  c.test_days = j.at("test_days");
  c.impressions_per_user_day = j.at("impressions_per_user_day");
  c.cold_start_fraction = j.at("cold_start_fraction");
  c.seed = j.at("seed");
  return c;
}

ordered_json MetaToJson(const DatasetMeta& m) {
  ordered_json j;
  j["users"] = m.users;
  j["items"] = m.items;
  j["warm_items"] = m.warm_items;
  j["images"] = m.images;
  j["warm_images"] = m.warm_images;
  j["categories"] = m.categories;
  j["scenarios"] = m.scenarios;
  j["latent_dim"] = m.latent_dim;
  j["days"] = m.days;
  j["test_days"] = m.test_days;
  return j;
}

DatasetMeta MetaFromJson(const ordered_json& j) {
  DatasetMeta m;
  m.users = j.at("users");
  m.items = j.at("items");
  m.warm_items = j.at("warm_items");
  m.images = j.at("images");
  m.warm_images = j.at("warm_images");
  m.categories = j.at("categories");
  m.scenarios = j.at("scenarios");
  m.latent_dim = j.at("latent_dim");
  m.days = j.at("days");
  m.test_days = j.at("test_days");
  return m;
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write failure on '" + path + "'");
}

void SaveF32(const std::string& path, const std::vector<float>& v, size_t cols) {
  const uint32_t rows = cols == 0 ? 0 : static_cast<uint32_t>(v.size() / cols);
  WriteFileBytes(path, EncodeMatrix(rows, static_cast<uint32_t>(cols), v));
}

std::vector<float> LoadF32(const std::string& path) {
  return DecodeMatrixF32(ReadFileBytes(path), nullptr);
}

}  // namespace

std::string SampleToJsonLine(const Sample& s) {
  ordered_json j;
  j["user"] = s.user;
  j["day"] = s.day;
  j["scenario"] = s.scenario;
  j["ad"] = s.ad;
  j["category"] = s.category;
  j["ad_image"] = s.ad_image;
  j["behavior_items"] = s.behavior_items;
  j["behavior_images"] = s.behavior_images;
  j["label"] = s.label;
  return j.dump();
}

Sample SampleFromJsonLine(const std::string& line) {
  try {
    auto j = ordered_json::parse(line);
    Sample s;
    s.user = j.at("user").get<uint64_t>();
    s.day = j.at("day").get<uint32_t>();
    s.scenario = j.at("scenario").get<uint64_t>();
    s.ad = j.at("ad").get<uint64_t>();
    s.category = j.at("category").get<uint64_t>();
    s.ad_image = j.at("ad_image").get<uint64_t>();
    s.behavior_items = j.at("behavior_items").get<std::vector<uint64_t>>();
    s.behavior_images = j.at("behavior_images").get<std::vector<uint64_t>>();
    s.label = j.at("label").get<int>();
    if (j.size() != 9) throw SchemaError("unexpected extra keys in sample record");
    ValidateSample(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("bad sample record: ") + e.what());
  }
}

void WriteSamples(const std::string& path, std::span<const Sample> samples) {
  std::string text;
  for (const Sample& s : samples) {
    text += SampleToJsonLine(s);
    text += '\n';
  }
  WriteText(path, text);
}

std::vector<Sample> ReadSamples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<Sample> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(SampleFromJsonLine(line));
    } catch (const SchemaError& e) {
      throw SchemaError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void SaveDataset(const Dataset& ds, const std::string& dir) {
  std::filesystem::create_directories(dir);
  ordered_json meta;
  meta["format"] = "dicm-dataset";
  meta["version"] = 1;
  meta["generator"] = ConfigToJson(ds.config);
  meta["vocabulary"] = MetaToJson(ds.meta);
  meta["truth_bias"] = ds.truth.bias;
  WriteText(dir + "/meta.json", meta.dump(2) + "\n");
  WriteSamples(dir + "/train.jsonl", ds.train);
  WriteSamples(dir + "/test.jsonl", ds.test);
  ds.images.Save(dir + "/images.bin");
  const GroundTruth& t = ds.truth;
  SaveF32(dir + "/truth_user_latent.bin", t.user_latent, t.dim);
  SaveF32(dir + "/truth_user_visual.bin", t.user_visual, t.dim);
  SaveF32(dir + "/truth_item_latent.bin", t.item_latent, t.dim);
  std::vector<float> item_map;
  for (size_t i = 0; i < t.item_category.size(); ++i) {
    item_map.push_back(static_cast<float>(t.item_category[i]));
    item_map.push_back(static_cast<float>(t.item_image[i]));
  }
  SaveF32(dir + "/truth_item_map.bin", item_map, 2);
}

Dataset LoadDataset(const std::string& dir) {
  std::ifstream in(dir + "/meta.json");
  if (!in) throw IoError("cannot open '" + dir + "/meta.json'");
  ordered_json meta;
  try {
    meta = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(dir + "/meta.json: " + e.what());
  }
  Dataset ds;
  try {
    ds.config = ConfigFromJson(meta.at("generator"));
    ds.meta = MetaFromJson(meta.at("vocabulary"));
    ds.truth.bias = meta.at("truth_bias");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(dir + "/meta.json: " + e.what());
  }
  ds.train = ReadSamples(dir + "/train.jsonl");
  ds.test = ReadSamples(dir + "/test.jsonl");
  ds.images = ImageFeatureStore::Load(dir + "/images.bin");
  GroundTruth& t = ds.truth;
  t.dim = ds.meta.latent_dim;
  if (std::filesystem::exists(dir + "/truth_user_latent.bin")) {
    t.user_latent = LoadF32(dir + "/truth_user_latent.bin");
    t.user_visual = LoadF32(dir + "/truth_user_visual.bin");
    t.item_latent = LoadF32(dir + "/truth_item_latent.bin");
    auto item_map = LoadF32(dir + "/truth_item_map.bin");
    for (size_t i = 0; i + 1 < item_map.size(); i += 2) {
      t.item_category.push_back(static_cast<uint64_t>(item_map[i]));
      t.item_image.push_back(static_cast<uint64_t>(item_map[i + 1]));
    }
  }
  return ds;
}

}  // namespace dicm::data

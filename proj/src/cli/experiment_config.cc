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

#include "dicm/cli/experiment_config.h"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "dicm/common/error.h"
#include "dicm/deployment/checkpoint.h"

namespace dicm::cli {

namespace {

void CheckMode(const std::string& v) { ams::ModeFromName(v); }
void CheckAggregator(const std::string& v) { model::AggregatorFromName(v); }
void CheckWarmup(const std::string& v) { deployment::WarmupMask::FromName(v); }
void CheckKind(const std::string& v) {
  if (v != "ctr" && v != "prerank") throw ConfigError("expected ctr or prerank, got '" + v + "'");
}
void CheckTrainer(const std::string& v) {
  if (v != "cluster" && v != "reference") {
    throw ConfigError("expected cluster or reference, got '" + v + "'");
  }
}
void CheckSplit(const std::string& v) {
  if (v != "train" && v != "test") throw ConfigError("expected train or test, got '" + v + "'");
}
void CheckAggregators(const std::vector<std::string>& v) {
  for (const auto& a : v) CheckAggregator(a);
}

// Visits every configurable field. Readers and writers share this list.
template <class V>
void Visit(ExperimentConfig& c, V& v) {
  auto& d = c.data;
  v.Section("data");
  v("users", d.users);
  v("items", d.items);
  v("images", d.images);
  v("categories", d.categories);
  v("scenarios", d.scenarios);
  v("latent_dim", d.latent_dim);
  v("id_coef", d.id_coef);
  v("visual_coef", d.visual_coef);
  v("noise", d.noise);
  v("base_ctr", d.base_ctr);
  v("behavior_sharpness", d.behavior_sharpness);
  v("behaviors_min", d.behaviors_min);
  v("behavior_cap", d.behavior_cap);
  v("max_behaviors", d.max_behaviors);
  v("days", d.days);
  v("test_days", d.test_days);
  v("impressions_per_user_day", d.impressions_per_user_day);
  v("cold_start_fraction", d.cold_start_fraction);
  v("seed", d.seed);

  auto& m = c.model;
  v.Section("model");
  v("kind", m.kind, CheckKind);
  v("aggregator", m.aggregator, CheckAggregator);
  v("d_id", m.d_id);
  v("d_raw", m.d_raw);
  v("d_img", m.d_img);
  v("b_max", m.b_max);
  v("attention_hidden", m.attention_hidden);
  v("normalize_attention", m.normalize_attention);
  v("use_ad_image", m.use_ad_image);
  v("use_behavior_images", m.use_behavior_images);
  v("image_id_fields", m.image_id_fields);
  v("image_hidden", m.image_hidden);
  v("mlp_hidden", m.mlp_hidden);
  v("user_tower", m.user_tower);
  v("ad_tower", m.ad_tower);
  v("extractor_seed", m.extractor_seed);
  v("init_seed", m.init_seed);

  auto& k = c.cluster;
  v.Section("cluster");
  v("workers", k.workers);
  v("servers", k.servers);
  v("mode", k.mode, CheckMode);
  v("per_worker_batch", k.per_worker_batch);
  v("deterministic", k.deterministic);
  v("threads", k.threads);

  auto& t = c.train;
  v.Section("train");
  v("trainer", t.trainer, CheckTrainer);
  v("epochs", t.epochs);
  v("batch_size", t.batch_size);
  v("lr", t.lr);
  v("lr_decay", t.lr_decay);
  v("lr_interval", t.lr_interval);
  v("adam_beta1", t.adam_beta1);
  v("adam_beta2", t.adam_beta2);
  v("adam_epsilon", t.adam_epsilon);
  v("seed", t.seed);
  v("shuffle", t.shuffle);
  v("max_iterations", t.max_iterations);
  v("warmup", t.warmup, CheckWarmup);

  auto& p = c.paths;
  v.Section("paths");
  v("out_dir", p.out_dir);
  v("data_dir", p.data_dir);
  v("checkpoint", p.checkpoint);
  v("init_checkpoint", p.init_checkpoint);
  v("table", p.table);
  v("samples", p.samples);
  v("scores", p.scores);

  v.Section("eval");
  v("split", c.eval.split, CheckSplit);
  v("sweep", c.eval.sweep, CheckAggregators);

  v.Section("accounting");
  v("max_samples", c.accounting.max_samples);
  v.Done();
}

std::string Where(const std::string& source, const YAML::Node& n) {
  return source + ":" + std::to_string(n.Mark().line + 1);
}

class Reader {
 public:
  Reader(const YAML::Node& root, std::string source) : root_(root), source_(std::move(source)) {
    if (!root_.IsNull() && !root_.IsMap()) {
      throw ConfigError(Where(source_, root_) + ": config must be a mapping of sections");
    }
  }

  void Section(const std::string& name) {
    section_ = name;
    known_[name];
    cur_.reset();
    if (root_.IsMap()) {
      const YAML::Node n = root_[name];
      if (n.IsDefined()) cur_.reset(n);
    }
    if (!cur_.IsNull() && !cur_.IsMap()) {
      throw ConfigError(Where(source_, cur_) + ": section '" + name + "' must be a mapping");
    }
  }

  template <class T>
  void operator()(const std::string& key, T& field,
                  const std::function<void(const T&)>& check = {}) {
    known_[section_].insert(key);
    if (!cur_.IsMap()) return;
    const YAML::Node& section = cur_;
    const YAML::Node n = section[key];
    if (!n.IsDefined()) return;
    try {
      field = n.as<T>();
      if (check) check(field);
    } catch (const YAML::Exception&) {
      throw ConfigError(Where(source_, n) + ": key '" + section_ + "." + key +
                        "' has a value of the wrong type");
    } catch (const ConfigError& e) {
      throw ConfigError(Where(source_, n) + ": key '" + section_ + "." + key + "': " + e.what());
    }
  }
  void operator()(const std::string& key, std::string& field,
                  void (*check)(const std::string&)) {
    (*this)(key, field, std::function<void(const std::string&)>(check));
  }
  void operator()(const std::string& key, std::vector<std::string>& field,
                  void (*check)(const std::vector<std::string>&)) {
    (*this)(key, field, std::function<void(const std::vector<std::string>&)>(check));
  }

  void Done() {
    if (!root_.IsMap()) return;
    for (const auto& kv : root_) {
      const std::string section = kv.first.as<std::string>();
      auto it = known_.find(section);
      if (it == known_.end()) {
        throw ConfigError(Where(source_, kv.first) + ": unknown section '" + section + "'");
      }
      if (!kv.second.IsMap()) continue;
      for (const auto& entry : kv.second) {
        const std::string key = entry.first.as<std::string>();
        if (!it->second.count(key)) {
          throw ConfigError(Where(source_, entry.first) + ": unknown key '" + section + "." +
                            key + "'");
        }
      }
    }
  }

 private:
  const YAML::Node root_;
  std::string source_;
  std::string section_;
  YAML::Node cur_;
  std::map<std::string, std::set<std::string>> known_;
};

class Writer {
 public:
  Writer() { out_ << YAML::BeginMap; }

  void Section(const std::string& name) {
    if (open_) out_ << YAML::EndMap;
    out_ << YAML::Key << name << YAML::Value << YAML::BeginMap;
    open_ = true;
  }

  template <class T, class Check = int>
  void operator()(const std::string& key, const T& value, Check = {}) {
    out_ << YAML::Key << key << YAML::Value;
    if constexpr (std::is_same_v<T, double>) {
      std::ostringstream s;
      s.precision(17);
      s << value;
      out_ << s.str();
    } else if constexpr (std::is_same_v<T, std::string>) {
      out_ << YAML::DoubleQuoted << value;
    } else if constexpr (std::is_same_v<T, std::vector<std::string>> ||
                         std::is_same_v<T, std::vector<size_t>>) {
      out_ << YAML::Flow << value;
    } else {
      out_ << value;
    }
  }

  void Done() {
    if (open_) out_ << YAML::EndMap;
    out_ << YAML::EndMap;
    open_ = false;
  }

  std::string str() const { return std::string(out_.c_str()) + "\n"; }

 private:
  YAML::Emitter out_;
  bool open_ = false;
};

}  // namespace

void ExperimentConfig::Validate() const {
  data.Validate();
  BuildClusterConfig(cluster).Validate();
  CheckKind(model.kind);
  CheckAggregator(model.aggregator);
  CheckWarmup(train.warmup);
  CheckTrainer(train.trainer);
  CheckSplit(eval.split);
  CheckAggregators(eval.sweep);
  if (train.epochs == 0) throw ConfigError("train.epochs must be >= 1");
  if (train.batch_size == 0) throw ConfigError("train.batch_size must be >= 1");
  if (!(train.lr > 0.0)) throw ConfigError("train.lr must be positive");
  if (train.lr_interval <= 0) throw ConfigError("train.lr_interval must be positive");
  if (paths.out_dir.empty()) throw ConfigError("paths.out_dir must not be empty");
}

ExperimentConfig ParseExperimentConfig(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  ExperimentConfig c;
  Reader r(root, source);
  Visit(c, r);
  c.Validate();
  return c;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream s;
  s << in.rdbuf();
  return ParseExperimentConfig(s.str(), path);
}

std::string ToYaml(const ExperimentConfig& config) {
  ExperimentConfig copy = config;
  Writer w;
  Visit(copy, w);
  return w.str();
}

model::ModelConfig BuildModelConfig(const ModelSection& m, const data::DatasetMeta& meta,
                                    size_t latent_dim) {
  model::ModelConfig c;
  c.schema = model::DefaultSchema(meta, m.image_id_fields);
  c.schema.d_id = m.d_id;
  c.schema.d_raw = m.d_raw;
  c.schema.d_img = m.d_img;
  c.schema.b_max = m.b_max;
  c.kind = m.kind == "prerank" ? model::ModelKind::kPrerank : model::ModelKind::kCtr;
  c.aggregator.kind = model::AggregatorFromName(m.aggregator);
  c.aggregator.attention_hidden = m.attention_hidden;
  c.aggregator.normalize = m.normalize_attention;
  c.use_ad_image = m.use_ad_image;
  c.use_behavior_images = m.use_behavior_images;
  c.image_hidden = m.image_hidden;
  c.mlp_hidden = m.mlp_hidden;
  c.user_tower = m.user_tower;
  c.ad_tower = m.ad_tower;
  c.extractor_seed = m.extractor_seed;
  c.latent_dim = latent_dim;
  c.init_seed = m.init_seed;
  c.Validate();
  return c;
}

ams::ClusterConfig BuildClusterConfig(const ClusterSection& s) {
  ams::ClusterConfig c;
  c.workers = s.workers;
  c.servers = s.servers;
  c.mode = ams::ModeFromName(s.mode);
  c.per_worker_batch = s.per_worker_batch;
  c.deterministic = s.deterministic;
  c.threads = s.threads;
  return c;
}

ams::OptimizerConfig BuildOptimizerConfig(const TrainSection& t) {
  ams::OptimizerConfig o;
  o.lr = {t.lr, t.lr_decay, t.lr_interval};
  o.adam = {t.adam_beta1, t.adam_beta2, t.adam_epsilon};
  return o;
}

}  // namespace dicm::cli

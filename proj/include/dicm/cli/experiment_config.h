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

#ifndef DICM_CLI_EXPERIMENT_CONFIG_H_
#define DICM_CLI_EXPERIMENT_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dicm/ams/nodes.h"
#include "dicm/ams/optimizer.h"
#include "dicm/data/synthetic.h"
#include "dicm/model/config.h"

namespace dicm::cli {

struct ModelSection {
  std::string kind = "ctr";  // ctr | prerank
  std::string aggregator = "attn";
  size_t d_id = 12;
  size_t d_raw = 64;
  size_t d_img = 12;
  size_t b_max = 32;
  size_t attention_hidden = 32;
  bool normalize_attention = true;
  bool use_ad_image = true;
  bool use_behavior_images = true;
  bool image_id_fields = true;  // image ids also as ID-embedding fields
  std::vector<size_t> image_hidden;  // empty = scaled from d_raw
  std::vector<size_t> mlp_hidden = {128, 64};
  std::vector<size_t> user_tower = {64, 16};
  std::vector<size_t> ad_tower = {64, 16};
  uint64_t extractor_seed = 7;
  uint64_t init_seed = 1;
};

struct ClusterSection {
  uint32_t workers = 4;
  uint32_t servers = 2;
  std::string mode = "ams";
  size_t per_worker_batch = 64;
  bool deterministic = true;
  size_t threads = 1;
};

struct TrainSection {
  std::string trainer = "cluster";  // cluster | reference
  size_t epochs = 1;
  size_t batch_size = 256;  // reference trainer only
  double lr = 0.001;
  double lr_decay = 0.9;
  int64_t lr_interval = 24000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  uint64_t seed = 1;
  bool shuffle = true;
  uint64_t max_iterations = 0;
  std::string warmup = "non";  // non | partial | full, applied to paths.init_checkpoint
};

struct PathsSection {
  std::string out_dir = "out";
  std::string data_dir;         // empty: generate from the data section
  std::string checkpoint;       // eval / export / predict input
  std::string init_checkpoint;  // train warm-up source
  std::string table;            // predict: exported inference table
  std::string samples;          // predict: JSONL samples (default: test split)
  std::string scores;           // eval: CSV user,score,label instead of a model
};

struct EvalSection {
  std::string split = "test";         // train | test
  std::vector<std::string> sweep;     // aggregators to train and compare
};

struct AccountingSection {
  size_t max_samples = 0;  // 0 = the whole training split
};

// Sections: data, model, cluster, train, paths, eval, accounting.
struct ExperimentConfig {
  data::SyntheticConfig data;
  ModelSection model;
  ClusterSection cluster;
  TrainSection train;
  PathsSection paths;
  EvalSection eval;
  AccountingSection accounting;

  void Validate() const;  // ConfigError
};

// Parses YAML text. Unknown sections or keys, wrong value types and invalid
// enum names raise ConfigError citing "<source>:<line>" and the dotted key.
ExperimentConfig ParseExperimentConfig(const std::string& text,
                                       const std::string& source = "<config>");
ExperimentConfig LoadExperimentConfig(const std::string& path);  // IoError, ConfigError
// Every key with its resolved value; parses back to an equal config.
std::string ToYaml(const ExperimentConfig& config);

model::ModelConfig BuildModelConfig(const ModelSection& m, const data::DatasetMeta& meta,
                                    size_t latent_dim);
ams::ClusterConfig BuildClusterConfig(const ClusterSection& c);
ams::OptimizerConfig BuildOptimizerConfig(const TrainSection& t);

}  // namespace dicm::cli

#endif  // DICM_CLI_EXPERIMENT_CONFIG_H_

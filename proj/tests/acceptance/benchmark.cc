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

#include "benchmark.h"

#include "dicm/metrics/metrics.h"
#include "dicm/model/dicm_model.h"

namespace dicm::bench {

data::SyntheticConfig BenchmarkData(double visual_coef, uint64_t seed) {
  data::SyntheticConfig c;
  c.users = 2000;
  c.items = 2000;
  c.images = 2000;
  c.categories = 12;
  c.scenarios = 4;
  c.latent_dim = 4;
  c.visual_coef = visual_coef;
  c.behavior_sharpness = 5.0;
  c.behaviors_min = 20;
  c.behavior_cap = 60;
  c.max_behaviors = 32;
  c.days = 3;
  c.test_days = 1;
  c.impressions_per_user_day = 4;
  c.cold_start_fraction = 0.2;
  c.seed = seed;
  return c;
}

model::ModelConfig ArmConfig(const data::Dataset& ds, const Arm& arm) {
  model::ModelConfig c;
  c.schema = model::DefaultSchema(ds.meta, /*image_id_fields=*/false);
  c.schema.d_id = 8;
  c.schema.d_raw = 32;
  c.schema.d_img = 8;
  c.schema.b_max = 32;
  c.kind = arm.kind;
  c.aggregator.kind = model::AggregatorFromName(arm.aggregator);
  c.aggregator.attention_hidden = 16;
  c.use_ad_image = arm.ad_image;
  c.use_behavior_images = arm.behavior_images;
  c.image_hidden = {32, 16};
  c.mlp_hidden = {32, 16};
  c.user_tower = {32, 16};
  c.ad_tower = {32, 16};
  c.latent_dim = ds.meta.latent_dim;
  c.Validate();
  return c;
}

ams::OptimizerConfig BenchOptimizer(const Schedule& schedule) {
  ams::OptimizerConfig o;
  o.lr = {schedule.lr, 1.0, 1000};
  return o;
}

ArmResult Evaluate(const model::DicmModel& model, const data::Dataset& ds,
                   std::span<const data::Sample> test) {
  const auto extractor = model::MakeExtractor(model.config());
  const auto logits = model::PredictLogits(model, extractor, ds.images, test);
  std::vector<int> labels;
  std::vector<metrics::ScoredImpression> scored;
  for (size_t i = 0; i < test.size(); ++i) {
    labels.push_back(test[i].label);
    scored.push_back({test[i].user, logits[i], test[i].label});
  }
  return {metrics::Auc(logits, labels), metrics::Gauc(scored)};
}

ams::TrainResult Train(const model::DicmModel& initial, const data::Dataset& ds,
                       std::span<const data::Sample> train, const Schedule& schedule,
                       const ams::OptimizerState* state) {
  ams::TrainOptions options;
  options.batch_size = schedule.batch_size;
  options.epochs = schedule.epochs;
  options.seed = schedule.seed;
  return ams::TrainReference(initial, ds.images, train, BenchOptimizer(schedule), options,
                             state);
}

ArmResult RunArm(const data::Dataset& ds, const Arm& arm, const Schedule& schedule) {
  ArmResult mean;
  for (uint64_t r = 1; r <= schedule.replicas; ++r) {
    model::ModelConfig config = ArmConfig(ds, arm);
    config.init_seed = r;
    const auto trained = Train(model::DicmModel(config), ds, ds.train, schedule);
    const ArmResult one = Evaluate(trained.model, ds, ds.test);
    mean.auc += one.auc / static_cast<double>(schedule.replicas);
    mean.gauc += one.gauc / static_cast<double>(schedule.replicas);
  }
  return mean;
}

}  // namespace dicm::bench

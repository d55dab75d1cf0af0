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

#include "dicm/ams/training.h"

#include <sstream>

#include "dicm/ams/reference_trainer.h"
#include "dicm/data/minibatch.h"

namespace dicm::ams {

std::string LogCsv(std::span<const TrainLogRow> log) {
  std::ostringstream out;
  out.precision(17);
  out << "iteration,loss,lr\n";
  for (const auto& r : log) out << r.iteration << ',' << r.loss << ',' << r.lr << '\n';
  return out.str();
}

namespace {

// Calls |step| for every batch until epochs or max_iterations run out.
void ForEachBatch(std::span<const data::Sample> train, size_t batch_size,
                  const TrainOptions& options,
                  const std::function<void(const std::vector<data::Sample>&)>& step) {
  data::MinibatchIterator it(train, batch_size, options.seed, options.shuffle);
  std::vector<data::Sample> batch;
  uint64_t done = 0;
  for (size_t e = 0; e < options.epochs; ++e) {
    while (it.Next(&batch)) {
      if (options.max_iterations != 0 && done >= options.max_iterations) return;
      step(batch);
      ++done;
    }
  }
}

}  // namespace

TrainResult TrainReference(const model::DicmModel& initial, const data::ImageFeatureStore& store,
                           std::span<const data::Sample> train, const OptimizerConfig& optimizer,
                           const TrainOptions& options, const OptimizerState* initial_state) {
  ReferenceTrainer trainer(initial, store, optimizer,
                           initial_state ? *initial_state : OptimizerState{});
  std::vector<TrainLogRow> log;
  ForEachBatch(train, options.batch_size, options, [&](const std::vector<data::Sample>& batch) {
    const uint64_t t = static_cast<uint64_t>(trainer.iteration());
    const double lr = optimizer.lr.At(trainer.iteration());
    log.push_back({t, trainer.Step(batch), lr});
  });
  return {trainer.model(), trainer.optimizer(), std::move(log), {}};
}

TrainResult TrainCluster(const ClusterConfig& cluster, const model::DicmModel& initial,
                         const data::ImageFeatureStore& store,
                         std::span<const data::Sample> train, const OptimizerConfig& optimizer,
                         const TrainOptions& options, const OptimizerState* initial_state) {
  Cluster c(cluster, initial, store, optimizer, initial_state);
  std::vector<TrainLogRow> log;
  ForEachBatch(train, cluster.workers * cluster.per_worker_batch, options,
               [&](const std::vector<data::Sample>& batch) {
                 const auto stats = c.Step(batch);
                 log.push_back({stats.iteration, stats.loss, stats.lr});
               });
  return {c.AssembleModel(), c.AssembleOptimizer(), std::move(log), c.meter()};
}

}  // namespace dicm::ams

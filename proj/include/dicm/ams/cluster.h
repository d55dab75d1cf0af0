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

#ifndef DICM_AMS_CLUSTER_H_
#define DICM_AMS_CLUSTER_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "dicm/ams/nodes.h"
#include "dicm/ams/optimizer.h"
#include "dicm/ams/transport.h"

namespace dicm::ams {

struct IterationStats {
  uint64_t iteration = 0;
  double loss = 0.0;  // mean over the union batch
  double lr = 0.0;
  uint64_t unique_images = 0;    // distinct image ids across all workers
  uint64_t server_forwards = 0;  // image-model forwards across all servers
  std::vector<uint32_t> replica_hashes;
};

// M workers and N servers over one in-process Network. Each Step runs the
// synchronous phases: request, serve, compute and push, worker-model sync,
// server accumulate, server-model sync.
class Cluster {
 public:
  Cluster(ClusterConfig config, const model::DicmModel& initial,
          const data::ImageFeatureStore& store, OptimizerConfig optimizer,
          const OptimizerState* initial_state = nullptr);

  // Splits |union_batch| into M contiguous slices; worker r gets
  // [r*n/M, (r+1)*n/M).
  IterationStats Step(std::span<const data::Sample> union_batch);

  // Current global model / optimizer state collected from the nodes.
  model::DicmModel AssembleModel() const;
  OptimizerState AssembleOptimizer() const;

  const ClusterConfig& config() const { return config_; }
  uint64_t iteration() const { return iteration_; }
  TrafficMeter meter() const { return net_.meter(); }
  Network& network() { return net_; }
  const WorkerNode& worker(uint32_t i) const { return *workers_.at(i); }
  const ServerNode& server(uint32_t i) const { return *servers_.at(i); }

 private:
  // Runs |fn(i)| for i in [0, count), on up to config_.threads threads.
  void RunPhase(uint32_t count, const std::function<void(uint32_t)>& fn);

  ClusterConfig config_;
  OptimizerConfig optimizer_;
  Network net_;
  std::vector<std::unique_ptr<WorkerNode>> workers_;
  std::vector<std::unique_ptr<ServerNode>> servers_;
  uint64_t iteration_ = 0;
};

}  // namespace dicm::ams

#endif  // DICM_AMS_CLUSTER_H_

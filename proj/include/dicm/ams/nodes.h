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

#ifndef DICM_AMS_NODES_H_
#define DICM_AMS_NODES_H_

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dicm/ams/batch_stats.h"
#include "dicm/ams/message.h"
#include "dicm/ams/optimizer.h"
#include "dicm/ams/transport.h"
#include "dicm/data/image_store.h"
#include "dicm/data/sample.h"
#include "dicm/model/dicm_model.h"

namespace dicm::ams {

// Test hooks that break the protocol on purpose.
struct FaultInjection {
  int drop_barrier_from_worker = -1;
  int drop_embedding_from_server = -1;  // last id of every response is omitted
};

struct ClusterConfig {
  uint32_t workers = 1;
  uint32_t servers = 1;
  Mode mode = Mode::kAms;
  size_t per_worker_batch = 64;
  bool deterministic = true;
  size_t threads = 1;
  FaultInjection faults;

  void Validate() const;  // ConfigError
};

// Flattens tensors into one vector and back.
std::vector<double> Flatten(const std::vector<numerics::Tensor>& tensors);

class ServerNode {
 public:
  ServerNode(uint32_t index, const ClusterConfig& config, const model::DicmModel& initial,
             const OptimizerState& initial_state, const data::ImageFeatureStore& store,
             const OptimizerConfig& optimizer);

  uint32_t index() const { return index_; }
  bool OwnsImage(uint64_t image_id) const;
  bool OwnsKey(const IdKey& key) const;

  // Answers EmbedRequest / FeatureRequest / IdParamPull for |iteration|.
  // Each distinct image id is embedded once per iteration.
  void Serve(Network& net, uint64_t iteration);
  // Collects pushes and barriers, backpropagates embedding gradients through
  // the cached forward, applies ID-row Adam and ships the local image-model
  // gradient to server 0. BarrierTimeout if a worker's barrier is missing.
  void Accumulate(Network& net, uint64_t iteration, double lr);
  // Server 0: sums local gradients in ascending server order and broadcasts.
  void ReduceSync(Network& net, uint64_t iteration);
  // Applies the summed image-model gradient with Adam.
  void ApplySync(Network& net, uint64_t iteration, double lr);

  // Embeds |ids| outside the protocol (no caching). RoutingError for ids
  // owned by another shard.
  std::vector<double> Embed(std::span<const uint64_t> ids) const;

  uint32_t ReplicaHash() const;  // crc32 over the image-model tensors
  uint64_t forwards_last_iteration() const { return forwards_; }
  uint64_t features_served_last_iteration() const { return features_served_; }
  size_t owned_images() const { return owned_images_; }
  size_t owned_rows() const { return rows_.size(); }

  const model::DicmModel& replica() const { return replica_; }
  const std::vector<numerics::AdamState>& image_state() const { return image_state_; }
  // Writes owned ID rows (and their Adam state when |state| is set).
  void ExportRows(model::DicmModel& into, OptimizerState* state) const;

 private:
  struct Row {
    std::vector<double> value;
    std::vector<double> m;
    std::vector<double> v;
    int64_t steps = 0;
  };

  uint32_t index_;
  ClusterConfig config_;
  OptimizerConfig optimizer_;
  const data::ImageFeatureStore& store_;
  model::FixedExtractor extractor_;
  model::DicmModel replica_;
  std::vector<numerics::Tensor*> image_params_;
  std::vector<numerics::AdamState> image_state_;
  std::unordered_map<IdKey, Row, IdKeyHash> rows_;
  size_t owned_images_ = 0;

  std::unique_ptr<numerics::Graph> graph_;
  numerics::Binder binder_;
  std::map<uint64_t, numerics::Var> cache_;
  std::vector<IdKey> pulled_;
  std::vector<double> gradient_;
  uint64_t forwards_ = 0;
  uint64_t features_served_ = 0;
};

class WorkerNode {
 public:
  WorkerNode(uint32_t index, const ClusterConfig& config, const model::DicmModel& initial,
             const OptimizerState& initial_state, const data::ImageFeatureStore& store,
             const OptimizerConfig& optimizer);

  uint32_t index() const { return index_; }

  // Deduplicates the slice's image ids and ID keys and sends requests to
  // the owning servers. A slice without images sends no image request.
  void Begin(Network& net, uint64_t iteration, std::span<const data::Sample> slice,
             size_t global_batch);
  // Builds the local graph from the responses, backpropagates, and pushes
  // embedding / ID gradients plus a barrier to every server. ProtocolError
  // when a response lacks a requested id.
  void Compute(Network& net, uint64_t iteration);
  // Worker 0: gather-sum-broadcast of worker-model gradients.
  void ReduceSync(Network& net, uint64_t iteration);
  void ApplySync(Network& net, uint64_t iteration, double lr);

  double last_loss() const { return loss_; }
  const std::vector<uint64_t>& requested_images() const { return images_; }
  const std::vector<IdKey>& requested_keys() const { return keys_; }
  // Gradient pushed per image id in the last iteration.
  const std::map<uint64_t, std::vector<double>>& pushed_embedding_grads() const {
    return pushed_;
  }
  // Worker-model tensors and their summed gradients from the last iteration.
  std::vector<const numerics::Tensor*> owned_params() const;
  const std::vector<double>& local_gradient() const { return gradient_; }

  const model::DicmModel& model() const { return model_; }
  const std::vector<numerics::AdamState>& owned_state() const { return state_; }
  static std::vector<std::string> OwnedGroups(Mode mode);

 private:
  uint32_t index_;
  ClusterConfig config_;
  OptimizerConfig optimizer_;
  const data::ImageFeatureStore& store_;
  model::FixedExtractor extractor_;
  model::DicmModel model_;
  std::vector<numerics::Tensor*> params_;
  std::vector<numerics::AdamState> state_;

  std::vector<data::Sample> slice_;
  size_t global_batch_ = 1;
  std::vector<uint64_t> images_;
  std::vector<IdKey> keys_;
  std::map<uint64_t, std::vector<double>> pushed_;
  std::vector<double> gradient_;
  std::vector<double> total_;
  double loss_ = 0.0;
};

}  // namespace dicm::ams

#endif  // DICM_AMS_NODES_H_

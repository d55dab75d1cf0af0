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

#include "dicm/ams/cluster.h"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>

#include "dicm/common/error.h"

namespace dicm::ams {

Cluster::Cluster(ClusterConfig config, const model::DicmModel& initial,
                 const data::ImageFeatureStore& store, OptimizerConfig optimizer,
                 const OptimizerState* initial_state)
    : config_(std::move(config)),
      optimizer_(optimizer),
      net_((config_.Validate(), config_.workers), config_.servers, config_.deterministic) {
  const OptimizerState fresh = initial_state ? *initial_state : OptimizerState::Fresh(initial);
  if (!fresh.Matches(initial)) throw ContractError("optimizer state does not match model");
  for (uint32_t s = 0; s < config_.servers; ++s) {
    servers_.push_back(
        std::make_unique<ServerNode>(s, config_, initial, fresh, store, optimizer_));
  }
  for (uint32_t w = 0; w < config_.workers; ++w) {
    workers_.push_back(
        std::make_unique<WorkerNode>(w, config_, initial, fresh, store, optimizer_));
  }
}

void Cluster::RunPhase(uint32_t count, const std::function<void(uint32_t)>& fn) {
  const size_t threads = std::min<size_t>(std::max<size_t>(config_.threads, 1), count);
  if (threads <= 1) {
    for (uint32_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (uint32_t i = static_cast<uint32_t>(t); i < count; i += static_cast<uint32_t>(threads)) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

IterationStats Cluster::Step(std::span<const data::Sample> union_batch) {
  if (union_batch.empty()) throw ContractError("empty union batch");
  const uint64_t t = iteration_;
  const double lr = optimizer_.lr.At(static_cast<int64_t>(t));
  const size_t n = union_batch.size();
  const uint32_t m = config_.workers;

  RunPhase(m, [&](uint32_t r) {
    const size_t lo = r * n / m, hi = (r + 1) * n / m;
    workers_[r]->Begin(net_, t, union_batch.subspan(lo, hi - lo), n);
  });
  RunPhase(config_.servers, [&](uint32_t s) { servers_[s]->Serve(net_, t); });
  RunPhase(m, [&](uint32_t r) { workers_[r]->Compute(net_, t); });
  workers_[0]->ReduceSync(net_, t);
  RunPhase(m, [&](uint32_t r) { workers_[r]->ApplySync(net_, t, lr); });
  RunPhase(config_.servers, [&](uint32_t s) { servers_[s]->Accumulate(net_, t, lr); });
  servers_[0]->ReduceSync(net_, t);
  RunPhase(config_.servers, [&](uint32_t s) { servers_[s]->ApplySync(net_, t, lr); });

  IterationStats stats;
  stats.iteration = t;
  stats.lr = lr;
  std::vector<uint64_t> ids;
  for (const auto& w : workers_) {
    stats.loss += w->last_loss();
    ids.insert(ids.end(), w->requested_images().begin(), w->requested_images().end());
  }
  std::sort(ids.begin(), ids.end());
  stats.unique_images = static_cast<uint64_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
  for (const auto& s : servers_) {
    stats.server_forwards += s->forwards_last_iteration();
    stats.replica_hashes.push_back(s->ReplicaHash());
  }
  ++iteration_;
  return stats;
}

model::DicmModel Cluster::AssembleModel() const {
  model::DicmModel out = workers_[0]->model();
  auto dst = out.Groups();
  if (config_.mode == Mode::kAms) {
    const auto src = servers_[0]->replica().Groups();
    for (size_t p = 0; p < dst[1].params.size(); ++p) {
      *dst[1].params[p].tensor = *src[1].params[p].tensor;
    }
  }
  for (const auto& s : servers_) s->ExportRows(out, nullptr);
  return out;
}

OptimizerState Cluster::AssembleOptimizer() const {
  const model::DicmModel shape = workers_[0]->model();
  OptimizerState state = OptimizerState::Fresh(shape);
  const auto groups = shape.Groups();
  const auto owned = WorkerNode::OwnedGroups(config_.mode);
  size_t k = 0;
  for (size_t g = 0; g < groups.size(); ++g) {
    if (std::find(owned.begin(), owned.end(), groups[g].name) == owned.end()) continue;
    for (size_t p = 0; p < groups[g].params.size(); ++p) {
      state.states[g][p] = workers_[0]->owned_state()[k++];
    }
  }
  if (config_.mode == Mode::kAms) state.states[1] = servers_[0]->image_state();
  model::DicmModel scratch = shape;
  for (const auto& s : servers_) s->ExportRows(scratch, &state);
  return state;
}

}  // namespace dicm::ams

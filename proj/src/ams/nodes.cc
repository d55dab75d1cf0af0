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

#include "dicm/ams/nodes.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "dicm/common/bytes.h"
#include "dicm/common/error.h"

namespace dicm::ams {

using model::DicmModel;
using numerics::Binder;
using numerics::Graph;
using numerics::Tensor;
using numerics::Var;

void ClusterConfig::Validate() const {
  if (workers == 0 || servers == 0) throw ConfigError("cluster needs >= 1 worker and >= 1 server");
  if (per_worker_batch == 0) throw ConfigError("per-worker batch size must be >= 1");
}

std::vector<double> Flatten(const std::vector<Tensor>& tensors) {
  std::vector<double> out;
  for (const auto& t : tensors) out.insert(out.end(), t.data().begin(), t.data().end());
  return out;
}

namespace {

void CheckIteration(const Message& m, uint64_t iteration, const std::string& who) {
  if (m.iteration != iteration) {
    throw ProtocolError(who + ": " + TagName(m.tag) + " from node " + std::to_string(m.sender) +
                        " is for iteration " + std::to_string(m.iteration) + ", expected " +
                        std::to_string(iteration));
  }
}

void CheckFinite(std::span<const double> v, const std::string& what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NonFiniteError("non-finite " + what);
  }
}

// Applies Adam to |params| using consecutive slices of |flat| as gradients.
void ApplyFlat(const std::vector<Tensor*>& params, std::vector<numerics::AdamState>& states,
               const std::vector<double>& flat, double lr, const numerics::AdamConfig& adam) {
  size_t total = 0;
  for (const Tensor* p : params) total += p->size();
  if (flat.size() != total) {
    throw ProtocolError("model gradient has " + std::to_string(flat.size()) +
                        " values, expected " + std::to_string(total));
  }
  CheckFinite(flat, "model gradient");
  size_t off = 0;
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    Tensor g(p.shape(), std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(off),
                                            flat.begin() + static_cast<std::ptrdiff_t>(off + p.size())));
    numerics::AdamStep(p, g, states[i], lr, adam);
    off += p.size();
  }
}

std::vector<uint32_t> Sizes(const std::vector<Tensor*>& params) {
  std::vector<uint32_t> sizes;
  for (const Tensor* p : params) sizes.push_back(static_cast<uint32_t>(p->size()));
  return sizes;
}

void AddInto(std::vector<double>& acc, std::span<const double> v) {
  if (acc.empty()) acc.assign(v.size(), 0.0);
  for (size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
}

// Leaves built from values pulled off the servers.
class PulledInputs : public model::SampleInputs {
 public:
  PulledInputs(const DicmModel& model, const Binder& params, Mode mode,
               const std::map<IdKey, std::vector<double>>& rows,
               const std::unordered_map<uint64_t, std::vector<double>>& images,
               const model::FixedExtractor& extractor, const data::ImageFeatureStore& store)
      : model_(model), params_(params), mode_(mode), rows_(rows), images_(images),
        extractor_(extractor), store_(store) {}

  Var Field(Graph& g, size_t field, std::span<const uint64_t> ids) override {
    if (ids.empty()) return g.Constant(Tensor({model_.schema().d_id}));
    std::vector<Var> vars;
    for (uint64_t id : ids) {
      const IdKey key{static_cast<uint32_t>(field), id};
      auto it = row_vars_.find(key);
      if (it == row_vars_.end()) {
        auto src = rows_.find(key);
        if (src == rows_.end()) {
          throw ProtocolError("no ID row pulled for field " + std::to_string(field) + " row " +
                              std::to_string(id));
        }
        it = row_vars_.emplace(key, g.Input(Tensor::Vector(src->second))).first;
      }
      vars.push_back(it->second);
    }
    return vars.size() == 1 ? vars[0] : g.Sum(vars);
  }

  Var Image(Graph& g, uint64_t image_id) override {
    auto it = image_vars_.find(image_id);
    if (it != image_vars_.end()) return it->second;
    Var v;
    if (mode_ == Mode::kStoreInWorker) {
      v = model_.EmbedImage(g, params_, g.Constant(extractor_.Extract(store_, image_id)));
    } else {
      auto src = images_.find(image_id);
      if (src == images_.end()) {
        throw ProtocolError("no image data received for image id " + std::to_string(image_id));
      }
      v = mode_ == Mode::kAms
              ? g.Input(Tensor::Vector(src->second))
              : model_.EmbedImage(g, params_, g.Constant(Tensor::Vector(src->second)));
    }
    image_vars_.emplace(image_id, v);
    return v;
  }

  Var RowVar(const IdKey& key) const {
    auto it = row_vars_.find(key);
    return it == row_vars_.end() ? Var{} : it->second;
  }
  Var ImageVar(uint64_t id) const {
    auto it = image_vars_.find(id);
    return it == image_vars_.end() ? Var{} : it->second;
  }

 private:
  const DicmModel& model_;
  const Binder& params_;
  Mode mode_;
  const std::map<IdKey, std::vector<double>>& rows_;
  const std::unordered_map<uint64_t, std::vector<double>>& images_;
  const model::FixedExtractor& extractor_;
  const data::ImageFeatureStore& store_;
  std::map<IdKey, Var> row_vars_;
  std::unordered_map<uint64_t, Var> image_vars_;
};

}  // namespace

// ---------------------------------------------------------------------------
// ServerNode

ServerNode::ServerNode(uint32_t index, const ClusterConfig& config, const DicmModel& initial,
                       const OptimizerState& initial_state, const data::ImageFeatureStore& store,
                       const OptimizerConfig& optimizer)
    : index_(index),
      config_(config),
      optimizer_(optimizer),
      store_(store),
      extractor_(model::MakeExtractor(initial.config())),
      replica_(initial) {
  auto groups = replica_.Groups();
  if (config_.mode == Mode::kAms) {
    for (const auto& p : groups[1].params) image_params_.push_back(p.tensor);
    image_state_ = initial_state.states[1];
  }
  const size_t d = initial.schema().d_id;
  for (size_t f = 0; f < initial.schema().fields.size(); ++f) {
    const Tensor& table = initial.id_table(f);
    const numerics::AdamState& st = initial_state.states[0][f];
    for (uint64_t r = 0; r < table.rows(); ++r) {
      const IdKey key{static_cast<uint32_t>(f), r};
      if (!OwnsKey(key)) continue;
      Row row;
      row.value.assign(table.row(r).begin(), table.row(r).end());
      row.m.assign(st.m.row(r).begin(), st.m.row(r).end());
      row.v.assign(st.v.row(r).begin(), st.v.row(r).end());
      row.steps = st.steps[r];
      if (row.value.size() != d) throw DimensionError("ID table width mismatch");
      rows_.emplace(key, std::move(row));
    }
  }
  if (config_.mode != Mode::kStoreInWorker) {
    for (uint64_t id = 0; id < store.size(); ++id) owned_images_ += OwnsImage(id) ? 1 : 0;
  }
}

bool ServerNode::OwnsImage(uint64_t image_id) const {
  return ShardOfImage(image_id, config_.servers) == index_;
}

bool ServerNode::OwnsKey(const IdKey& key) const {
  return ShardOfKey(key, config_.servers) == index_;
}

std::vector<double> ServerNode::Embed(std::span<const uint64_t> ids) const {
  std::vector<double> out;
  for (uint64_t id : ids) {
    if (!OwnsImage(id)) {
      throw RoutingError("server " + std::to_string(index_) + " does not own image id " +
                         std::to_string(id));
    }
    Tensor e = replica_.EmbedImageValue(extractor_.Extract(store_, id));
    out.insert(out.end(), e.data().begin(), e.data().end());
  }
  return out;
}

void ServerNode::Serve(Network& net, uint64_t iteration) {
  const std::string who = "server " + std::to_string(index_);
  auto msgs = net.Drain(Server(index_), {Tag::kEmbedRequest, Tag::kFeatureRequest, Tag::kIdParamPull});
  graph_ = std::make_unique<Graph>();
  binder_ = Binder();
  cache_.clear();
  pulled_.clear();
  forwards_ = 0;
  features_served_ = 0;
  if (config_.mode == Mode::kAms && !image_params_.empty()) {
    replica_.Bind(*graph_, binder_, model::kImageGroup, true);
  }

  std::set<uint64_t> wanted;
  for (const auto& m : msgs) {
    CheckIteration(m, iteration, who);
    if (m.tag == Tag::kEmbedRequest) {
      if (config_.mode != Mode::kAms) throw ProtocolError(who + ": EmbedRequest outside ams mode");
      wanted.insert(m.ids.begin(), m.ids.end());
    }
  }
  for (uint64_t id : wanted) {
    if (!OwnsImage(id)) {
      throw RoutingError(who + " does not own image id " + std::to_string(id));
    }
    Var raw = graph_->Constant(extractor_.Extract(store_, id));
    cache_[id] = replica_.EmbedImage(*graph_, binder_, raw);
    ++forwards_;
  }

  const auto& schema = replica_.schema();
  for (const auto& m : msgs) {
    Message resp;
    resp.iteration = iteration;
    switch (m.tag) {
      case Tag::kEmbedRequest: {
        resp.tag = Tag::kEmbedResponse;
        resp.dim = static_cast<uint32_t>(schema.d_img);
        size_t n = m.ids.size();
        if (config_.faults.drop_embedding_from_server == static_cast<int>(index_) && n > 0) --n;
        for (size_t i = 0; i < n; ++i) {
          const Tensor& e = graph_->Value(cache_.at(m.ids[i]));
          resp.ids.push_back(m.ids[i]);
          resp.values.insert(resp.values.end(), e.data().begin(), e.data().end());
        }
        break;
      }
      case Tag::kFeatureRequest: {
        if (config_.mode != Mode::kStoreInServer) {
          throw ProtocolError(who + ": FeatureRequest outside store-in-server mode");
        }
        resp.tag = Tag::kFeatureResponse;
        resp.dim = static_cast<uint32_t>(schema.d_raw);
        for (uint64_t id : m.ids) {
          if (!OwnsImage(id)) {
            throw RoutingError(who + " does not own image id " + std::to_string(id));
          }
          Tensor raw = extractor_.Extract(store_, id);
          resp.ids.push_back(id);
          resp.values.insert(resp.values.end(), raw.data().begin(), raw.data().end());
          ++features_served_;
        }
        break;
      }
      case Tag::kIdParamPull: {
        resp.tag = Tag::kIdParamRows;
        resp.dim = static_cast<uint32_t>(schema.d_id);
        for (const IdKey& key : m.keys) {
          auto it = rows_.find(key);
          if (it == rows_.end()) {
            throw RoutingError(who + " does not own ID key (" + std::to_string(key.field) + ", " +
                               std::to_string(key.row) + ")");
          }
          resp.keys.push_back(key);
          resp.values.insert(resp.values.end(), it->second.value.begin(), it->second.value.end());
          pulled_.push_back(key);
        }
        break;
      }
      default:
        break;
    }
    net.Send(Server(index_), Worker(m.sender), std::move(resp));
  }
  std::sort(pulled_.begin(), pulled_.end());
  pulled_.erase(std::unique(pulled_.begin(), pulled_.end()), pulled_.end());
}

void ServerNode::Accumulate(Network& net, uint64_t iteration, double lr) {
  const std::string who = "server " + std::to_string(index_);
  auto msgs = net.Drain(Server(index_), {Tag::kEmbedGradPush, Tag::kIdParamPush, Tag::kBarrier});
  uint32_t barriers = 0;
  std::map<uint64_t, std::vector<double>> embed_grads;
  std::map<IdKey, std::vector<double>> row_grads;
  const auto& schema = replica_.schema();
  for (const auto& m : msgs) {
    CheckIteration(m, iteration, who);
    if (m.tag == Tag::kBarrier) {
      ++barriers;
    } else if (m.tag == Tag::kEmbedGradPush) {
      if (m.dim != schema.d_img) throw ProtocolError(who + ": embedding gradient width mismatch");
      for (size_t i = 0; i < m.ids.size(); ++i) {
        if (!cache_.count(m.ids[i])) {
          throw ProtocolError(who + ": gradient for image id " + std::to_string(m.ids[i]) +
                              " that was not embedded this iteration");
        }
        AddInto(embed_grads[m.ids[i]],
                std::span<const double>(m.values).subspan(i * m.dim, m.dim));
      }
    } else {
      if (m.dim != schema.d_id) throw ProtocolError(who + ": ID gradient width mismatch");
      for (size_t i = 0; i < m.keys.size(); ++i) {
        if (!std::binary_search(pulled_.begin(), pulled_.end(), m.keys[i])) {
          throw ProtocolError(who + ": gradient for an ID row that was not pulled");
        }
        AddInto(row_grads[m.keys[i]],
                std::span<const double>(m.values).subspan(i * m.dim, m.dim));
      }
    }
  }
  if (barriers != config_.workers) {
    throw BarrierTimeout(who + " received " + std::to_string(barriers) + " of " +
                         std::to_string(config_.workers) + " barriers for iteration " +
                         std::to_string(iteration));
  }

  if (config_.mode == Mode::kAms) {
    std::vector<std::pair<Var, Tensor>> seeds;
    for (auto& [id, grad] : embed_grads) {
      CheckFinite(grad, "embedding gradient");
      seeds.emplace_back(cache_.at(id), Tensor::Vector(grad));
    }
    if (!seeds.empty()) graph_->Backward(seeds);
    std::vector<Tensor> grads;
    for (Tensor* p : image_params_) {
      grads.push_back(!seeds.empty() && binder_.Contains(*p) ? graph_->Grad(binder_(*p))
                                                              : Tensor(p->shape()));
    }
    gradient_ = Flatten(grads);
  }

  const std::vector<double> zero(schema.d_id, 0.0);
  for (const IdKey& key : pulled_) {
    auto it = row_grads.find(key);
    const std::vector<double>& g = it == row_grads.end() ? zero : it->second;
    CheckFinite(g, "ID gradient");
    Row& row = rows_.at(key);
    numerics::AdamUpdate(row.value, g, row.m, row.v, ++row.steps, lr, optimizer_.adam);
  }

  if (config_.mode == Mode::kAms && index_ != 0) {
    Message m;
    m.tag = Tag::kServerSync;
    m.iteration = iteration;
    m.sizes = Sizes(image_params_);
    m.values = gradient_;
    net.Send(Server(index_), Server(0), std::move(m));
  }
}

void ServerNode::ReduceSync(Network& net, uint64_t iteration) {
  if (config_.mode != Mode::kAms || config_.servers == 1) return;
  auto msgs = net.Drain(Server(index_), {Tag::kServerSync});
  if (msgs.size() != config_.servers - 1) {
    throw BarrierTimeout("server 0 received " + std::to_string(msgs.size()) + " of " +
                         std::to_string(config_.servers - 1) + " server syncs");
  }
  std::sort(msgs.begin(), msgs.end(),
            [](const Message& a, const Message& b) { return a.sender < b.sender; });
  for (const auto& m : msgs) {
    CheckIteration(m, iteration, "server 0");
    if (m.values.size() != gradient_.size()) throw ProtocolError("server sync size mismatch");
    AddInto(gradient_, m.values);
  }
  for (uint32_t s = 1; s < config_.servers; ++s) {
    Message m;
    m.tag = Tag::kServerSync;
    m.iteration = iteration;
    m.sizes = Sizes(image_params_);
    m.values = gradient_;
    net.Send(Server(0), Server(s), std::move(m));
  }
}

void ServerNode::ApplySync(Network& net, uint64_t iteration, double lr) {
  if (config_.mode != Mode::kAms) return;
  if (index_ != 0) {
    auto msgs = net.Drain(Server(index_), {Tag::kServerSync});
    if (msgs.size() != 1 || msgs[0].sender != 0) {
      throw ProtocolError("server " + std::to_string(index_) + " expected one broadcast from server 0");
    }
    CheckIteration(msgs[0], iteration, "server " + std::to_string(index_));
    gradient_ = std::move(msgs[0].values);
  }
  ApplyFlat(image_params_, image_state_, gradient_, lr, optimizer_.adam);
}

uint32_t ServerNode::ReplicaHash() const {
  ByteWriter w;
  for (const Tensor* p : image_params_) {
    for (double v : p->data()) w.F64(v);
  }
  return Crc32(w.buffer());
}

void ServerNode::ExportRows(DicmModel& into, OptimizerState* state) const {
  for (const auto& [key, row] : rows_) {
    auto dst = into.id_table(key.field).row(key.row);
    std::copy(row.value.begin(), row.value.end(), dst.begin());
    if (state) {
      auto& st = state->states[0][key.field];
      std::copy(row.m.begin(), row.m.end(), st.m.row(key.row).begin());
      std::copy(row.v.begin(), row.v.end(), st.v.row(key.row).begin());
      st.steps[key.row] = row.steps;
    }
  }
}

// ---------------------------------------------------------------------------
// WorkerNode

std::vector<std::string> WorkerNode::OwnedGroups(Mode mode) {
  if (mode == Mode::kAms) return {model::kMlpGroup, model::kAttentionGroup};
  return {model::kImageGroup, model::kMlpGroup, model::kAttentionGroup};
}

WorkerNode::WorkerNode(uint32_t index, const ClusterConfig& config, const DicmModel& initial,
                       const OptimizerState& initial_state, const data::ImageFeatureStore& store,
                       const OptimizerConfig& optimizer)
    : index_(index),
      config_(config),
      optimizer_(optimizer),
      store_(store),
      extractor_(model::MakeExtractor(initial.config())),
      model_(initial) {
  const auto owned = OwnedGroups(config_.mode);
  auto groups = model_.Groups();
  for (size_t g = 0; g < groups.size(); ++g) {
    if (std::find(owned.begin(), owned.end(), groups[g].name) == owned.end()) continue;
    for (size_t p = 0; p < groups[g].params.size(); ++p) {
      params_.push_back(groups[g].params[p].tensor);
      state_.push_back(initial_state.states[g][p]);
    }
  }
}

std::vector<const Tensor*> WorkerNode::owned_params() const {
  return std::vector<const Tensor*>(params_.begin(), params_.end());
}

void WorkerNode::Begin(Network& net, uint64_t iteration, std::span<const data::Sample> slice,
                       size_t global_batch) {
  slice_.assign(slice.begin(), slice.end());
  for (const auto& s : slice_) model_.schema().CheckSample(s);
  global_batch_ = global_batch;
  loss_ = 0.0;
  pushed_.clear();
  images_ = BatchImageIds(model_.config(), slice_);
  keys_ = BatchIdKeys(model_.schema(), slice_);

  const SampleLoad load = SampleLoadOf(model_.config(), slice_, config_.mode);
  net.RecordSampleLoad(load.bytes, load.elements);

  const uint32_t n = config_.servers;
  std::vector<Message> image_req(n), key_req(n);
  if (config_.mode != Mode::kStoreInWorker) {
    for (uint64_t id : images_) image_req[ShardOfImage(id, n)].ids.push_back(id);
  }
  for (const IdKey& k : keys_) key_req[ShardOfKey(k, n)].keys.push_back(k);
  for (uint32_t s = 0; s < n; ++s) {
    if (!image_req[s].ids.empty()) {
      image_req[s].tag = config_.mode == Mode::kAms ? Tag::kEmbedRequest : Tag::kFeatureRequest;
      image_req[s].iteration = iteration;
      net.Send(Worker(index_), Server(s), std::move(image_req[s]));
    }
    if (!key_req[s].keys.empty()) {
      key_req[s].tag = Tag::kIdParamPull;
      key_req[s].iteration = iteration;
      net.Send(Worker(index_), Server(s), std::move(key_req[s]));
    }
  }
}

void WorkerNode::Compute(Network& net, uint64_t iteration) {
  const std::string who = "worker " + std::to_string(index_);
  auto msgs = net.Drain(Worker(index_),
                        {Tag::kEmbedResponse, Tag::kFeatureResponse, Tag::kIdParamRows});
  const auto& schema = model_.schema();
  std::unordered_map<uint64_t, std::vector<double>> image_values;
  std::map<IdKey, std::vector<double>> rows;
  for (const auto& m : msgs) {
    CheckIteration(m, iteration, who);
    if (m.tag == Tag::kIdParamRows) {
      if (m.dim != schema.d_id) throw ProtocolError(who + ": ID row width mismatch");
      for (size_t i = 0; i < m.keys.size(); ++i) {
        const auto* p = m.values.data() + i * m.dim;
        rows[m.keys[i]].assign(p, p + m.dim);
      }
    } else {
      const size_t want = m.tag == Tag::kEmbedResponse ? schema.d_img : schema.d_raw;
      if (m.dim != want) throw ProtocolError(who + ": " + TagName(m.tag) + " width mismatch");
      for (size_t i = 0; i < m.ids.size(); ++i) {
        const auto* p = m.values.data() + i * m.dim;
        image_values[m.ids[i]].assign(p, p + m.dim);
      }
    }
  }
  if (config_.mode != Mode::kStoreInWorker) {
    for (uint64_t id : images_) {
      if (!image_values.count(id)) {
        throw ProtocolError(who + ": response from server " +
                            std::to_string(ShardOfImage(id, config_.servers)) +
                            " lacks image id " + std::to_string(id));
      }
    }
  }
  for (const IdKey& k : keys_) {
    if (!rows.count(k)) throw ProtocolError(who + ": missing ID row in response");
  }

  Graph g;
  Binder b;
  for (const auto& group : OwnedGroups(config_.mode)) model_.Bind(g, b, group, true);
  PulledInputs inputs(model_, b, config_.mode, rows, image_values, extractor_, store_);
  std::vector<Tensor> grads;
  if (!slice_.empty()) {
    const auto loss = model::BuildBatchLoss(g, model_, b, inputs, slice_,
                                            1.0 / static_cast<double>(global_batch_));
    g.Backward(loss.loss);
    loss_ = g.Value(loss.loss).item();
  }
  for (Tensor* p : params_) {
    grads.push_back(!slice_.empty() ? g.Grad(b(*p)) : Tensor(p->shape()));
  }
  gradient_ = Flatten(grads);

  const uint32_t n = config_.servers;
  std::vector<Message> embed_push(n), row_push(n);
  if (config_.mode == Mode::kAms) {
    for (uint64_t id : images_) {
      Var v = inputs.ImageVar(id);
      Tensor grad = v.valid() ? g.Grad(v) : Tensor({schema.d_img});
      Message& m = embed_push[ShardOfImage(id, n)];
      m.ids.push_back(id);
      m.values.insert(m.values.end(), grad.data().begin(), grad.data().end());
      pushed_[id] = grad.values();
    }
  }
  for (const IdKey& k : keys_) {
    Var v = inputs.RowVar(k);
    Tensor grad = v.valid() ? g.Grad(v) : Tensor({schema.d_id});
    Message& m = row_push[ShardOfKey(k, n)];
    m.keys.push_back(k);
    m.values.insert(m.values.end(), grad.data().begin(), grad.data().end());
  }
  for (uint32_t s = 0; s < n; ++s) {
    if (!embed_push[s].ids.empty()) {
      embed_push[s].tag = Tag::kEmbedGradPush;
      embed_push[s].iteration = iteration;
      embed_push[s].dim = static_cast<uint32_t>(schema.d_img);
      net.Send(Worker(index_), Server(s), std::move(embed_push[s]));
    }
    if (!row_push[s].keys.empty()) {
      row_push[s].tag = Tag::kIdParamPush;
      row_push[s].iteration = iteration;
      row_push[s].dim = static_cast<uint32_t>(schema.d_id);
      net.Send(Worker(index_), Server(s), std::move(row_push[s]));
    }
    if (config_.faults.drop_barrier_from_worker != static_cast<int>(index_)) {
      Message barrier;
      barrier.tag = Tag::kBarrier;
      barrier.iteration = iteration;
      net.Send(Worker(index_), Server(s), std::move(barrier));
    }
  }
  if (index_ != 0) {
    Message m;
    m.tag = Tag::kWorkerSync;
    m.iteration = iteration;
    m.sizes = Sizes(params_);
    m.values = gradient_;
    net.Send(Worker(index_), Worker(0), std::move(m));
  }
}

void WorkerNode::ReduceSync(Network& net, uint64_t iteration) {
  total_ = gradient_;
  if (config_.workers == 1) return;
  auto msgs = net.Drain(Worker(index_), {Tag::kWorkerSync});
  if (msgs.size() != config_.workers - 1) {
    throw BarrierTimeout("worker 0 received " + std::to_string(msgs.size()) + " of " +
                         std::to_string(config_.workers - 1) + " worker syncs");
  }
  std::sort(msgs.begin(), msgs.end(),
            [](const Message& a, const Message& b) { return a.sender < b.sender; });
  for (const auto& m : msgs) {
    CheckIteration(m, iteration, "worker 0");
    if (m.values.size() != total_.size()) throw ProtocolError("worker sync size mismatch");
    AddInto(total_, m.values);
  }
  for (uint32_t w = 1; w < config_.workers; ++w) {
    Message m;
    m.tag = Tag::kWorkerSync;
    m.iteration = iteration;
    m.sizes = Sizes(params_);
    m.values = total_;
    net.Send(Worker(0), Worker(w), std::move(m));
  }
}

void WorkerNode::ApplySync(Network& net, uint64_t iteration, double lr) {
  if (index_ != 0) {
    auto msgs = net.Drain(Worker(index_), {Tag::kWorkerSync});
    if (msgs.size() != 1 || msgs[0].sender != 0) {
      throw ProtocolError("worker " + std::to_string(index_) +
                          " expected one broadcast from worker 0");
    }
    CheckIteration(msgs[0], iteration, "worker " + std::to_string(index_));
    total_ = std::move(msgs[0].values);
  }
  ApplyFlat(params_, state_, total_, lr, optimizer_.adam);
}

}  // namespace dicm::ams

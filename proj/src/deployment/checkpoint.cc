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

#include "dicm/deployment/checkpoint.h"

#include <cstring>

#include "dicm/common/bytes.h"
#include "dicm/common/error.h"

namespace dicm::deployment {

using numerics::Tensor;

namespace {

constexpr uint8_t kDtypeF64 = 1;

void WriteTensor(ByteWriter& w, const Tensor& t) {
  w.U8(kDtypeF64);
  w.U32(static_cast<uint32_t>(t.shape().size()));
  for (size_t d : t.shape()) w.U32(static_cast<uint32_t>(d));
  for (double v : t.data()) w.F64(v);
}

Tensor ReadTensor(ByteReader& r) {
  const uint8_t dtype = r.U8();
  if (dtype != kDtypeF64) throw FormatError("unsupported tensor dtype " + std::to_string(dtype));
  const uint32_t rank = r.U32();
  if (rank > 8) throw FormatError("tensor rank " + std::to_string(rank) + " too large");
  std::vector<size_t> shape(rank);
  size_t n = 1;
  for (auto& d : shape) {
    d = r.U32();
    n *= d;
  }
  if (n > r.remaining() / 8) throw FormatError("truncated tensor");
  std::vector<double> values(n);
  for (double& v : values) v = r.F64();
  return Tensor(std::move(shape), std::move(values));
}

bool SameShape(const Tensor& a, const Tensor& b) { return a.shape() == b.shape(); }

}  // namespace

const GroupRecord* Checkpoint::Find(const std::string& group) const {
  for (const auto& g : groups) {
    if (g.name == group) return &g;
  }
  return nullptr;
}

Checkpoint MakeCheckpoint(const model::DicmModel& model, const ams::OptimizerState& state,
                          uint64_t iteration) {
  if (!state.Matches(model)) throw ContractError("optimizer state does not match model");
  Checkpoint c;
  c.config = model.config();
  c.iteration = iteration;
  const auto groups = model.Groups();
  for (size_t g = 0; g < groups.size(); ++g) {
    GroupRecord rec{groups[g].name, {}};
    for (size_t p = 0; p < groups[g].params.size(); ++p) {
      rec.tensors.push_back(
          {groups[g].params[p].name, *groups[g].params[p].tensor, state.states[g][p]});
    }
    c.groups.push_back(std::move(rec));
  }
  return c;
}

std::vector<uint8_t> EncodeCheckpoint(const Checkpoint& ckpt) {
  ByteWriter payload;
  payload.U64(ckpt.iteration);
  payload.String(model::ModelConfigToJson(ckpt.config));
  payload.U32(static_cast<uint32_t>(ckpt.groups.size()));
  for (const auto& g : ckpt.groups) {
    payload.String(g.name);
    payload.U32(static_cast<uint32_t>(g.tensors.size()));
    for (const auto& t : g.tensors) {
      payload.String(t.name);
      WriteTensor(payload, t.value);
      WriteTensor(payload, t.state.m);
      WriteTensor(payload, t.state.v);
      payload.U32(static_cast<uint32_t>(t.state.steps.size()));
      for (int64_t s : t.state.steps) payload.I64(s);
    }
  }
  ByteWriter out;
  out.Bytes(std::span(reinterpret_cast<const uint8_t*>(kCheckpointMagic), 8));
  out.U32(kCheckpointVersion);
  out.U32(Crc32(payload.buffer()));
  out.U64(payload.size());
  out.Bytes(payload.buffer());
  return out.Take();
}

Checkpoint DecodeCheckpoint(std::span<const uint8_t> bytes) {
  if (bytes.size() < kCheckpointHeaderBytes ||
      std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) {
    throw FormatError("not a checkpoint (bad magic)");
  }
  try {
    ByteReader header(bytes.subspan(8, kCheckpointHeaderBytes - 8));
    const uint32_t version = header.U32();
    if (version != kCheckpointVersion) {
      throw FormatError("unsupported checkpoint version " + std::to_string(version));
    }
    const uint32_t crc = header.U32();
    const uint64_t length = header.U64();
    const auto payload = bytes.subspan(kCheckpointHeaderBytes);
    if (payload.size() != length) {
      throw FormatError("checkpoint payload is " + std::to_string(payload.size()) +
                        " bytes, header says " + std::to_string(length));
    }
    if (Crc32(payload) != crc) throw FormatError("checkpoint checksum mismatch");

    ByteReader r(payload);
    Checkpoint c;
    c.iteration = r.U64();
    c.config = model::ModelConfigFromJson(r.String());
    const uint32_t groups = r.U32();
    for (uint32_t g = 0; g < groups; ++g) {
      GroupRecord rec;
      rec.name = r.String();
      const uint32_t tensors = r.U32();
      for (uint32_t t = 0; t < tensors; ++t) {
        TensorRecord tr;
        tr.name = r.String();
        tr.value = ReadTensor(r);
        tr.state.m = ReadTensor(r);
        tr.state.v = ReadTensor(r);
        const uint32_t steps = r.U32();
        if (steps > r.remaining() / 8) throw FormatError("truncated step counters");
        tr.state.steps.resize(steps);
        for (auto& s : tr.state.steps) s = r.I64();
        rec.tensors.push_back(std::move(tr));
      }
      c.groups.push_back(std::move(rec));
    }
    if (!r.done()) throw FormatError("trailing bytes in checkpoint");
    return c;
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
}

void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt) {
  WriteFileBytes(path, EncodeCheckpoint(ckpt));
}

Checkpoint LoadCheckpoint(const std::string& path) {
  const auto bytes = ReadFileBytes(path);
  try {
    return DecodeCheckpoint(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void RestoreGroup(const Checkpoint& ckpt, const std::string& group, model::DicmModel& model,
                  ams::OptimizerState* state) {
  const GroupRecord* rec = ckpt.Find(group);
  if (!rec) throw FormatError("checkpoint has no group '" + group + "'");
  auto groups = model.Groups();
  size_t gi = 0;
  while (gi < groups.size() && groups[gi].name != group) ++gi;
  if (gi == groups.size()) throw SchemaError("model has no group '" + group + "'");
  auto& params = groups[gi].params;
  if (params.size() != rec->tensors.size()) {
    throw SchemaError("group '" + group + "': checkpoint has " +
                      std::to_string(rec->tensors.size()) + " tensors, model has " +
                      std::to_string(params.size()));
  }
  for (size_t p = 0; p < params.size(); ++p) {
    const TensorRecord& t = rec->tensors[p];
    if (t.name != params[p].name || !SameShape(t.value, *params[p].tensor)) {
      throw SchemaError("group '" + group + "': tensor " + t.name + " " +
                        t.value.ShapeString() + " does not match model tensor " +
                        params[p].name + " " + params[p].tensor->ShapeString());
    }
  }
  for (size_t p = 0; p < params.size(); ++p) {
    *params[p].tensor = rec->tensors[p].value;
    if (state) state->states[gi][p] = rec->tensors[p].state;
  }
}

model::DicmModel ModelFromCheckpoint(const Checkpoint& ckpt) {
  model::DicmModel m(ckpt.config);
  for (const auto& name : model::DicmModel::GroupNames()) RestoreGroup(ckpt, name, m, nullptr);
  return m;
}

ams::OptimizerState OptimizerFromCheckpoint(const Checkpoint& ckpt) {
  model::DicmModel m(ckpt.config);
  ams::OptimizerState s = ams::OptimizerState::Fresh(m);
  for (const auto& name : model::DicmModel::GroupNames()) RestoreGroup(ckpt, name, m, &s);
  if (!s.Matches(m)) throw FormatError("checkpoint optimizer state does not match its model");
  return s;
}

namespace {

WarmupMask Uniform(GroupAction a) {
  WarmupMask m;
  for (const auto& g : model::DicmModel::GroupNames()) m.actions[g] = a;
  return m;
}

}  // namespace

WarmupMask WarmupMask::Full() { return Uniform(GroupAction::kRestore); }

WarmupMask WarmupMask::Non() { return Uniform(GroupAction::kReinitialize); }

WarmupMask WarmupMask::Partial() {
  WarmupMask m = Full();
  m.actions[model::kIdGroup] = GroupAction::kReinitialize;
  return m;
}

WarmupMask WarmupMask::FromName(const std::string& name) {
  if (name == "full") return Full();
  if (name == "partial") return Partial();
  if (name == "non") return Non();
  throw ConfigError("unknown warm-up '" + name + "' (expected non, partial or full)");
}

void WarmupMask::Validate() const {
  const auto names = model::DicmModel::GroupNames();
  for (const auto& [group, action] : actions) {
    if (std::find(names.begin(), names.end(), group) == names.end()) {
      throw ConfigError("warm-up mask names unknown group '" + group + "'");
    }
  }
  for (const auto& g : names) {
    if (!actions.count(g)) throw ConfigError("warm-up mask lacks group '" + g + "'");
  }
}

bool WarmupMask::AnyReinitialize() const {
  for (const auto& [group, action] : actions) {
    if (action == GroupAction::kReinitialize) return true;
  }
  return false;
}

WarmStart LoadWarmup(const Checkpoint& ckpt, const WarmupMask& mask, uint64_t init_seed) {
  mask.Validate();
  model::ModelConfig config = ckpt.config;
  config.init_seed = init_seed;
  WarmStart w{model::DicmModel(config), {}};
  w.optimizer = ams::OptimizerState::Fresh(w.model);
  const bool reset = mask.AnyReinitialize();
  for (const auto& g : model::DicmModel::GroupNames()) {
    if (!ckpt.Find(g)) throw FormatError("checkpoint has no group '" + g + "'");
    if (mask.actions.at(g) == GroupAction::kRestore) {
      RestoreGroup(ckpt, g, w.model, reset ? nullptr : &w.optimizer);
    }
  }
  return w;
}

}  // namespace dicm::deployment

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

#ifndef DICM_DEPLOYMENT_CHECKPOINT_H_
#define DICM_DEPLOYMENT_CHECKPOINT_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dicm/ams/optimizer.h"
#include "dicm/model/dicm_model.h"

namespace dicm::deployment {

// File layout, little-endian:
//   bytes 0-7    magic "DICMCKPT"
//   bytes 8-11   u32 version (1)
//   bytes 12-15  u32 crc32 of the payload
//   bytes 16-23  u64 payload length
//   payload:
//     u64 iteration
//     string model config (JSON)
//     u32 group count, then per group:
//       string name, u32 tensor count, then per tensor:
//         string name, tensor value, tensor adam m, tensor adam v,
//         u32 n + n x i64 adam step counters
// A string is u32 length + bytes. A tensor is u8 dtype (1 = float64),
// u32 rank, rank x u32 dims, then the values.
inline constexpr char kCheckpointMagic[] = "DICMCKPT";
inline constexpr uint32_t kCheckpointVersion = 1;
inline constexpr size_t kCheckpointHeaderBytes = 24;

struct TensorRecord {
  std::string name;
  numerics::Tensor value;
  numerics::AdamState state;
};

struct GroupRecord {
  std::string name;
  std::vector<TensorRecord> tensors;
};

struct Checkpoint {
  model::ModelConfig config;
  uint64_t iteration = 0;
  std::vector<GroupRecord> groups;  // DicmModel::Groups() order

  const GroupRecord* Find(const std::string& group) const;
};

Checkpoint MakeCheckpoint(const model::DicmModel& model, const ams::OptimizerState& state,
                          uint64_t iteration);

std::vector<uint8_t> EncodeCheckpoint(const Checkpoint& ckpt);
// FormatError on bad magic, version, checksum or truncation.
Checkpoint DecodeCheckpoint(std::span<const uint8_t> bytes);

void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt);  // IoError
Checkpoint LoadCheckpoint(const std::string& path);  // IoError, FormatError

// Copies one group into |model| (and |state| when set). SchemaError naming
// the group when tensor names or shapes differ; FormatError if absent.
void RestoreGroup(const Checkpoint& ckpt, const std::string& group, model::DicmModel& model,
                  ams::OptimizerState* state);

// Model and optimizer state exactly as saved.
model::DicmModel ModelFromCheckpoint(const Checkpoint& ckpt);
ams::OptimizerState OptimizerFromCheckpoint(const Checkpoint& ckpt);

enum class GroupAction { kRestore, kReinitialize };

struct WarmupMask {
  std::map<std::string, GroupAction> actions;  // one entry per group

  static WarmupMask Full();
  static WarmupMask Partial();  // reinitialize id-embeddings only
  static WarmupMask Non();
  static WarmupMask FromName(const std::string& name);  // non|partial|full

  void Validate() const;  // ConfigError: unknown or missing group
  bool AnyReinitialize() const;
};

struct WarmStart {
  model::DicmModel model;
  ams::OptimizerState optimizer;
};

// Restored groups are bit-equal to the checkpoint; reinitialized groups are
// drawn as a fresh model with |init_seed| would draw them. Any reinitialized
// group resets the whole optimizer state.
WarmStart LoadWarmup(const Checkpoint& ckpt, const WarmupMask& mask, uint64_t init_seed);

}  // namespace dicm::deployment

#endif  // DICM_DEPLOYMENT_CHECKPOINT_H_

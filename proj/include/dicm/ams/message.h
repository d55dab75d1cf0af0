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

#ifndef DICM_AMS_MESSAGE_H_
#define DICM_AMS_MESSAGE_H_

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dicm::ams {

// Key of one ID-embedding row.
struct IdKey {
  uint32_t field = 0;
  uint64_t row = 0;

  auto operator<=>(const IdKey&) const = default;
};

struct IdKeyHash {
  size_t operator()(const IdKey& k) const;
};

// Stable shard assignment (splitmix hash mod N).
uint32_t ShardOfImage(uint64_t image_id, uint32_t num_servers);
uint32_t ShardOfKey(const IdKey& key, uint32_t num_servers);

enum class Tag : uint8_t {
  kEmbedRequest = 1,
  kEmbedResponse = 2,
  kEmbedGradPush = 3,
  kIdParamPull = 4,
  kIdParamRows = 5,
  kIdParamPush = 6,
  kFeatureRequest = 7,
  kFeatureResponse = 8,
  kServerSync = 9,
  kWorkerSync = 10,
  kBarrier = 11,
};

std::string TagName(Tag tag);

// Payload fields used per tag:
//   EmbedRequest, FeatureRequest      ids
//   EmbedResponse, EmbedGradPush,
//   FeatureResponse                   ids, dim, values (ids.size() x dim)
//   IdParamPull                       keys
//   IdParamRows, IdParamPush          keys, dim, values (keys.size() x dim)
//   ServerSync, WorkerSync            sizes, values (concatenated tensors)
//   Barrier                           (none)
struct Message {
  Tag tag = Tag::kBarrier;
  uint64_t iteration = 0;
  uint32_t sender = 0;
  std::vector<uint64_t> ids;
  std::vector<IdKey> keys;
  uint32_t dim = 0;
  std::vector<uint32_t> sizes;
  std::vector<double> values;

  bool operator==(const Message&) const = default;
};

// Frame layout, little-endian:
//   u32 length of everything after this field
//   u8  tag
//   u64 iteration, u32 sender
//   tag-specific payload:
//     id list      u32 n, n x u64
//     key list     u32 n, n x (u32 field, u64 row)
//     id vectors   u32 n, u32 dim, n x (u64 id, dim x f64)
//     key vectors  u32 n, u32 dim, n x (u32 field, u64 row, dim x f64)
//     tensors      u32 count, count x u32 size, then sum(size) x f64
std::vector<uint8_t> EncodeFrame(const Message& m);
// ProtocolError on malformed frames or payload/shape inconsistencies.
Message DecodeFrame(std::span<const uint8_t> frame);

// Number of float elements carried (accounted at 4 bytes each).
uint64_t FeatureElements(const Message& m);

}  // namespace dicm::ams

#endif  // DICM_AMS_MESSAGE_H_

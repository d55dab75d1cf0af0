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

#ifndef DICM_AMS_TRANSPORT_H_
#define DICM_AMS_TRANSPORT_H_

#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "dicm/ams/message.h"

namespace dicm::ams {

enum class Role : uint8_t { kWorker, kServer };

struct NodeId {
  Role role = Role::kWorker;
  uint32_t index = 0;
};

inline NodeId Worker(uint32_t i) { return {Role::kWorker, i}; }
inline NodeId Server(uint32_t i) { return {Role::kServer, i}; }

enum class Category {
  kImageFeature,
  kImageEmbedding,
  kIdParam,
  kModelSync,
  kSampleData,
  kControl,
};
std::string CategoryName(Category c);
Category CategoryOf(Tag tag);

enum class Direction {
  kWorkerToServer,
  kServerToWorker,
  kWorkerToWorker,
  kServerToServer,
  kStorageToWorker,  // sample loading, not network traffic
};
std::string DirectionName(Direction d);

struct TrafficCounter {
  uint64_t messages = 0;
  uint64_t wire_bytes = 0;
  uint64_t elements = 0;  // float elements carried

  uint64_t accounted_bytes() const { return elements * 4; }
  bool operator==(const TrafficCounter&) const = default;
};

// Monotone counters keyed by (category, direction), kept separately for the
// sending and the receiving side.
class TrafficMeter {
 public:
  using Key = std::pair<Category, Direction>;

  void RecordSend(Category c, Direction d, uint64_t wire_bytes, uint64_t elements);
  void RecordReceive(Category c, Direction d, uint64_t wire_bytes, uint64_t elements);

  TrafficCounter Sent(Category c, Direction d) const;
  TrafficCounter Received(Category c, Direction d) const;
  const std::map<Key, TrafficCounter>& sent() const { return sent_; }
  const std::map<Key, TrafficCounter>& received() const { return received_; }

  // Header: category,direction,messages,wire_bytes,elements,accounted_bytes
  // (sent side).
  std::string ReportCsv() const;

 private:
  std::map<Key, TrafficCounter> sent_;
  std::map<Key, TrafficCounter> received_;
};

// In-process message fabric: one mailbox of encoded frames per node.
// Thread-safe; with |deterministic| set, drained messages are ordered by
// sender id regardless of arrival order.
class Network {
 public:
  Network(uint32_t workers, uint32_t servers, bool deterministic);

  // Encodes |m| with m.sender = from.index, meters it, appends to |to|.
  void Send(NodeId from, NodeId to, Message m);
  // Removes and decodes the frames in |node|'s mailbox whose tag is listed.
  std::vector<Message> Drain(NodeId node, std::initializer_list<Tag> tags);
  size_t Pending(NodeId node) const;

  // Non-network sample loading into a worker, metered as sample-data.
  void RecordSampleLoad(uint64_t bytes, uint64_t elements);

  TrafficMeter meter() const;

 private:
  struct Frame {
    uint32_t from = 0;
    Role from_role = Role::kWorker;
    std::vector<uint8_t> bytes;
  };
  struct Mailbox {
    mutable std::mutex mu;
    std::vector<Frame> frames;
  };
  Mailbox& box(NodeId n) const;

  uint32_t workers_;
  uint32_t servers_;
  bool deterministic_;
  std::vector<std::unique_ptr<Mailbox>> boxes_;
  mutable std::mutex meter_mu_;
  TrafficMeter meter_;
};

}  // namespace dicm::ams

#endif  // DICM_AMS_TRANSPORT_H_

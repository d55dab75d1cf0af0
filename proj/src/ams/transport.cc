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

#include "dicm/ams/transport.h"

#include <algorithm>
#include <sstream>

#include "dicm/common/error.h"

namespace dicm::ams {

std::string CategoryName(Category c) {
  switch (c) {
    case Category::kImageFeature: return "image-feature";
    case Category::kImageEmbedding: return "image-embedding";
    case Category::kIdParam: return "id-param";
    case Category::kModelSync: return "model-sync";
    case Category::kSampleData: return "sample-data";
    case Category::kControl: return "control";
  }
  return "";
}

Category CategoryOf(Tag tag) {
  switch (tag) {
    case Tag::kFeatureResponse: return Category::kImageFeature;
    case Tag::kEmbedResponse:
    case Tag::kEmbedGradPush: return Category::kImageEmbedding;
    case Tag::kIdParamRows:
    case Tag::kIdParamPush: return Category::kIdParam;
    case Tag::kServerSync:
    case Tag::kWorkerSync: return Category::kModelSync;
    case Tag::kEmbedRequest:
    case Tag::kFeatureRequest:
    case Tag::kIdParamPull:
    case Tag::kBarrier: return Category::kControl;
  }
  return Category::kControl;
}

std::string DirectionName(Direction d) {
  switch (d) {
    case Direction::kWorkerToServer: return "worker->server";
    case Direction::kServerToWorker: return "server->worker";
    case Direction::kWorkerToWorker: return "worker->worker";
    case Direction::kServerToServer: return "server->server";
    case Direction::kStorageToWorker: return "storage->worker";
  }
  return "";
}

namespace {

void Add(std::map<TrafficMeter::Key, TrafficCounter>& m, Category c, Direction d,
         uint64_t wire, uint64_t elements) {
  TrafficCounter& t = m[{c, d}];
  t.messages += 1;
  t.wire_bytes += wire;
  t.elements += elements;
}

TrafficCounter Get(const std::map<TrafficMeter::Key, TrafficCounter>& m, Category c,
                   Direction d) {
  auto it = m.find({c, d});
  return it == m.end() ? TrafficCounter{} : it->second;
}

Direction DirectionOf(Role from, Role to) {
  if (from == Role::kWorker) {
    return to == Role::kServer ? Direction::kWorkerToServer : Direction::kWorkerToWorker;
  }
  return to == Role::kWorker ? Direction::kServerToWorker : Direction::kServerToServer;
}

}  // namespace

void TrafficMeter::RecordSend(Category c, Direction d, uint64_t wire, uint64_t elements) {
  Add(sent_, c, d, wire, elements);
}

void TrafficMeter::RecordReceive(Category c, Direction d, uint64_t wire, uint64_t elements) {
  Add(received_, c, d, wire, elements);
}

TrafficCounter TrafficMeter::Sent(Category c, Direction d) const { return Get(sent_, c, d); }

TrafficCounter TrafficMeter::Received(Category c, Direction d) const {
  return Get(received_, c, d);
}

std::string TrafficMeter::ReportCsv() const {
  std::ostringstream out;
  out << "category,direction,messages,wire_bytes,elements,accounted_bytes\n";
  for (const auto& [key, t] : sent_) {
    out << CategoryName(key.first) << ',' << DirectionName(key.second) << ',' << t.messages
        << ',' << t.wire_bytes << ',' << t.elements << ',' << t.accounted_bytes() << '\n';
  }
  return out.str();
}

Network::Network(uint32_t workers, uint32_t servers, bool deterministic)
    : workers_(workers), servers_(servers), deterministic_(deterministic) {
  for (uint32_t i = 0; i < workers + servers; ++i) boxes_.push_back(std::make_unique<Mailbox>());
}

Network::Mailbox& Network::box(NodeId n) const {
  const uint32_t limit = n.role == Role::kWorker ? workers_ : servers_;
  if (n.index >= limit) {
    throw RoutingError(std::string(n.role == Role::kWorker ? "worker " : "server ") +
                       std::to_string(n.index) + " does not exist");
  }
  return *boxes_[(n.role == Role::kWorker ? 0 : workers_) + n.index];
}

void Network::Send(NodeId from, NodeId to, Message m) {
  m.sender = from.index;
  Frame f;
  f.from = from.index;
  f.from_role = from.role;
  f.bytes = EncodeFrame(m);
  {
    std::lock_guard<std::mutex> lock(meter_mu_);
    meter_.RecordSend(CategoryOf(m.tag), DirectionOf(from.role, to.role), f.bytes.size(),
                      FeatureElements(m));
  }
  Mailbox& b = box(to);
  std::lock_guard<std::mutex> lock(b.mu);
  b.frames.push_back(std::move(f));
}

std::vector<Message> Network::Drain(NodeId node, std::initializer_list<Tag> tags) {
  std::vector<Frame> taken;
  {
    Mailbox& b = box(node);
    std::lock_guard<std::mutex> lock(b.mu);
    std::vector<Frame> keep;
    for (Frame& f : b.frames) {
      const Tag tag = static_cast<Tag>(f.bytes.size() > 4 ? f.bytes[4] : 0);
      const bool wanted = std::find(tags.begin(), tags.end(), tag) != tags.end();
      (wanted ? taken : keep).push_back(std::move(f));
    }
    b.frames = std::move(keep);
  }
  if (deterministic_) {
    std::stable_sort(taken.begin(), taken.end(),
                     [](const Frame& a, const Frame& b) { return a.from < b.from; });
  }
  std::vector<Message> out;
  for (const Frame& f : taken) {
    Message m = DecodeFrame(f.bytes);
    {
      std::lock_guard<std::mutex> lock(meter_mu_);
      meter_.RecordReceive(CategoryOf(m.tag), DirectionOf(f.from_role, node.role),
                           f.bytes.size(), FeatureElements(m));
    }
    out.push_back(std::move(m));
  }
  return out;
}

size_t Network::Pending(NodeId node) const {
  Mailbox& b = box(node);
  std::lock_guard<std::mutex> lock(b.mu);
  return b.frames.size();
}

void Network::RecordSampleLoad(uint64_t bytes, uint64_t elements) {
  std::lock_guard<std::mutex> lock(meter_mu_);
  meter_.RecordSend(Category::kSampleData, Direction::kStorageToWorker, bytes, elements);
  meter_.RecordReceive(Category::kSampleData, Direction::kStorageToWorker, bytes, elements);
}

TrafficMeter Network::meter() const {
  std::lock_guard<std::mutex> lock(meter_mu_);
  return meter_;
}

}  // namespace dicm::ams

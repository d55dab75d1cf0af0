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

#include "dicm/ams/message.h"

#include "dicm/common/bytes.h"
#include "dicm/common/error.h"
#include "dicm/numerics/rng.h"

namespace dicm::ams {

using numerics::Mix64;

size_t IdKeyHash::operator()(const IdKey& k) const {
  return static_cast<size_t>(Mix64(k.row ^ Mix64(static_cast<uint64_t>(k.field) + 1)));
}

uint32_t ShardOfImage(uint64_t image_id, uint32_t num_servers) {
  return static_cast<uint32_t>(Mix64(image_id) % num_servers);
}

uint32_t ShardOfKey(const IdKey& key, uint32_t num_servers) {
  return static_cast<uint32_t>(IdKeyHash()(key) % num_servers);
}

std::string TagName(Tag tag) {
  switch (tag) {
    case Tag::kEmbedRequest: return "EmbedRequest";
    case Tag::kEmbedResponse: return "EmbedResponse";
    case Tag::kEmbedGradPush: return "EmbedGradPush";
    case Tag::kIdParamPull: return "IdParamPull";
    case Tag::kIdParamRows: return "IdParamRows";
    case Tag::kIdParamPush: return "IdParamPush";
    case Tag::kFeatureRequest: return "FeatureRequest";
    case Tag::kFeatureResponse: return "FeatureResponse";
    case Tag::kServerSync: return "ServerSync";
    case Tag::kWorkerSync: return "WorkerSync";
    case Tag::kBarrier: return "Barrier";
  }
  return "unknown";
}

namespace {

enum class Layout { kIdList, kKeyList, kIdVectors, kKeyVectors, kTensors, kEmpty };

Layout LayoutOf(Tag tag) {
  switch (tag) {
    case Tag::kEmbedRequest:
    case Tag::kFeatureRequest:
      return Layout::kIdList;
    case Tag::kEmbedResponse:
    case Tag::kEmbedGradPush:
    case Tag::kFeatureResponse:
      return Layout::kIdVectors;
    case Tag::kIdParamPull:
      return Layout::kKeyList;
    case Tag::kIdParamRows:
    case Tag::kIdParamPush:
      return Layout::kKeyVectors;
    case Tag::kServerSync:
    case Tag::kWorkerSync:
      return Layout::kTensors;
    case Tag::kBarrier:
      return Layout::kEmpty;
  }
  throw ProtocolError("unknown message tag " + std::to_string(static_cast<int>(tag)));
}

uint32_t Count(size_t n) {
  if (n > UINT32_MAX) throw ProtocolError("message field too large");
  return static_cast<uint32_t>(n);
}

void CheckVectors(const Message& m, size_t rows) {
  if (m.values.size() != rows * m.dim) {
    throw ProtocolError(TagName(m.tag) + ": " + std::to_string(m.values.size()) +
                        " values for " + std::to_string(rows) + " rows of dim " +
                        std::to_string(m.dim));
  }
}

}  // namespace

std::vector<uint8_t> EncodeFrame(const Message& m) {
  ByteWriter w;
  w.U32(0);
  w.U8(static_cast<uint8_t>(m.tag));
  w.U64(m.iteration);
  w.U32(m.sender);
  switch (LayoutOf(m.tag)) {
    case Layout::kIdList:
      w.U32(Count(m.ids.size()));
      for (uint64_t id : m.ids) w.U64(id);
      break;
    case Layout::kKeyList:
      w.U32(Count(m.keys.size()));
      for (const IdKey& k : m.keys) {
        w.U32(k.field);
        w.U64(k.row);
      }
      break;
    case Layout::kIdVectors:
      CheckVectors(m, m.ids.size());
      w.U32(Count(m.ids.size()));
      w.U32(m.dim);
      for (size_t i = 0; i < m.ids.size(); ++i) {
        w.U64(m.ids[i]);
        for (size_t j = 0; j < m.dim; ++j) w.F64(m.values[i * m.dim + j]);
      }
      break;
    case Layout::kKeyVectors:
      CheckVectors(m, m.keys.size());
      w.U32(Count(m.keys.size()));
      w.U32(m.dim);
      for (size_t i = 0; i < m.keys.size(); ++i) {
        w.U32(m.keys[i].field);
        w.U64(m.keys[i].row);
        for (size_t j = 0; j < m.dim; ++j) w.F64(m.values[i * m.dim + j]);
      }
      break;
    case Layout::kTensors: {
      uint64_t total = 0;
      for (uint32_t s : m.sizes) total += s;
      if (total != m.values.size()) throw ProtocolError("sync payload size mismatch");
      w.U32(Count(m.sizes.size()));
      for (uint32_t s : m.sizes) w.U32(s);
      for (double v : m.values) w.F64(v);
      break;
    }
    case Layout::kEmpty:
      break;
  }
  w.PatchU32(0, static_cast<uint32_t>(w.size() - 4));
  return w.Take();
}

Message DecodeFrame(std::span<const uint8_t> frame) {
  try {
    ByteReader r(frame);
    const uint32_t length = r.U32();
    if (length != r.remaining()) {
      throw ProtocolError("frame length " + std::to_string(length) + " but " +
                          std::to_string(r.remaining()) + " bytes follow");
    }
    Message m;
    const uint8_t tag = r.U8();
    if (tag < 1 || tag > static_cast<uint8_t>(Tag::kBarrier)) {
      throw ProtocolError("unknown message tag " + std::to_string(tag));
    }
    m.tag = static_cast<Tag>(tag);
    m.iteration = r.U64();
    m.sender = r.U32();
    switch (LayoutOf(m.tag)) {
      case Layout::kIdList: {
        const uint32_t n = r.U32();
        m.ids.resize(n);
        for (auto& id : m.ids) id = r.U64();
        break;
      }
      case Layout::kKeyList: {
        const uint32_t n = r.U32();
        m.keys.resize(n);
        for (auto& k : m.keys) {
          k.field = r.U32();
          k.row = r.U64();
        }
        break;
      }
      case Layout::kIdVectors: {
        const uint32_t n = r.U32();
        m.dim = r.U32();
        if (static_cast<uint64_t>(n) * (8 + 8ull * m.dim) > r.remaining()) {
          throw ProtocolError("truncated " + TagName(m.tag));
        }
        m.ids.resize(n);
        m.values.resize(static_cast<size_t>(n) * m.dim);
        for (uint32_t i = 0; i < n; ++i) {
          m.ids[i] = r.U64();
          for (uint32_t j = 0; j < m.dim; ++j) m.values[i * m.dim + j] = r.F64();
        }
        break;
      }
      case Layout::kKeyVectors: {
        const uint32_t n = r.U32();
        m.dim = r.U32();
        if (static_cast<uint64_t>(n) * (12 + 8ull * m.dim) > r.remaining()) {
          throw ProtocolError("truncated " + TagName(m.tag));
        }
        m.keys.resize(n);
        m.values.resize(static_cast<size_t>(n) * m.dim);
        for (uint32_t i = 0; i < n; ++i) {
          m.keys[i].field = r.U32();
          m.keys[i].row = r.U64();
          for (uint32_t j = 0; j < m.dim; ++j) m.values[i * m.dim + j] = r.F64();
        }
        break;
      }
      case Layout::kTensors: {
        const uint32_t count = r.U32();
        if (count > r.remaining() / 4) throw ProtocolError("truncated sync message");
        m.sizes.resize(count);
        uint64_t total = 0;
        for (auto& s : m.sizes) {
          s = r.U32();
          total += s;
        }
        if (total * 8 != r.remaining()) throw ProtocolError("sync payload size mismatch");
        m.values.resize(total);
        for (auto& v : m.values) v = r.F64();
        break;
      }
      case Layout::kEmpty:
        break;
    }
    if (!r.done()) throw ProtocolError("trailing bytes in " + TagName(m.tag) + " frame");
    return m;
  } catch (const FormatError& e) {
    throw ProtocolError(std::string("malformed frame: ") + e.what());
  }
}

uint64_t FeatureElements(const Message& m) { return m.values.size(); }

}  // namespace dicm::ams

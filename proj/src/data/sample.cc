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

#include "dicm/data/sample.h"

#include <map>
#include <tuple>

#include "dicm/common/error.h"

namespace dicm::data {

void ValidateSample(const Sample& s) {
  if (s.behavior_items.size() != s.behavior_images.size()) {
    throw SchemaError("sample of user " + std::to_string(s.user) + " has " +
                      std::to_string(s.behavior_items.size()) +
                      " behavior items but " +
                      std::to_string(s.behavior_images.size()) +
                      " behavior images");
  }
  if (s.label != 0 && s.label != 1) {
    throw SchemaError("label must be 0 or 1, got " + std::to_string(s.label));
  }
}

std::vector<SampleGroup> GroupCommonFeatures(std::span<const Sample> samples) {
  using Key = std::tuple<uint64_t, std::vector<uint64_t>, std::vector<uint64_t>>;
  std::map<Key, size_t> index;
  std::vector<SampleGroup> groups;
  for (const Sample& s : samples) {
    Key key{s.user, s.behavior_items, s.behavior_images};
    auto [it, inserted] = index.try_emplace(std::move(key), groups.size());
    if (inserted) {
      groups.push_back(SampleGroup{s.user, s.behavior_items, s.behavior_images, {}});
    }
    groups[it->second].impressions.push_back(
        Impression{s.day, s.scenario, s.ad, s.category, s.ad_image, s.label});
  }
  return groups;
}

std::vector<Sample> Ungroup(std::span<const SampleGroup> groups) {
  std::vector<Sample> out;
  for (const SampleGroup& g : groups) {
    for (const Impression& imp : g.impressions) {
      out.push_back(Sample{g.user, imp.day, imp.scenario, imp.ad, imp.category,
                           imp.ad_image, g.behavior_items, g.behavior_images,
                           imp.label});
    }
  }
  return out;
}

uint64_t GroupBytes(const SampleGroup& g) {
  const uint64_t header = 3 + g.behavior_items.size() + g.behavior_images.size();
  return kBytesPerElement * (header + 6 * g.impressions.size());
}

uint64_t GroupedBytes(std::span<const SampleGroup> groups) {
  uint64_t total = 0;
  for (const auto& g : groups) total += GroupBytes(g);
  return total;
}

uint64_t UngroupedBytes(std::span<const Sample> samples) {
  uint64_t total = 0;
  for (const Sample& s : samples) {
    total += kBytesPerElement *
             (3 + s.behavior_items.size() + s.behavior_images.size() + 6);
  }
  return total;
}

}  // namespace dicm::data

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

#ifndef DICM_DATA_SAMPLE_H_
#define DICM_DATA_SAMPLE_H_

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

namespace dicm::data {

// One impression. Behavior lists are user features ordered oldest to newest.
struct Sample {
  uint64_t user = 0;
  uint32_t day = 0;
  uint64_t scenario = 0;
  uint64_t ad = 0;
  uint64_t category = 0;
  uint64_t ad_image = 0;
  std::vector<uint64_t> behavior_items;
  std::vector<uint64_t> behavior_images;
  int label = 0;

  bool operator==(const Sample&) const = default;
};

// Throws SchemaError if the behavior lists differ in length or the label is
// not 0/1.
void ValidateSample(const Sample& s);

// Per-impression remainder of a sample once user features are factored out.
struct Impression {
  uint32_t day = 0;
  uint64_t scenario = 0;
  uint64_t ad = 0;
  uint64_t category = 0;
  uint64_t ad_image = 0;
  int label = 0;

  bool operator==(const Impression&) const = default;
};

// Samples sharing identical user features, stored once.
struct SampleGroup {
  uint64_t user = 0;
  std::vector<uint64_t> behavior_items;
  std::vector<uint64_t> behavior_images;
  std::vector<Impression> impressions;
};

// Groups samples by (user, behavior lists) in order of first appearance.
std::vector<SampleGroup> GroupCommonFeatures(std::span<const Sample> samples);
std::vector<Sample> Ungroup(std::span<const SampleGroup> groups);

// Storage model, 4 bytes per stored element. A group record is
// user, behavior count, 2 * behaviors, impression count, then 6 elements
// (day, scenario, ad, category, ad image, label) per impression. The
// ungrouped layout stores every sample as its own one-impression group.
inline constexpr uint64_t kBytesPerElement = 4;
uint64_t GroupBytes(const SampleGroup& g);
uint64_t GroupedBytes(std::span<const SampleGroup> groups);
uint64_t UngroupedBytes(std::span<const Sample> samples);

// Keeps the most recent |max_behaviors| entries, order preserved.
template <class T>
std::vector<T> FilterBehaviors(std::span<const T> behaviors, size_t max_behaviors) {
  const size_t keep = std::min(behaviors.size(), max_behaviors);
  return std::vector<T>(behaviors.end() - static_cast<std::ptrdiff_t>(keep),
                        behaviors.end());
}

}  // namespace dicm::data

#endif  // DICM_DATA_SAMPLE_H_

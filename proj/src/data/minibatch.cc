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

#include "dicm/data/minibatch.h"

#include <numeric>

#include "dicm/common/error.h"
#include "dicm/numerics/rng.h"

namespace dicm::data {

std::vector<std::vector<size_t>> EpochBatches(size_t num_samples, size_t batch_size,
                                              uint64_t seed, uint64_t epoch,
                                              bool shuffle) {
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
  std::vector<size_t> order(num_samples);
  std::iota(order.begin(), order.end(), size_t{0});
  if (shuffle) {
    numerics::Rng rng(numerics::DeriveSeed(seed, epoch));
    rng.Shuffle(order);
  }
  std::vector<std::vector<size_t>> batches;
  for (size_t start = 0; start < num_samples; start += batch_size) {
    size_t end = std::min(num_samples, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

std::vector<Sample> Gather(std::span<const Sample> data, std::span<const size_t> indices) {
  std::vector<Sample> out;
  out.reserve(indices.size());
  for (size_t i : indices) out.push_back(data[i]);
  return out;
}

MinibatchIterator::MinibatchIterator(std::span<const Sample> data, size_t batch_size,
                                     uint64_t seed, bool shuffle)
    : data_(data), batch_size_(batch_size), seed_(seed), shuffle_(shuffle) {
  plan_ = EpochBatches(data_.size(), batch_size_, seed_, epoch_, shuffle_);
}

bool MinibatchIterator::Next(std::vector<Sample>* batch) {
  if (cursor_ == plan_.size()) {
    ++epoch_;
    cursor_ = 0;
    plan_ = EpochBatches(data_.size(), batch_size_, seed_, epoch_, shuffle_);
    return false;
  }
  *batch = Gather(data_, plan_[cursor_++]);
  return true;
}

size_t MinibatchIterator::batches_per_epoch() const {
  return (data_.size() + batch_size_ - 1) / batch_size_;
}

}  // namespace dicm::data

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

#ifndef DICM_DATA_MINIBATCH_H_
#define DICM_DATA_MINIBATCH_H_

#include <cstdint>
#include <span>
#include <vector>

#include "dicm/data/sample.h"

namespace dicm::data {

// Index lists for one epoch: a seeded Fisher-Yates permutation (identity when
// |shuffle| is false) cut into batches of |batch_size|; the final short batch
// is kept.
std::vector<std::vector<size_t>> EpochBatches(size_t num_samples, size_t batch_size,
                                              uint64_t seed, uint64_t epoch,
                                              bool shuffle = true);

std::vector<Sample> Gather(std::span<const Sample> data, std::span<const size_t> indices);

// Iterates batches over epochs.
class MinibatchIterator {
 public:
  MinibatchIterator(std::span<const Sample> data, size_t batch_size, uint64_t seed,
                    bool shuffle = true);

  // Fills |batch| and returns true, or returns false at the end of an epoch
  // (the next call starts the following epoch).
  bool Next(std::vector<Sample>* batch);

  uint64_t epoch() const { return epoch_; }
  size_t batches_per_epoch() const;

 private:
  std::span<const Sample> data_;
  size_t batch_size_;
  uint64_t seed_;
  bool shuffle_;
  uint64_t epoch_ = 0;
  size_t cursor_ = 0;
  std::vector<std::vector<size_t>> plan_;
};

}  // namespace dicm::data

#endif  // DICM_DATA_MINIBATCH_H_

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

#ifndef DICM_AMS_ACCOUNTING_H_
#define DICM_AMS_ACCOUNTING_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dicm/ams/batch_stats.h"
#include "dicm/data/sample.h"
#include "dicm/model/config.h"

namespace dicm::ams {

// Byte totals over all minibatches of the sample, 4 bytes per element.
//   worker_storage  grouped sample records (+ raw feature per image reference
//                   in store-in-worker)
//   server_storage  raw features of every distinct image (0 in store-in-worker)
//   comm_image      ams: 2 * U_w * d_img * 4, ps-store-in-server: U_w * D_raw * 4,
//                   store-in-worker: 0; U_w = distinct images in worker w's slice
//   comm_id         2 * K_w * d_id * 4; K_w = distinct ID rows in the slice
//   comm_all        comm_id + comm_image
struct AccountingRow {
  Mode mode = Mode::kAms;
  uint64_t worker_storage = 0;
  uint64_t server_storage = 0;
  uint64_t comm_all = 0;
  uint64_t comm_image = 0;
  uint64_t comm_id = 0;
};

struct StorageReport {
  uint64_t num_batches = 0;
  uint64_t samples = 0;
  uint64_t unique_images = 0;       // over the whole sample
  uint64_t requested_images = 0;    // sum over batches and workers of U_w
  uint64_t requested_keys = 0;      // sum over batches and workers of K_w
  uint64_t image_refs = 0;          // after common-feature grouping
  std::vector<AccountingRow> rows;  // store-in-worker, ps-store-in-server, ams

  const AccountingRow& row(Mode mode) const;
  double PerBatch(uint64_t total) const {
    return num_batches == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(num_batches);
  }
  // Bytes per transferred image, ps-store-in-server over ams: D_raw / d_img.
  double per_image_compression = 0.0;

  // Header: strategy,worker_storage,server_storage,comm_all,comm_image
  // (per-minibatch means), then the totals with a _total suffix.
  std::string Csv() const;
};

// Splits |samples| in order into minibatches of workers * per_worker_batch
// (last one may be short) and each minibatch into contiguous worker slices.
StorageReport Accounting(const model::ModelConfig& config, uint32_t workers,
                         size_t per_worker_batch, std::span<const data::Sample> samples);

}  // namespace dicm::ams

#endif  // DICM_AMS_ACCOUNTING_H_

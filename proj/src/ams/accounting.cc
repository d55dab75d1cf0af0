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

#include "dicm/ams/accounting.h"

#include <algorithm>
#include <sstream>

#include "dicm/common/error.h"

namespace dicm::ams {

const AccountingRow& StorageReport::row(Mode mode) const {
  for (const auto& r : rows) {
    if (r.mode == mode) return r;
  }
  throw ContractError("no accounting row for " + ModeName(mode));
}

std::string StorageReport::Csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "strategy,worker_storage,server_storage,comm_all,comm_image,"
         "worker_storage_total,server_storage_total,comm_all_total,comm_image_total\n";
  for (const auto& r : rows) {
    out << ModeName(r.mode) << ',' << PerBatch(r.worker_storage) << ','
        << PerBatch(r.server_storage) << ',' << PerBatch(r.comm_all) << ','
        << PerBatch(r.comm_image) << ',' << r.worker_storage << ',' << r.server_storage << ','
        << r.comm_all << ',' << r.comm_image << '\n';
  }
  return out.str();
}

StorageReport Accounting(const model::ModelConfig& config, uint32_t workers,
                         size_t per_worker_batch, std::span<const data::Sample> samples) {
  if (workers == 0 || per_worker_batch == 0) {
    throw ConfigError("accounting needs >= 1 worker and a positive batch size");
  }
  const auto& schema = config.schema;
  const uint64_t b = data::kBytesPerElement;
  StorageReport rep;
  rep.samples = samples.size();
  rep.per_image_compression =
      static_cast<double>(schema.d_raw) / static_cast<double>(schema.d_img);

  uint64_t grouped = 0;
  const size_t union_size = static_cast<size_t>(workers) * per_worker_batch;
  for (size_t lo = 0; lo < samples.size(); lo += union_size) {
    const auto batch = samples.subspan(lo, std::min(union_size, samples.size() - lo));
    ++rep.num_batches;
    const size_t n = batch.size();
    for (uint32_t r = 0; r < workers; ++r) {
      const auto slice = batch.subspan(r * n / workers, (r + 1) * n / workers - r * n / workers);
      const SampleLoad load = SampleLoadOf(config, slice, Mode::kAms);
      grouped += load.bytes;
      rep.image_refs += load.image_refs;
      rep.requested_images += BatchImageIds(config, slice).size();
      rep.requested_keys += BatchIdKeys(schema, slice).size();
    }
  }
  rep.unique_images = BatchImageIds(config, samples).size();

  const uint64_t comm_id = 2 * rep.requested_keys * schema.d_id * b;
  const uint64_t raw_store = rep.unique_images * schema.d_raw * b;

  AccountingRow siw{Mode::kStoreInWorker};
  siw.worker_storage = grouped + rep.image_refs * schema.d_raw * b;
  siw.server_storage = 0;
  siw.comm_image = 0;

  AccountingRow sis{Mode::kStoreInServer};
  sis.worker_storage = grouped;
  sis.server_storage = raw_store;
  sis.comm_image = rep.requested_images * schema.d_raw * b;

  AccountingRow ams{Mode::kAms};
  ams.worker_storage = grouped;
  ams.server_storage = raw_store;
  ams.comm_image = 2 * rep.requested_images * schema.d_img * b;

  for (AccountingRow* r : {&siw, &sis, &ams}) {
    r->comm_id = comm_id;
    r->comm_all = comm_id + r->comm_image;
    rep.rows.push_back(*r);
  }
  return rep;
}

}  // namespace dicm::ams

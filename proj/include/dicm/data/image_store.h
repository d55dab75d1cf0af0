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

#ifndef DICM_DATA_IMAGE_STORE_H_
#define DICM_DATA_IMAGE_STORE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dicm::data {

// Binary matrix file: 16-byte header followed by row-major little-endian
// values.
//   bytes 0-3   magic "DMAT"
//   bytes 4-5   u16 version (1)
//   bytes 6-7   u16 element type (0 = float32, 1 = float64)
//   bytes 8-11  u32 rows
//   bytes 12-15 u32 cols
enum class MatrixDType : uint16_t { kFloat32 = 0, kFloat64 = 1 };

struct MatrixHeader {
  uint32_t rows = 0;
  uint32_t cols = 0;
  MatrixDType dtype = MatrixDType::kFloat32;
};

inline constexpr uint16_t kMatrixVersion = 1;
inline constexpr size_t kMatrixHeaderBytes = 16;

std::vector<uint8_t> EncodeMatrix(uint32_t rows, uint32_t cols, std::span<const float> values);
std::vector<uint8_t> EncodeMatrix(uint32_t rows, uint32_t cols, std::span<const double> values);
MatrixHeader DecodeMatrixHeader(std::span<const uint8_t> bytes);
std::vector<float> DecodeMatrixF32(std::span<const uint8_t> bytes, MatrixHeader* header);
std::vector<double> DecodeMatrixF64(std::span<const uint8_t> bytes, MatrixHeader* header);

// Image id -> latent vector. Ids are dense in [0, size()). Servers hold
// disjoint shards of this map; raw features are materialized from the
// latent by the fixed extractor on demand.
class ImageFeatureStore {
 public:
  ImageFeatureStore() = default;
  explicit ImageFeatureStore(size_t latent_dim) : dim_(latent_dim) {}

  size_t latent_dim() const { return dim_; }
  uint64_t size() const { return dim_ == 0 ? 0 : latents_.size() / dim_; }
  bool Contains(uint64_t id) const { return id < size(); }

  uint64_t Append(std::span<const float> latent);
  std::span<const float> Latent(uint64_t id) const;  // UnknownImageError
  std::span<const float> values() const { return latents_; }

  void Save(const std::string& path) const;
  static ImageFeatureStore Load(const std::string& path);

  bool operator==(const ImageFeatureStore&) const = default;

 private:
  size_t dim_ = 0;
  std::vector<float> latents_;
};

}  // namespace dicm::data

#endif  // DICM_DATA_IMAGE_STORE_H_

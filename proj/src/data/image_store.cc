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

#include "dicm/data/image_store.h"

#include "dicm/common/bytes.h"
#include "dicm/common/error.h"

namespace dicm::data {

namespace {

constexpr uint8_t kMagic[4] = {'D', 'M', 'A', 'T'};

void WriteHeader(ByteWriter& w, uint32_t rows, uint32_t cols, MatrixDType t) {
  w.Bytes(kMagic);
  w.U16(kMatrixVersion);
  w.U16(static_cast<uint16_t>(t));
  w.U32(rows);
  w.U32(cols);
}

void CheckCount(uint32_t rows, uint32_t cols, size_t n) {
  if (static_cast<uint64_t>(rows) * cols != n) {
    throw DimensionError("matrix " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " given " + std::to_string(n) +
                         " values");
  }
}

}  // namespace

std::vector<uint8_t> EncodeMatrix(uint32_t rows, uint32_t cols,
                                  std::span<const float> values) {
  CheckCount(rows, cols, values.size());
  ByteWriter w;
  WriteHeader(w, rows, cols, MatrixDType::kFloat32);
  for (float v : values) w.F32(v);
  return w.Take();
}

std::vector<uint8_t> EncodeMatrix(uint32_t rows, uint32_t cols,
                                  std::span<const double> values) {
  CheckCount(rows, cols, values.size());
  ByteWriter w;
  WriteHeader(w, rows, cols, MatrixDType::kFloat64);
  for (double v : values) w.F64(v);
  return w.Take();
}

MatrixHeader DecodeMatrixHeader(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.Bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic)) {
    throw FormatError("not a matrix file (bad magic)");
  }
  uint16_t version = r.U16();
  if (version != kMatrixVersion) {
    throw FormatError("unsupported matrix version " + std::to_string(version));
  }
  uint16_t dtype = r.U16();
  if (dtype > 1) throw FormatError("unknown matrix element type " + std::to_string(dtype));
  MatrixHeader h;
  h.dtype = static_cast<MatrixDType>(dtype);
  h.rows = r.U32();
  h.cols = r.U32();
  const uint64_t elem = h.dtype == MatrixDType::kFloat32 ? 4 : 8;
  if (r.remaining() != static_cast<uint64_t>(h.rows) * h.cols * elem) {
    throw FormatError("matrix payload size mismatch");
  }
  return h;
}

std::vector<float> DecodeMatrixF32(std::span<const uint8_t> bytes, MatrixHeader* header) {
  MatrixHeader h = DecodeMatrixHeader(bytes);
  if (h.dtype != MatrixDType::kFloat32) throw FormatError("expected float32 matrix");
  ByteReader r(bytes.subspan(kMatrixHeaderBytes));
  std::vector<float> out(static_cast<size_t>(h.rows) * h.cols);
  for (float& v : out) v = r.F32();
  if (header) *header = h;
  return out;
}

std::vector<double> DecodeMatrixF64(std::span<const uint8_t> bytes, MatrixHeader* header) {
  MatrixHeader h = DecodeMatrixHeader(bytes);
  if (h.dtype != MatrixDType::kFloat64) throw FormatError("expected float64 matrix");
  ByteReader r(bytes.subspan(kMatrixHeaderBytes));
  std::vector<double> out(static_cast<size_t>(h.rows) * h.cols);
  for (double& v : out) v = r.F64();
  if (header) *header = h;
  return out;
}

uint64_t ImageFeatureStore::Append(std::span<const float> latent) {
  if (latent.size() != dim_ || dim_ == 0) {
    throw DimensionError("image latent of width " + std::to_string(latent.size()) +
                         " for store of width " + std::to_string(dim_));
  }
  uint64_t id = size();
  latents_.insert(latents_.end(), latent.begin(), latent.end());
  return id;
}

std::span<const float> ImageFeatureStore::Latent(uint64_t id) const {
  if (!Contains(id)) {
    throw UnknownImageError("unknown image id " + std::to_string(id) +
                            " (store holds " + std::to_string(size()) + ")");
  }
  return std::span<const float>(latents_).subspan(id * dim_, dim_);
}

void ImageFeatureStore::Save(const std::string& path) const {
  WriteFileBytes(path, EncodeMatrix(static_cast<uint32_t>(size()),
                                    static_cast<uint32_t>(dim_), latents_));
}

ImageFeatureStore ImageFeatureStore::Load(const std::string& path) {
  MatrixHeader h;
  auto values = DecodeMatrixF32(ReadFileBytes(path), &h);
  ImageFeatureStore store(h.cols);
  store.latents_ = std::move(values);
  return store;
}

}  // namespace dicm::data

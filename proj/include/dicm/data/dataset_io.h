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

#ifndef DICM_DATA_DATASET_IO_H_
#define DICM_DATA_DATASET_IO_H_

#include <span>
#include <string>
#include <vector>

#include "dicm/data/synthetic.h"

namespace dicm::data {

// Sample records are line-delimited JSON objects with a fixed key order:
//   {"user":..,"day":..,"scenario":..,"ad":..,"category":..,"ad_image":..,
//    "behavior_items":[..],"behavior_images":[..],"label":0|1}
std::string SampleToJsonLine(const Sample& s);
Sample SampleFromJsonLine(const std::string& line);  // SchemaError on bad input

void WriteSamples(const std::string& path, std::span<const Sample> samples);
std::vector<Sample> ReadSamples(const std::string& path);

// Dataset directory layout:
//   meta.json        generator config and vocabulary sizes
//   train.jsonl      training samples
//   test.jsonl       test samples
//   images.bin       image latents (float32 matrix file)
//   truth_*.bin      generator latents (float32 matrix files)
void SaveDataset(const Dataset& ds, const std::string& dir);
Dataset LoadDataset(const std::string& dir);

}  // namespace dicm::data

#endif  // DICM_DATA_DATASET_IO_H_

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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <tuple>

#include "dicm/common/bytes.h"
#include "dicm/common/error.h"
#include "dicm/data/dataset_io.h"
#include "dicm/data/minibatch.h"
#include "dicm/data/sample.h"
#include "dicm/data/synthetic.h"
#include "dicm/numerics/rng.h"
#include "gtest/gtest.h"

namespace dicm::data {
namespace {

SyntheticConfig SmallConfig() {
  SyntheticConfig c;
  c.users = 40;
  c.items = 60;
  c.images = 50;
  c.categories = 4;
  c.latent_dim = 4;
  c.behaviors_min = 5;
  c.behavior_cap = 40;
  c.max_behaviors = 8;
  c.impressions_per_user_day = 5;
  return c;
}

Sample MakeSample(uint64_t user, uint64_t ad, std::vector<uint64_t> beh, int label) {
  Sample s;
  s.user = user;
  s.ad = ad;
  s.category = ad % 3;
  s.ad_image = ad + 100;
  s.behavior_items = beh;
  for (uint64_t b : beh) s.behavior_images.push_back(b + 100);
  s.label = label;
  return s;
}

std::string TempDir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("dicm_data_test_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

TEST(SampleTest, ValidateRejectsMismatchedBehaviors) {
  Sample s = MakeSample(0, 1, {1, 2}, 1);
  s.behavior_images.pop_back();
  EXPECT_THROW(ValidateSample(s), SchemaError);
}

TEST(SampleTest, ValidateRejectsBadLabel) {
  Sample s = MakeSample(0, 1, {}, 2);
  EXPECT_THROW(ValidateSample(s), SchemaError);
}

TEST(GroupTest, OneUserManySamples) {
  std::vector<Sample> v;
  for (int i = 0; i < 5; ++i) v.push_back(MakeSample(7, i, {1, 2, 3}, i % 2));
  auto groups = GroupCommonFeatures(v);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].impressions.size(), 5u);
  EXPECT_EQ(groups[0].user, 7u);
}

TEST(GroupTest, ManyUsersOneSampleEach) {
  std::vector<Sample> v;
  for (uint64_t u = 0; u < 6; ++u) v.push_back(MakeSample(u, 1, {u}, 0));
  EXPECT_EQ(GroupCommonFeatures(v).size(), 6u);
}

TEST(GroupTest, GroupedBytesSmallerOnThreeUserFixture) {
  // user 0: 3 samples with 4 behaviors, user 1: 2 samples with 2 behaviors,
  // user 2: 1 sample with no behaviors.
  std::vector<Sample> v = {
      MakeSample(0, 1, {1, 2, 3, 4}, 1), MakeSample(1, 2, {5, 6}, 0),
      MakeSample(0, 3, {1, 2, 3, 4}, 0), MakeSample(2, 4, {}, 1),
      MakeSample(0, 5, {1, 2, 3, 4}, 0), MakeSample(1, 6, {5, 6}, 1),
  };
  // Hand count in elements. Per group: user + count + 2L + count + 6 per
  // impression.
  const uint64_t grouped = (3 + 8 + 18) + (3 + 4 + 12) + (3 + 0 + 6);
  const uint64_t ungrouped = 3 * (3 + 8 + 6) + 2 * (3 + 4 + 6) + (3 + 0 + 6);
  auto groups = GroupCommonFeatures(v);
  EXPECT_EQ(GroupedBytes(groups), grouped * 4);
  EXPECT_EQ(UngroupedBytes(v), ungrouped * 4);
  EXPECT_LT(GroupedBytes(groups), UngroupedBytes(v));
}

TEST(GroupTest, NoRepeatsMeansNoSaving) {
  std::vector<Sample> v = {MakeSample(0, 1, {1}, 1), MakeSample(1, 2, {2}, 0)};
  EXPECT_EQ(GroupedBytes(GroupCommonFeatures(v)), UngroupedBytes(v));
}

TEST(GroupTest, RoundTripOnGeneratedCorpus) {
  Dataset ds = Generate(SmallConfig());
  auto groups = GroupCommonFeatures(ds.train);
  for (const auto& g : groups) {
    EXPECT_FALSE(g.impressions.empty());
  }
  auto back = Ungroup(groups);
  auto key = [](const Sample& s) {
    return std::make_tuple(s.user, s.day, s.scenario, s.ad, s.category, s.ad_image,
                           s.behavior_items, s.behavior_images, s.label);
  };
  std::vector<decltype(key(back[0]))> a, b;
  for (const auto& s : ds.train) a.push_back(key(s));
  for (const auto& s : back) b.push_back(key(s));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
  EXPECT_LT(GroupedBytes(groups), UngroupedBytes(ds.train));
}

TEST(FilterTest, ShortListUnchanged) {
  std::vector<int> v = {1, 2, 3};
  EXPECT_EQ(FilterBehaviors<int>(v, 32), v);
}

TEST(FilterTest, KeepsMostRecent) {
  std::vector<int> v(200);
  for (int i = 0; i < 200; ++i) v[i] = i;
  auto out = FilterBehaviors<int>(v, 32);
  ASSERT_EQ(out.size(), 32u);
  for (int i = 0; i < 32; ++i) EXPECT_EQ(out[i], 168 + i);
}

TEST(FilterTest, CorpusMeanLengthMatchesCap) {
  SyntheticConfig c;  // histories of 40..200 before filtering
  c.users = 100;
  Dataset ds = Generate(c);
  double sum = 0.0;
  for (const auto& s : ds.train) sum += static_cast<double>(s.behavior_items.size());
  const double mean_pre = 0.5 * static_cast<double>(c.behaviors_min + c.behavior_cap);
  EXPECT_NEAR(sum / static_cast<double>(ds.train.size()),
              std::min(mean_pre, static_cast<double>(c.max_behaviors)), 1e-9);
}

TEST(SyntheticTest, ValidateRejectsBadConfig) {
  SyntheticConfig c;
  c.users = 0;
  EXPECT_THROW(Generate(c), ConfigError);
  c = SyntheticConfig();
  c.cold_start_fraction = 1.5;
  EXPECT_THROW(Generate(c), ConfigError);
  c = SyntheticConfig();
  c.images = c.items + 1;
  EXPECT_THROW(Generate(c), ConfigError);
}

TEST(SyntheticTest, SameSeedByteIdentical) {
  const std::string d1 = TempDir("det1"), d2 = TempDir("det2");
  SaveDataset(Generate(SmallConfig()), d1);
  SaveDataset(Generate(SmallConfig()), d2);
  for (const char* f : {"meta.json", "train.jsonl", "test.jsonl", "images.bin"}) {
    EXPECT_EQ(ReadFileBytes(d1 + "/" + f), ReadFileBytes(d2 + "/" + f)) << f;
  }
  SyntheticConfig other = SmallConfig();
  other.seed = 2;
  SaveDataset(Generate(other), d2);
  EXPECT_NE(ReadFileBytes(d1 + "/train.jsonl"), ReadFileBytes(d2 + "/train.jsonl"));
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST(SyntheticTest, EmpiricalCtrNearBaseRate) {
  SyntheticConfig c;
  c.users = 2000;
  c.days = 6;
  c.test_days = 1;
  c.behaviors_min = 4;
  c.behavior_cap = 8;
  c.max_behaviors = 8;
  Dataset ds = Generate(c);
  size_t n = 0, clicks = 0;
  for (const auto* part : {&ds.train, &ds.test}) {
    for (const auto& s : *part) {
      ++n;
      clicks += s.label;
    }
  }
  ASSERT_GE(n, 100000u);
  EXPECT_NEAR(static_cast<double>(clicks) / static_cast<double>(n), c.base_ctr, 0.02);
}

TEST(SyntheticTest, ZeroVisualCoefficientIgnoresImages) {
  SyntheticConfig c = SmallConfig();
  c.visual_coef = 0.0;
  Dataset ds = Generate(c);
  ImageFeatureStore shuffled(ds.images.latent_dim());
  numerics::Rng rng(99);
  std::vector<float> latent(ds.images.latent_dim());
  for (uint64_t j = 0; j < ds.images.size(); ++j) {
    for (float& v : latent) v = static_cast<float>(rng.Normal());
    shuffled.Append(latent);
  }
  for (const auto& s : ds.test) {
    EXPECT_EQ(TrueAffinity(c, ds.truth, ds.images, s),
              TrueAffinity(c, ds.truth, shuffled, s));
  }
}

TEST(SyntheticTest, TrainTestDisjointAndColdItemsUnseen) {
  Dataset ds = Generate(SmallConfig());
  std::set<std::tuple<uint64_t, uint64_t, uint32_t>> train_keys;
  std::set<uint64_t> train_ads, train_images;
  for (const auto& s : ds.train) {
    train_keys.insert({s.user, s.ad, s.day});
    train_ads.insert(s.ad);
    train_images.insert(s.ad_image);
    for (uint64_t b : s.behavior_images) train_images.insert(b);
  }
  size_t cold = 0;
  for (const auto& s : ds.test) {
    EXPECT_FALSE(train_keys.count({s.user, s.ad, s.day}));
    if (s.ad >= ds.meta.warm_items) {
      ++cold;
      EXPECT_FALSE(train_ads.count(s.ad));
      EXPECT_FALSE(train_images.count(s.ad_image));
    }
  }
  const double frac = static_cast<double>(cold) / static_cast<double>(ds.test.size());
  EXPECT_NEAR(frac, ds.config.cold_start_fraction, 0.05);
}

TEST(SyntheticTest, ImageIdsDenseAndLatentsStandard) {
  SyntheticConfig c = SmallConfig();
  c.items = 10000;
  c.images = 10000;
  c.users = 5;
  Dataset ds = Generate(c);
  EXPECT_EQ(ds.images.size(), ds.meta.images);
  // Each latent coordinate is N(0, 1): the mean over n ids lies within
  // 3 / sqrt(n) of zero.
  const size_t k = ds.images.latent_dim();
  const double n = static_cast<double>(ds.images.size());
  for (size_t d = 0; d < k; ++d) {
    double mean = 0.0;
    for (uint64_t j = 0; j < ds.images.size(); ++j) mean += ds.images.Latent(j)[d];
    mean /= n;
    EXPECT_LT(std::abs(mean), 3.0 / std::sqrt(n));
  }
  // Cold images come from the same distribution as warm ones.
  double warm_sq = 0.0, cold_sq = 0.0;
  for (uint64_t j = 0; j < ds.meta.images; ++j) {
    double sq = 0.0;
    for (float v : ds.images.Latent(j)) sq += v * v;
    (j < ds.meta.warm_images ? warm_sq : cold_sq) += sq;
  }
  const double cold_n = static_cast<double>(ds.meta.images - ds.meta.warm_images);
  EXPECT_NEAR(cold_sq / cold_n / static_cast<double>(k), 1.0, 0.1);
  EXPECT_NEAR(warm_sq / static_cast<double>(ds.meta.warm_images) / static_cast<double>(k), 1.0,
              0.05);
}

TEST(DatasetIoTest, JsonLineRoundTrip) {
  Sample s = MakeSample(3, 9, {4, 5}, 1);
  s.day = 2;
  s.scenario = 1;
  const std::string line = SampleToJsonLine(s);
  EXPECT_EQ(line,
            "{\"user\":3,\"day\":2,\"scenario\":1,\"ad\":9,\"category\":0,\"ad_image\":109,"
            "\"behavior_items\":[4,5],\"behavior_images\":[104,105],\"label\":1}");
  EXPECT_EQ(SampleFromJsonLine(line), s);
}

TEST(DatasetIoTest, BadRecordsRejected) {
  EXPECT_THROW(SampleFromJsonLine("{\"user\":1}"), SchemaError);
  EXPECT_THROW(SampleFromJsonLine("not json"), SchemaError);
  EXPECT_THROW(SampleFromJsonLine(
                   "{\"user\":3,\"day\":2,\"scenario\":1,\"ad\":9,\"category\":0,"
                   "\"ad_image\":109,\"behavior_items\":[4],\"behavior_images\":[],"
                   "\"label\":1}"),
               SchemaError);
}

TEST(DatasetIoTest, DatasetDirectoryRoundTrip) {
  const std::string dir = TempDir("roundtrip");
  Dataset ds = Generate(SmallConfig());
  SaveDataset(ds, dir);
  Dataset back = LoadDataset(dir);
  EXPECT_EQ(back.meta, ds.meta);
  EXPECT_EQ(back.train, ds.train);
  EXPECT_EQ(back.test, ds.test);
  EXPECT_EQ(back.images, ds.images);
  EXPECT_EQ(back.truth.item_image, ds.truth.item_image);
  EXPECT_EQ(back.truth.user_visual, ds.truth.user_visual);
  EXPECT_EQ(back.truth.bias, ds.truth.bias);
  std::filesystem::remove_all(dir);
}

TEST(DatasetIoTest, ImageFileHeaderLayout) {
  const std::string dir = TempDir("header");
  std::filesystem::create_directories(dir);
  ImageFeatureStore store(2);
  store.Append(std::vector<float>{1.0f, -2.0f});
  store.Save(dir + "/img.bin");
  auto bytes = ReadFileBytes(dir + "/img.bin");
  ASSERT_EQ(bytes.size(), 16u + 8u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "DMAT");
  EXPECT_EQ(bytes[8], 1);   // rows, little-endian
  EXPECT_EQ(bytes[12], 2);  // cols
  // 1.0f little-endian is 00 00 80 3f.
  EXPECT_EQ(bytes[16 + 3], 0x3f);
  EXPECT_EQ(bytes[16 + 2], 0x80);
  bytes.resize(20);
  EXPECT_THROW(DecodeMatrixF32(bytes, nullptr), FormatError);
  std::filesystem::remove_all(dir);
}

TEST(MinibatchTest, SizesWithShortFinalBatch) {
  auto batches = EpochBatches(10, 3, 1, 0);
  ASSERT_EQ(batches.size(), 4u);
  EXPECT_EQ(batches[0].size(), 3u);
  EXPECT_EQ(batches[1].size(), 3u);
  EXPECT_EQ(batches[2].size(), 3u);
  EXPECT_EQ(batches[3].size(), 1u);
}

TEST(MinibatchTest, SameSeedSameOrderAndEpochsDiffer) {
  EXPECT_EQ(EpochBatches(100, 7, 5, 0), EpochBatches(100, 7, 5, 0));
  EXPECT_NE(EpochBatches(100, 7, 5, 0), EpochBatches(100, 7, 5, 1));
  EXPECT_NE(EpochBatches(100, 7, 5, 0), EpochBatches(100, 7, 6, 0));
}

TEST(MinibatchTest, EpochUnionIsDatasetMultiset) {
  Dataset ds = Generate(SmallConfig());
  MinibatchIterator it(ds.train, 64, 3);
  std::map<std::string, int> counts;
  for (const auto& s : ds.train) ++counts[SampleToJsonLine(s)];
  std::vector<Sample> batch;
  size_t batches = 0;
  while (it.Next(&batch)) {
    ++batches;
    for (const auto& s : batch) --counts[SampleToJsonLine(s)];
  }
  EXPECT_EQ(batches, it.batches_per_epoch());
  for (const auto& [k, v] : counts) EXPECT_EQ(v, 0) << k;
  EXPECT_EQ(it.epoch(), 1u);
}

TEST(MinibatchTest, ZeroBatchSizeRejected) {
  EXPECT_THROW(EpochBatches(10, 0, 1, 0), ConfigError);
}

}  // namespace
}  // namespace dicm::data

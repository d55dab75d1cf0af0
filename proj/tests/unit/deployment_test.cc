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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>

#include <gtest/gtest.h>

#include "dicm/ams/batch_stats.h"
#include "dicm/ams/reference_trainer.h"
#include "dicm/common/bytes.h"
#include "dicm/common/error.h"
#include "dicm/data/synthetic.h"
#include "dicm/deployment/checkpoint.h"
#include "dicm/deployment/inference.h"

namespace dicm::deployment {
namespace {

using data::Sample;
using model::DicmModel;
using model::ModelConfig;
using numerics::Tensor;

struct Fixture {
  data::Dataset data;
  ModelConfig config;
  std::optional<DicmModel> model;
  const DicmModel& trained() const { return *model; }
  ams::OptimizerState state;
};

const Fixture& Trained() {
  static const Fixture f = [] {
    data::SyntheticConfig c;
    c.users = 60;
    c.items = 80;
    c.images = 50;
    c.categories = 4;
    c.behaviors_min = 2;
    c.behavior_cap = 12;
    c.max_behaviors = 8;
    c.days = 4;
    c.impressions_per_user_day = 6;
    c.cold_start_fraction = 0.3;
    c.seed = 9;
    Fixture out;
    out.data = data::Generate(c);
    ModelConfig& m = out.config;
    m.schema = model::DefaultSchema(out.data.meta);
    m.schema.d_id = 4;
    m.schema.d_raw = 16;
    m.schema.d_img = 4;
    m.schema.b_max = 6;
    m.image_hidden = {8, 6};
    m.mlp_hidden = {16, 8};
    m.aggregator.attention_hidden = 8;
    m.latent_dim = c.latent_dim;
    ams::OptimizerConfig opt;
    opt.lr = {0.01, 0.9, 100};
    ams::ReferenceTrainer t(DicmModel(m), out.data.images, opt);
    for (size_t i = 0; i + 64 <= out.data.train.size() && i < 64 * 8; i += 64) {
      t.Step(std::span(out.data.train).subspan(i, 64));
    }
    out.model = t.model();
    out.state = t.optimizer();
    return out;
  }();
  return f;
}

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dicm_deploy_" + name)).string();
}

bool GroupBitEqual(const DicmModel& a, const DicmModel& b, const std::string& group) {
  const auto ga = a.Groups();
  const auto gb = b.Groups();
  for (size_t g = 0; g < ga.size(); ++g) {
    if (ga[g].name != group) continue;
    for (size_t p = 0; p < ga[g].params.size(); ++p) {
      if (!numerics::BitEqual(*ga[g].params[p].tensor, *gb[g].params[p].tensor)) return false;
    }
  }
  return true;
}

TEST(CheckpointTest, SaveLoadSaveIsByteIdentical) {
  const auto& f = Trained();
  const auto ckpt = MakeCheckpoint(f.trained(), f.state, 8);
  const std::string path = TempPath("roundtrip.ckpt");
  SaveCheckpoint(path, ckpt);
  const auto loaded = LoadCheckpoint(path);
  EXPECT_EQ(EncodeCheckpoint(loaded), ReadFileBytes(path));
  EXPECT_EQ(loaded.iteration, 8u);
  const DicmModel m = ModelFromCheckpoint(loaded);
  for (const auto& g : DicmModel::GroupNames()) EXPECT_TRUE(GroupBitEqual(m, f.trained(), g)) << g;
  const auto st = OptimizerFromCheckpoint(loaded);
  for (size_t g = 0; g < st.states.size(); ++g) {
    for (size_t p = 0; p < st.states[g].size(); ++p) {
      EXPECT_TRUE(numerics::BitEqual(st.states[g][p].m, f.state.states[g][p].m));
      EXPECT_TRUE(numerics::BitEqual(st.states[g][p].v, f.state.states[g][p].v));
      EXPECT_EQ(st.states[g][p].steps, f.state.states[g][p].steps);
    }
  }
  std::remove(path.c_str());
}

TEST(CheckpointTest, HeaderChecksumMatchesPayload) {
  const auto& f = Trained();
  const auto bytes = EncodeCheckpoint(MakeCheckpoint(f.trained(), f.state, 0));
  ASSERT_GT(bytes.size(), kCheckpointHeaderBytes);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "DICMCKPT");
  const uint32_t crc = bytes[12] | bytes[13] << 8 | bytes[14] << 16 | uint32_t{bytes[15]} << 24;
  EXPECT_EQ(crc, Crc32(std::span(bytes).subspan(kCheckpointHeaderBytes)));

  auto corrupt = bytes;
  corrupt[bytes.size() / 2] ^= 0x40;
  EXPECT_THROW(DecodeCheckpoint(corrupt), FormatError);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_THROW(DecodeCheckpoint(truncated), FormatError);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(DecodeCheckpoint(magic), FormatError);
}

TEST(CheckpointTest, SchemaMismatchNamesTheGroup) {
  const auto& f = Trained();
  const auto ckpt = MakeCheckpoint(f.trained(), f.state, 0);
  ModelConfig other = f.config;
  other.schema.d_id = 5;
  DicmModel m(other);
  try {
    RestoreGroup(ckpt, model::kIdGroup, m, nullptr);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("id-embeddings"), std::string::npos) << e.what();
  }
}

TEST(CheckpointTest, MissingGroupIsAnError) {
  const auto& f = Trained();
  auto ckpt = MakeCheckpoint(f.trained(), f.state, 0);
  ckpt.groups.erase(ckpt.groups.begin() + 2);  // mlp
  EXPECT_THROW(LoadWarmup(ckpt, WarmupMask::Full(), 1), FormatError);
  EXPECT_THROW(ModelFromCheckpoint(ckpt), FormatError);
}

TEST(CheckpointTest, UnwritablePathIsIoErrorWithPath) {
  const auto& f = Trained();
  const std::string path = "/nonexistent-dir/x.ckpt";
  try {
    SaveCheckpoint(path, MakeCheckpoint(f.trained(), f.state, 0));
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(path), std::string::npos);
  }
  EXPECT_THROW(LoadCheckpoint(path), IoError);
}

TEST(WarmupTest, FullRestoresEverything) {
  const auto& f = Trained();
  const auto ckpt = MakeCheckpoint(f.trained(), f.state, 0);
  const auto w = LoadWarmup(ckpt, WarmupMask::Full(), 12345);
  for (const auto& g : DicmModel::GroupNames()) EXPECT_TRUE(GroupBitEqual(w.model, f.trained(), g));
  EXPECT_EQ(w.optimizer.states[2][0].steps, f.state.states[2][0].steps);
}

TEST(WarmupTest, PartialReinitializesIdEmbeddingsOnly) {
  const auto& f = Trained();
  const auto ckpt = MakeCheckpoint(f.trained(), f.state, 0);
  const auto w = LoadWarmup(ckpt, WarmupMask::Partial(), 777);
  EXPECT_TRUE(GroupBitEqual(w.model, f.trained(), model::kMlpGroup));
  EXPECT_TRUE(GroupBitEqual(w.model, f.trained(), model::kImageGroup));
  EXPECT_TRUE(GroupBitEqual(w.model, f.trained(), model::kAttentionGroup));
  size_t same = 0, total = 0;
  for (size_t i = 0; i < f.config.schema.fields.size(); ++i) {
    const Tensor& a = w.model.id_table(i);
    const Tensor& b = f.trained().id_table(i);
    for (size_t k = 0; k < a.size(); ++k) {
      same += a[k] == b[k];
      ++total;
    }
  }
  EXPECT_EQ(same, 0u) << "of " << total;
  // Freshly drawn tables equal a fresh model with the same seed.
  ModelConfig c = f.config;
  c.init_seed = 777;
  EXPECT_TRUE(GroupBitEqual(w.model, DicmModel(c), model::kIdGroup));
  // Optimizer state is reset.
  for (const auto& g : w.optimizer.states) {
    for (const auto& s : g) {
      for (int64_t n : s.steps) EXPECT_EQ(n, 0);
    }
  }
}

TEST(WarmupTest, NonEqualsFreshInit) {
  const auto& f = Trained();
  const auto w = LoadWarmup(MakeCheckpoint(f.trained(), f.state, 0), WarmupMask::Non(), 31);
  ModelConfig c = f.config;
  c.init_seed = 31;
  const DicmModel fresh(c);
  for (const auto& g : DicmModel::GroupNames()) EXPECT_TRUE(GroupBitEqual(w.model, fresh, g)) << g;
}

TEST(WarmupTest, MaskNamesAndValidation) {
  EXPECT_FALSE(WarmupMask::FromName("full").AnyReinitialize());
  EXPECT_TRUE(WarmupMask::FromName("partial").AnyReinitialize());
  EXPECT_EQ(WarmupMask::FromName("partial").actions.at(model::kMlpGroup), GroupAction::kRestore);
  EXPECT_THROW(WarmupMask::FromName("half"), ConfigError);
  WarmupMask m = WarmupMask::Full();
  m.actions["bogus"] = GroupAction::kRestore;
  EXPECT_THROW(m.Validate(), ConfigError);
  m = WarmupMask::Full();
  m.actions.erase(model::kMlpGroup);
  EXPECT_THROW(m.Validate(), ConfigError);
}

// ---------------------------------------------------------------------------

TEST(InferenceTest, TableMatchesLiveEmbeddingAndRoundTrips) {
  const auto& f = Trained();
  const auto ex = model::MakeExtractor(f.config);
  const auto ids = ams::BatchImageIds(f.config, f.data.train);
  const auto table = InferenceTable::Export(f.trained(), ex, f.data.images, ids);
  EXPECT_EQ(table.size(), ids.size());
  for (uint64_t id : ids) {
    const Tensor live = f.trained().EmbedImageValue(ex.Extract(f.data.images, id));
    const auto got = table.Embedding(id);
    for (size_t d = 0; d < live.size(); ++d) EXPECT_EQ(got[d], live[d]);
  }
  const std::string path = TempPath("table.bin");
  table.Save(path);
  const auto back = InferenceTable::Load(path);
  EXPECT_EQ(back.ids(), table.ids());
  for (uint64_t id : ids) {
    const auto a = back.Embedding(id);
    const auto b = table.Embedding(id);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
  EXPECT_THROW(table.Embedding(1u << 30), UnknownImageError);
  std::remove(path.c_str());
}

TEST(InferenceTest, KvPredictorMatchesFullModelOnThousandSamples) {
  const auto& f = Trained();
  const auto ex = model::MakeExtractor(f.config);
  std::vector<Sample> samples;
  for (size_t i = 0; samples.size() < 1000; ++i) {
    samples.push_back(f.data.train[(i * 7919) % f.data.train.size()]);
  }
  const auto ids = ams::BatchImageIds(f.config, samples);
  KvPredictor kv(f.trained(), InferenceTable::Export(f.trained(), ex, f.data.images, ids),
                 f.data.images);
  const auto want = model::PredictLogits(f.trained(), ex, f.data.images, samples);
  const auto got = kv.Logits(samples);
  ASSERT_EQ(got.size(), want.size());
  double worst = 0.0;
  for (size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  EXPECT_LT(worst, 1e-12);
  EXPECT_EQ(kv.cold_lookups(), 0u);
}

TEST(InferenceTest, ColdImagesTakeTheColdPath) {
  const auto& f = Trained();
  const auto ex = model::MakeExtractor(f.config);
  const auto train_ids = ams::BatchImageIds(f.config, f.data.train);
  KvPredictor kv(f.trained(), InferenceTable::Export(f.trained(), ex, f.data.images, train_ids),
                 f.data.images);
  std::vector<Sample> cold;
  for (const auto& s : f.data.test) {
    if (!std::binary_search(train_ids.begin(), train_ids.end(), s.ad_image)) cold.push_back(s);
  }
  ASSERT_FALSE(cold.empty());
  const auto p = kv.Probabilities(cold);
  for (double v : p) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_GT(kv.cold_lookups(), 0u);
  const auto want = model::PredictLogits(f.trained(), ex, f.data.images, cold);
  const auto got = kv.Logits(cold);
  for (size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

}  // namespace
}  // namespace dicm::deployment

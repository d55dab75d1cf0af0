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
#include <numeric>

#include <gtest/gtest.h>

#include "dicm/ams/accounting.h"
#include "dicm/ams/cluster.h"
#include "dicm/ams/message.h"
#include "dicm/ams/reference_trainer.h"
#include "dicm/ams/training.h"
#include "dicm/common/error.h"
#include "dicm/data/minibatch.h"
#include "dicm/data/synthetic.h"
#include "dicm/numerics/rng.h"

namespace dicm::ams {
namespace {

using data::Sample;
using model::DicmModel;
using model::ModelConfig;
using numerics::Tensor;

struct Fixture {
  data::Dataset data;
  ModelConfig config;
};

const Fixture& Small() {
  static const Fixture f = [] {
    data::SyntheticConfig c;
    c.users = 40;
    c.items = 60;
    c.images = 40;
    c.categories = 4;
    c.scenarios = 2;
    c.behaviors_min = 2;
    c.behavior_cap = 10;
    c.max_behaviors = 8;
    c.days = 4;
    c.test_days = 1;
    c.impressions_per_user_day = 4;
    c.seed = 5;
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
    return out;
  }();
  return f;
}

OptimizerConfig Opt() {
  OptimizerConfig o;
  o.lr = {0.01, 0.9, 3};
  return o;
}

std::vector<Sample> Slice(size_t begin, size_t n) {
  const auto& train = Small().data.train;
  std::vector<Sample> out;
  for (size_t i = 0; i < n; ++i) out.push_back(train[(begin + i) % train.size()]);
  return out;
}

double MaxParamDiff(const DicmModel& a, const DicmModel& b) {
  double worst = 0.0;
  const auto ga = a.Groups();
  const auto gb = b.Groups();
  for (size_t g = 0; g < ga.size(); ++g) {
    for (size_t p = 0; p < ga[g].params.size(); ++p) {
      worst = std::max(worst, numerics::MaxAbsDiff(*ga[g].params[p].tensor,
                                                   *gb[g].params[p].tensor));
    }
  }
  return worst;
}

ClusterConfig Cfg(uint32_t m, uint32_t n, Mode mode = Mode::kAms, size_t batch = 16) {
  ClusterConfig c;
  c.workers = m;
  c.servers = n;
  c.mode = mode;
  c.per_worker_batch = batch;
  return c;
}

// ---------------------------------------------------------------------------

TEST(MessageTest, EveryLayoutRoundTrips) {
  std::vector<Message> msgs(5);
  msgs[0].tag = Tag::kEmbedRequest;
  msgs[0].ids = {3, 1, 99};
  msgs[1].tag = Tag::kEmbedResponse;
  msgs[1].ids = {3, 1};
  msgs[1].dim = 2;
  msgs[1].values = {0.1, -2.5, 1e-300, 7.0};
  msgs[2].tag = Tag::kIdParamPull;
  msgs[2].keys = {{0, 5}, {2, 1ull << 40}};
  msgs[3].tag = Tag::kIdParamPush;
  msgs[3].keys = {{1, 2}};
  msgs[3].dim = 3;
  msgs[3].values = {1, 2, 3};
  msgs[4].tag = Tag::kServerSync;
  msgs[4].sizes = {2, 1};
  msgs[4].values = {4, 5, 6};
  for (auto& m : msgs) {
    m.iteration = 17;
    m.sender = 3;
    const auto frame = EncodeFrame(m);
    EXPECT_EQ(DecodeFrame(frame), m) << TagName(m.tag);
    uint32_t len = frame[0] | frame[1] << 8 | frame[2] << 16 | uint32_t{frame[3]} << 24;
    EXPECT_EQ(len + 4, frame.size());
  }
  Message barrier;
  barrier.iteration = 2;
  EXPECT_EQ(EncodeFrame(barrier).size(), 4u + 1 + 8 + 4);
  EXPECT_EQ(DecodeFrame(EncodeFrame(barrier)), barrier);
}

TEST(MessageTest, MalformedFramesAreProtocolErrors) {
  Message m;
  m.tag = Tag::kEmbedResponse;
  m.ids = {1};
  m.dim = 2;
  m.values = {1, 2};
  auto frame = EncodeFrame(m);
  auto truncated = frame;
  truncated.pop_back();
  EXPECT_THROW(DecodeFrame(truncated), ProtocolError);
  auto bad_tag = frame;
  bad_tag[4] = 200;
  EXPECT_THROW(DecodeFrame(bad_tag), ProtocolError);
  auto trailing = frame;
  trailing.push_back(0);
  EXPECT_THROW(DecodeFrame(trailing), ProtocolError);
  m.values.push_back(3);
  EXPECT_THROW(EncodeFrame(m), ProtocolError);
  EXPECT_THROW(DecodeFrame(std::vector<uint8_t>{1, 0}), ProtocolError);
}

TEST(ShardTest, SingleServerAndStability) {
  for (uint64_t id = 0; id < 100; ++id) {
    EXPECT_EQ(ShardOfImage(id, 1), 0u);
    EXPECT_EQ(ShardOfImage(id, 7), ShardOfImage(id, 7));
    EXPECT_EQ(ShardOfKey({2, id}, 1), 0u);
  }
}

TEST(ShardTest, TenThousandKeysBalanceOverFourShards) {
  std::vector<int> images(4), keys(4);
  for (uint64_t id = 0; id < 10000; ++id) {
    ++images[ShardOfImage(id, 4)];
    ++keys[ShardOfKey({static_cast<uint32_t>(id % 5), id / 5}, 4)];
  }
  for (int s = 0; s < 4; ++s) {
    EXPECT_NEAR(images[s], 2500, 200) << "image shard " << s;
    EXPECT_NEAR(keys[s], 2500, 200) << "key shard " << s;
  }
}

TEST(TransportTest, UnknownNodeIsRoutingError) {
  Network net(2, 1, true);
  EXPECT_THROW(net.Send(Worker(0), Server(1), Message{}), RoutingError);
  EXPECT_THROW(net.Pending(Worker(2)), RoutingError);
}

TEST(TransportTest, DeterministicDrainOrdersBySender) {
  Network net(3, 1, true);
  for (uint32_t w : {2u, 0u, 1u}) {
    Message m;
    m.tag = Tag::kBarrier;
    net.Send(Worker(w), Server(0), m);
  }
  const auto got = net.Drain(Server(0), {Tag::kBarrier});
  ASSERT_EQ(got.size(), 3u);
  for (uint32_t i = 0; i < 3; ++i) EXPECT_EQ(got[i].sender, i);
  EXPECT_EQ(net.Pending(Server(0)), 0u);
}

// ---------------------------------------------------------------------------

TEST(ServerTest, EmbeddingsMatchModelBitForBit) {
  const auto& f = Small();
  DicmModel m(f.config);
  ClusterConfig cfg = Cfg(1, 2);
  const auto state = OptimizerState::Fresh(m);
  ServerNode s0(0, cfg, m, state, f.data.images, Opt());
  const auto ex = model::MakeExtractor(f.config);
  std::vector<uint64_t> mine;
  for (uint64_t id = 0; id < f.data.images.size() && mine.size() < 5; ++id) {
    if (s0.OwnsImage(id)) mine.push_back(id);
  }
  const auto got = s0.Embed(mine);
  for (size_t i = 0; i < mine.size(); ++i) {
    const Tensor want = m.EmbedImageValue(ex.Extract(f.data.images, mine[i]));
    for (size_t d = 0; d < want.size(); ++d) EXPECT_EQ(got[i * want.size() + d], want[d]);
  }
  EXPECT_TRUE(s0.Embed({}).empty());
  uint64_t foreign = 0;
  while (s0.OwnsImage(foreign)) ++foreign;
  const uint64_t ids[] = {foreign};
  EXPECT_THROW(s0.Embed(ids), RoutingError);
}

TEST(ClusterTest, SingleNodeLossTrajectoryMatchesReference) {
  const auto& f = Small();
  DicmModel init(f.config);
  ReferenceTrainer ref(init, f.data.images, Opt());
  Cluster cluster(Cfg(1, 1), init, f.data.images, Opt());
  for (size_t t = 0; t < 12; ++t) {
    const auto batch = Slice(t * 16, 16);
    const double want = ref.Step(batch);
    const auto stats = cluster.Step(batch);
    EXPECT_NEAR(stats.loss, want, 1e-9) << "iteration " << t;
  }
  EXPECT_LT(MaxParamDiff(cluster.AssembleModel(), ref.model()), 1e-9);
}

class ModeEquivalenceTest : public ::testing::TestWithParam<Mode> {};

TEST_P(ModeEquivalenceTest, FourWorkersTwoServersTrackReferenceEachIteration) {
  const auto& f = Small();
  DicmModel init(f.config);
  ReferenceTrainer ref(init, f.data.images, Opt());
  Cluster cluster(Cfg(4, 2, GetParam()), init, f.data.images, Opt());
  for (size_t t = 0; t < 10; ++t) {
    const auto batch = Slice(t * 64, 64);
    ref.Step(batch);
    cluster.Step(batch);
    ASSERT_LT(MaxParamDiff(cluster.AssembleModel(), ref.model()), 1e-6) << "iteration " << t;
  }
  // Optimizer state is assembled consistently too.
  const auto st = cluster.AssembleOptimizer();
  const auto& want = ref.optimizer();
  for (size_t g = 0; g < st.states.size(); ++g) {
    for (size_t p = 0; p < st.states[g].size(); ++p) {
      EXPECT_EQ(st.states[g][p].steps, want.states[g][p].steps);
      EXPECT_LT(numerics::MaxAbsDiff(st.states[g][p].m, want.states[g][p].m), 1e-6);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(AllModes, ModeEquivalenceTest,
                         ::testing::Values(Mode::kAms, Mode::kStoreInServer,
                                           Mode::kStoreInWorker),
                         [](const auto& info) {
                           auto name = ModeName(info.param);
                           std::replace(name.begin(), name.end(), '-', '_');
                           return name;
                         });

TEST(ClusterTest, DedupAndReplicaHashesOverManyIterations) {
  const auto& f = Small();
  DicmModel init(f.config);
  Cluster cluster(Cfg(4, 3), init, f.data.images, Opt());
  data::MinibatchIterator it(f.data.train, 64, 3);
  std::vector<Sample> batch;
  for (int t = 0; t < 100; ++t) {
    if (!it.Next(&batch)) ASSERT_TRUE(it.Next(&batch));
    const auto stats = cluster.Step(batch);
    EXPECT_EQ(stats.server_forwards, BatchImageIds(f.config, batch).size());
    EXPECT_EQ(stats.server_forwards, stats.unique_images);
    for (uint32_t h : stats.replica_hashes) EXPECT_EQ(h, stats.replica_hashes[0]);
  }
}

TEST(ClusterTest, SharedImageAcrossWorkersIsEmbeddedOnce) {
  const auto& f = Small();
  DicmModel init(f.config);
  auto batch = Slice(0, 2);
  batch[1] = batch[0];
  Cluster cluster(Cfg(2, 1, Mode::kAms, 1), init, f.data.images, Opt());
  const auto stats = cluster.Step(batch);
  EXPECT_EQ(stats.server_forwards, BatchImageIds(f.config, std::span(batch).first(1)).size());
  EXPECT_EQ(cluster.worker(0).requested_images(), cluster.worker(1).requested_images());
}

TEST(ClusterTest, ThreadedPhasesAreBitIdentical) {
  const auto& f = Small();
  DicmModel init(f.config);
  ClusterConfig threaded = Cfg(4, 2);
  threaded.threads = 3;
  Cluster a(Cfg(4, 2), init, f.data.images, Opt());
  Cluster b(threaded, init, f.data.images, Opt());
  for (size_t t = 0; t < 4; ++t) {
    const auto batch = Slice(t * 64, 64);
    EXPECT_EQ(a.Step(batch).loss, b.Step(batch).loss);
  }
  EXPECT_EQ(MaxParamDiff(a.AssembleModel(), b.AssembleModel()), 0.0);
}

TEST(ClusterTest, MeterConservation) {
  const auto& f = Small();
  DicmModel init(f.config);
  for (Mode mode : {Mode::kAms, Mode::kStoreInServer, Mode::kStoreInWorker}) {
    Cluster cluster(Cfg(3, 2, mode), init, f.data.images, Opt());
    for (size_t t = 0; t < 3; ++t) cluster.Step(Slice(t * 48, 48));
    const auto meter = cluster.meter();
    EXPECT_EQ(meter.sent(), meter.received()) << ModeName(mode);
    EXPECT_GT(meter.Sent(Category::kIdParam, Direction::kServerToWorker).elements, 0u);
    const auto image_down = meter.Sent(Category::kImageEmbedding, Direction::kServerToWorker);
    const auto feature_down = meter.Sent(Category::kImageFeature, Direction::kServerToWorker);
    EXPECT_EQ(image_down.elements > 0, mode == Mode::kAms);
    EXPECT_EQ(feature_down.elements > 0, mode == Mode::kStoreInServer);
  }
}

TEST(ClusterTest, NoImagesMeansNoEmbedRequest) {
  const auto& f = Small();
  ModelConfig c = f.config;
  c.use_ad_image = false;
  c.use_behavior_images = false;
  DicmModel init(c);
  Network net(1, 1, true);
  ClusterConfig cfg = Cfg(1, 1);
  WorkerNode w(0, cfg, init, OptimizerState::Fresh(init), f.data.images, Opt());
  const auto batch = Slice(0, 8);
  w.Begin(net, 0, batch, batch.size());
  EXPECT_TRUE(w.requested_images().empty());
  EXPECT_TRUE(net.Drain(Server(0), {Tag::kEmbedRequest, Tag::kFeatureRequest}).empty());
  EXPECT_EQ(net.Drain(Server(0), {Tag::kIdParamPull}).size(), 1u);
}

// Inputs that give every image occurrence its own leaf holding the live
// embedding value, so occurrence gradients can be summed by hand.
class OccurrenceInputs : public model::SampleInputs {
 public:
  OccurrenceInputs(const DicmModel& m, const numerics::Binder& b, const model::FixedExtractor& ex,
                   const data::ImageFeatureStore& store)
      : table_(m, b, ex, store), model_(m), ex_(ex), store_(store) {}
  numerics::Var Field(numerics::Graph& g, size_t field, std::span<const uint64_t> ids) override {
    return table_.Field(g, field, ids);
  }
  numerics::Var Image(numerics::Graph& g, uint64_t id) override {
    auto v = g.Input(model_.EmbedImageValue(ex_.Extract(store_, id)));
    leaves.emplace_back(id, v);
    return v;
  }
  std::vector<std::pair<uint64_t, numerics::Var>> leaves;

 private:
  model::TableInputs table_;
  const DicmModel& model_;
  const model::FixedExtractor& ex_;
  const data::ImageFeatureStore& store_;
};

TEST(WorkerTest, DuplicateImageGradientIsSumOfOccurrences) {
  const auto& f = Small();
  DicmModel init(f.config);
  auto batch = Slice(0, 3);
  batch[1].ad_image = batch[0].ad_image;  // same image twice in one slice
  batch[2].behavior_images.back() = batch[0].ad_image;
  Cluster cluster(Cfg(1, 2, Mode::kAms, 3), init, f.data.images, Opt());
  cluster.Step(batch);
  const auto& pushed = cluster.worker(0).pushed_embedding_grads();
  EXPECT_EQ(pushed.size(), BatchImageIds(f.config, batch).size());

  numerics::Graph g;
  numerics::Binder b;
  init.BindAll(g, b, false);
  const auto ex = model::MakeExtractor(f.config);
  OccurrenceInputs in(init, b, ex, f.data.images);
  g.Backward(model::BuildBatchLoss(g, init, b, in, batch, 1.0 / 3.0).loss);
  std::map<uint64_t, std::vector<double>> want;
  size_t occurrences = 0;
  for (const auto& [id, v] : in.leaves) {
    const Tensor grad = g.Grad(v);
    auto& acc = want[id];
    acc.resize(grad.size());
    for (size_t d = 0; d < grad.size(); ++d) acc[d] += grad[d];
    occurrences += id == batch[0].ad_image;
  }
  EXPECT_GE(occurrences, 3u);
  ASSERT_EQ(want.size(), pushed.size());
  for (const auto& [id, grad] : want) {
    const auto& got = pushed.at(id);
    for (size_t d = 0; d < grad.size(); ++d) EXPECT_NEAR(got[d], grad[d], 1e-12) << id;
  }
}

TEST(FaultTest, MissingBarrierTimesOut) {
  const auto& f = Small();
  DicmModel init(f.config);
  ClusterConfig cfg = Cfg(2, 2);
  cfg.faults.drop_barrier_from_worker = 1;
  Cluster cluster(cfg, init, f.data.images, Opt());
  EXPECT_THROW(cluster.Step(Slice(0, 32)), BarrierTimeout);
}

TEST(FaultTest, MissingEmbeddingAbortsIteration) {
  const auto& f = Small();
  DicmModel init(f.config);
  ClusterConfig cfg = Cfg(2, 2);
  cfg.faults.drop_embedding_from_server = 0;
  Cluster cluster(cfg, init, f.data.images, Opt());
  EXPECT_THROW(cluster.Step(Slice(0, 32)), ProtocolError);
}

TEST(FaultTest, ForeignImageRequestIsRoutingError) {
  const auto& f = Small();
  DicmModel init(f.config);
  ClusterConfig cfg = Cfg(1, 2);
  Network net(1, 2, true);
  ServerNode s0(0, cfg, init, OptimizerState::Fresh(init), f.data.images, Opt());
  uint64_t foreign = 0;
  while (s0.OwnsImage(foreign)) ++foreign;
  Message m;
  m.tag = Tag::kEmbedRequest;
  m.ids = {foreign};
  net.Send(Worker(0), Server(0), m);
  EXPECT_THROW(s0.Serve(net, 0), RoutingError);
}

TEST(ConfigTest, ModeNamesAndValidation) {
  for (Mode m : {Mode::kAms, Mode::kStoreInServer, Mode::kStoreInWorker}) {
    EXPECT_EQ(ModeFromName(ModeName(m)), m);
  }
  EXPECT_EQ(ModeName(Mode::kStoreInServer), "ps-store-in-server");
  EXPECT_THROW(ModeFromName("ps"), ConfigError);
  EXPECT_THROW(Cfg(0, 1).Validate(), ConfigError);
  EXPECT_THROW(Cfg(1, 0).Validate(), ConfigError);
}

TEST(TrainingTest, LossDecreasesOverTwoHundredIterations) {
  const auto& f = Small();
  DicmModel init(f.config);
  TrainOptions opt;
  opt.epochs = 100;
  opt.max_iterations = 200;
  OptimizerConfig o;
  o.lr = {0.003, 0.9, 1000};
  const auto r = TrainCluster(Cfg(2, 2, Mode::kAms, 32), init, f.data.images, f.data.train, o,
                              opt);
  ASSERT_EQ(r.log.size(), 200u);
  double first = 0, last = 0;
  for (int i = 0; i < 20; ++i) {
    first += r.log[i].loss;
    last += r.log[180 + i].loss;
  }
  EXPECT_LT(last, first * 0.95);
  EXPECT_EQ(r.log[5].iteration, 5u);
}

TEST(TrainingTest, SameSeedSameLog) {
  const auto& f = Small();
  DicmModel init(f.config);
  TrainOptions opt;
  opt.max_iterations = 5;
  const auto a = TrainCluster(Cfg(2, 2), init, f.data.images, f.data.train, Opt(), opt);
  const auto b = TrainCluster(Cfg(2, 2), init, f.data.images, f.data.train, Opt(), opt);
  EXPECT_EQ(LogCsv(a.log), LogCsv(b.log));
  EXPECT_EQ(LogCsv(a.log).substr(0, 18), "iteration,loss,lr\n");
}

// ---------------------------------------------------------------------------

TEST(AccountingTest, ClosedFormMatchesMeteredTraffic) {
  const auto& f = Small();
  const auto samples = Slice(0, 150);  // 3 batches of 48 plus a short one
  const auto rep = Accounting(f.config, 3, 16, samples);
  EXPECT_EQ(rep.num_batches, 4u);
  TrainOptions opt;
  opt.shuffle = false;
  for (Mode mode : {Mode::kAms, Mode::kStoreInServer, Mode::kStoreInWorker}) {
    DicmModel init(f.config);
    const auto r = TrainCluster(Cfg(3, 2, mode), init, f.data.images, samples, Opt(), opt);
    const auto& row = rep.row(mode);
    const auto& m = r.meter;
    const uint64_t image =
        m.Sent(Category::kImageEmbedding, Direction::kServerToWorker).accounted_bytes() +
        m.Sent(Category::kImageEmbedding, Direction::kWorkerToServer).accounted_bytes() +
        m.Sent(Category::kImageFeature, Direction::kServerToWorker).accounted_bytes();
    const uint64_t id = m.Sent(Category::kIdParam, Direction::kServerToWorker).accounted_bytes() +
                        m.Sent(Category::kIdParam, Direction::kWorkerToServer).accounted_bytes();
    EXPECT_EQ(row.comm_image, image) << ModeName(mode);
    EXPECT_EQ(row.comm_id, id) << ModeName(mode);
    EXPECT_EQ(row.comm_all, image + id) << ModeName(mode);
    EXPECT_EQ(row.worker_storage,
              m.Sent(Category::kSampleData, Direction::kStorageToWorker).accounted_bytes())
        << ModeName(mode);
  }
}

TEST(AccountingTest, HandComputedCells) {
  // Two users, one worker, batch 4: user 0 has 3 impressions sharing images
  // {1, 2}, user 1 has 1 impression.
  ModelConfig c = Small().config;
  c.schema.d_raw = 4096;
  c.schema.d_img = 12;
  c.schema.d_id = 12;
  c.schema.b_max = 32;
  std::vector<Sample> s(4);
  for (int i = 0; i < 3; ++i) {
    s[i].user = 0;
    s[i].ad = static_cast<uint64_t>(i);
    s[i].ad_image = i == 0 ? 1 : 3;
    s[i].behavior_items = {5, 6};
    s[i].behavior_images = {1, 2};
  }
  s[3].user = 1;
  s[3].ad = 0;
  s[3].ad_image = 4;
  const auto rep = Accounting(c, 1, 4, s);
  EXPECT_EQ(rep.num_batches, 1u);
  EXPECT_EQ(rep.unique_images, 4u);     // {1, 2, 3, 4}
  EXPECT_EQ(rep.requested_images, 4u);
  EXPECT_EQ(rep.image_refs, 2u + 3 + 1);  // grouped behaviors + ad images
  // Group records: user 0 = 1 + 1 + 4 + 1 + 3*6 = 25; user 1 = 1 + 1 + 0 + 1 + 6 = 9.
  const uint64_t grouped = (25 + 9) * 4;
  EXPECT_EQ(rep.row(Mode::kAms).worker_storage, grouped);
  EXPECT_EQ(rep.row(Mode::kStoreInWorker).worker_storage, grouped + 6 * 4096 * 4);
  EXPECT_EQ(rep.row(Mode::kAms).server_storage, 4u * 4096 * 4);
  EXPECT_EQ(rep.row(Mode::kStoreInWorker).server_storage, 0u);
  EXPECT_EQ(rep.row(Mode::kAms).comm_image, 2u * 4 * 12 * 4);
  EXPECT_EQ(rep.row(Mode::kStoreInServer).comm_image, 4u * 4096 * 4);
  EXPECT_EQ(rep.row(Mode::kStoreInWorker).comm_image, 0u);
  // ID keys per field: user {0,1}, scenario {0}, ad {0,1,2}, category {0},
  // ad image {1,3,4}, behavior items {5,6}, behavior images {1,2} = 14 rows.
  EXPECT_EQ(rep.requested_keys, 14u);
  EXPECT_EQ(rep.row(Mode::kAms).comm_all, 2u * 14 * 12 * 4 + 2u * 4 * 12 * 4);
  EXPECT_NEAR(rep.per_image_compression, 4096.0 / 12.0, 1e-12);
  EXPECT_GE(rep.per_image_compression, 340.0);
  // Mode monotonicity with reuse.
  EXPECT_LT(rep.row(Mode::kAms).comm_image, rep.row(Mode::kStoreInServer).comm_image);
  EXPECT_LT(rep.row(Mode::kAms).worker_storage, rep.row(Mode::kStoreInWorker).worker_storage);
  const std::string csv = rep.Csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "strategy,worker_storage,server_storage,comm_all,comm_image,worker_storage_total,"
            "server_storage_total,comm_all_total,comm_image_total");
}

}  // namespace
}  // namespace dicm::ams

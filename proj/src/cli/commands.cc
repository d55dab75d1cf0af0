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

#include "dicm/cli/commands.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dicm/ams/accounting.h"
#include "dicm/ams/batch_stats.h"
#include "dicm/ams/training.h"
#include "dicm/common/error.h"
#include "dicm/data/dataset_io.h"
#include "dicm/deployment/checkpoint.h"
#include "dicm/deployment/inference.h"
#include "dicm/metrics/metrics.h"
#include "dicm/numerics/ops.h"

namespace dicm::cli {

namespace fs = std::filesystem;
using ams::Mode;

namespace {

std::string OutPath(const ExperimentConfig& c, const std::string& name) {
  return (fs::path(c.paths.out_dir) / name).string();
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw IoError("cannot write " + path);
}

// Creates the output directory and records the resolved config there.
void PrepareOutput(const ExperimentConfig& c) {
  std::error_code ec;
  fs::create_directories(c.paths.out_dir, ec);
  if (ec) throw IoError("cannot create " + c.paths.out_dir + ": " + ec.message());
  WriteText(OutPath(c, "resolved_config.yaml"), ToYaml(c));
}

data::Dataset LoadOrGenerate(const ExperimentConfig& c) {
  return c.paths.data_dir.empty() ? data::Generate(c.data) : data::LoadDataset(c.paths.data_dir);
}

std::string Num(double v) { return fmt::format("{:.17g}", v); }

struct EvalRow {
  std::string model;
  std::string split;
  size_t samples = 0;
  double auc = NAN;
  double gauc = NAN;
  double logloss = NAN;
};

EvalRow Score(std::span<const double> logits, std::span<const data::Sample> samples) {
  EvalRow r;
  r.samples = samples.size();
  std::vector<double> probs;
  std::vector<int> labels;
  std::vector<metrics::ScoredImpression> imps;
  for (size_t i = 0; i < samples.size(); ++i) {
    probs.push_back(numerics::Sigmoid(logits[i]));
    labels.push_back(samples[i].label);
    imps.push_back({samples[i].user, logits[i], samples[i].label});
  }
  try {
    r.auc = metrics::Auc(logits, labels);
  } catch (const UndefinedMetricError&) {
  }
  try {
    r.gauc = metrics::Gauc(imps);
  } catch (const UndefinedMetricError&) {
  }
  if (!samples.empty()) r.logloss = metrics::LogLoss(probs, labels).value;
  return r;
}

std::string EvalCsv(const std::vector<EvalRow>& rows) {
  std::string out = "model,split,samples,auc,gauc,logloss\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{}\n", r.model, r.split, r.samples, Num(r.auc),
                       Num(r.gauc), Num(r.logloss));
  }
  return out;
}

std::vector<double> ReadScoresCsv(const std::string& path, std::vector<data::Sample>* samples) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::vector<double> scores;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || (lineno == 1 && line.rfind("user", 0) == 0)) continue;
    std::istringstream s(line);
    std::string user, score, label;
    if (!std::getline(s, user, ',') || !std::getline(s, score, ',') || !std::getline(s, label)) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected user,score,label");
    }
    try {
      data::Sample smp;
      smp.user = std::stoull(user);
      smp.label = std::stoi(label);
      if (smp.label != 0 && smp.label != 1) throw std::invalid_argument("label");
      scores.push_back(std::stod(score));
      samples->push_back(smp);
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": bad value in '" + line + "'");
    }
  }
  return scores;
}

ams::TrainResult Train(const ExperimentConfig& c, const model::DicmModel& init,
                       const data::Dataset& ds, const ams::OptimizerState* state) {
  ams::TrainOptions opt;
  opt.batch_size = c.train.batch_size;
  opt.epochs = c.train.epochs;
  opt.seed = c.train.seed;
  opt.shuffle = c.train.shuffle;
  opt.max_iterations = c.train.max_iterations;
  const auto optimizer = BuildOptimizerConfig(c.train);
  if (c.train.trainer == "reference") {
    return ams::TrainReference(init, ds.images, ds.train, optimizer, opt, state);
  }
  return ams::TrainCluster(BuildClusterConfig(c.cluster), init, ds.images, ds.train, optimizer,
                           opt, state);
}

const std::vector<data::Sample>& Split(const ExperimentConfig& c, const data::Dataset& ds) {
  return c.eval.split == "train" ? ds.train : ds.test;
}

}  // namespace

void CmdGenData(const ExperimentConfig& c, std::ostream& log) {
  PrepareOutput(c);
  const auto ds = data::Generate(c.data);
  const std::string dir = OutPath(c, "dataset");
  data::SaveDataset(ds, dir);
  log << fmt::format("wrote {}: {} train / {} test samples, {} images\n", dir, ds.train.size(),
                     ds.test.size(), ds.images.size());
}

void CmdTrain(const ExperimentConfig& c, std::ostream& log) {
  PrepareOutput(c);
  const auto ds = LoadOrGenerate(c);
  const auto config = BuildModelConfig(c.model, ds.meta, ds.config.latent_dim);
  model::DicmModel init(config);
  std::optional<ams::OptimizerState> state;
  if (!c.paths.init_checkpoint.empty()) {
    auto w = deployment::LoadWarmup(deployment::LoadCheckpoint(c.paths.init_checkpoint),
                                    deployment::WarmupMask::FromName(c.train.warmup),
                                    config.init_seed);
    if (ModelConfigToJson(w.model.config()) != ModelConfigToJson(config)) {
      throw ConfigError("init checkpoint " + c.paths.init_checkpoint +
                        " was trained with a different model config");
    }
    init = std::move(w.model);
    state = std::move(w.optimizer);
  }
  const auto result = Train(c, init, ds, state ? &*state : nullptr);
  deployment::SaveCheckpoint(OutPath(c, "checkpoint.bin"),
                             deployment::MakeCheckpoint(result.model, result.optimizer,
                                                        result.log.size()));
  WriteText(OutPath(c, "metrics.csv"), ams::LogCsv(result.log));
  if (c.train.trainer == "cluster") WriteText(OutPath(c, "traffic.csv"), result.meter.ReportCsv());
  log << fmt::format("trained {} iterations ({} trainer, {} parameters); final loss {:.6f}\n",
                     result.log.size(), c.train.trainer, result.model.ParameterCount(),
                     result.log.empty() ? NAN : result.log.back().loss);
}

void CmdEval(const ExperimentConfig& c, std::ostream& log) {
  PrepareOutput(c);
  std::vector<EvalRow> rows;
  if (!c.paths.scores.empty()) {
    std::vector<data::Sample> samples;
    const auto scores = ReadScoresCsv(c.paths.scores, &samples);
    rows.push_back(Score(scores, samples));
    rows.back().model = "scores";
    rows.back().split = c.paths.scores;
  } else if (c.eval.sweep.empty() || !c.paths.checkpoint.empty()) {
    if (c.paths.checkpoint.empty()) throw ConfigError("eval needs paths.checkpoint or paths.scores");
    const auto ds = LoadOrGenerate(c);
    const auto m = deployment::ModelFromCheckpoint(deployment::LoadCheckpoint(c.paths.checkpoint));
    const auto& samples = Split(c, ds);
    rows.push_back(Score(model::PredictLogits(m, model::MakeExtractor(m.config()), ds.images,
                                              samples),
                         samples));
    rows.back().model = "checkpoint";
    rows.back().split = c.eval.split;
  }
  WriteText(OutPath(c, "eval.csv"), EvalCsv(rows));
  for (const auto& r : rows) {
    log << fmt::format("{} {}: n={} auc={:.6f} gauc={:.6f} logloss={:.6f}\n", r.model, r.split,
                       r.samples, r.auc, r.gauc, r.logloss);
  }

  if (c.eval.sweep.empty()) return;
  const auto ds = LoadOrGenerate(c);
  std::vector<EvalRow> sweep;
  for (const auto& name : c.eval.sweep) {
    ExperimentConfig variant = c;
    variant.model.aggregator = name;
    const auto config = BuildModelConfig(variant.model, ds.meta, ds.config.latent_dim);
    const auto result = Train(variant, model::DicmModel(config), ds, nullptr);
    const auto& samples = Split(c, ds);
    sweep.push_back(Score(model::PredictLogits(result.model, model::MakeExtractor(config),
                                               ds.images, samples),
                          samples));
    sweep.back().model = name;
    sweep.back().split = c.eval.split;
    log << fmt::format("{:<16} auc={:.6f} gauc={:.6f}\n", name, sweep.back().auc,
                       sweep.back().gauc);
  }
  WriteText(OutPath(c, "aggregators.csv"), EvalCsv(sweep));
}

void CmdAccounting(const ExperimentConfig& c, std::ostream& log) {
  PrepareOutput(c);
  const auto ds = LoadOrGenerate(c);
  const auto config = BuildModelConfig(c.model, ds.meta, ds.config.latent_dim);
  std::span<const data::Sample> samples = ds.train;
  if (c.accounting.max_samples != 0 && c.accounting.max_samples < samples.size()) {
    samples = samples.first(c.accounting.max_samples);
  }
  const auto rep = ams::Accounting(config, c.cluster.workers, c.cluster.per_worker_batch, samples);
  WriteText(OutPath(c, "accounting.csv"), rep.Csv());
  log << fmt::format("{} samples, {} minibatches of {} x {}; {} unique images, "
                     "{} image references after grouping\n",
                     rep.samples, rep.num_batches, c.cluster.workers, c.cluster.per_worker_batch,
                     rep.unique_images, rep.image_refs);
  log << fmt::format("{:<20}{:>16}{:>16}{:>16}{:>16}\n", "strategy", "worker storage",
                     "server storage", "comm all", "comm image");
  for (Mode mode : {Mode::kStoreInWorker, Mode::kStoreInServer, Mode::kAms}) {
    const auto& r = rep.row(mode);
    log << fmt::format("{:<20}{:>16.1f}{:>16.1f}{:>16.1f}{:>16.1f}\n", ams::ModeName(mode),
                       rep.PerBatch(r.worker_storage), rep.PerBatch(r.server_storage),
                       rep.PerBatch(r.comm_all), rep.PerBatch(r.comm_image));
  }
  log << fmt::format("per-image compression ratio (ps-store-in-server / ams): {:.2f}\n",
                     rep.per_image_compression);
}

void CmdExport(const ExperimentConfig& c, std::ostream& log) {
  PrepareOutput(c);
  if (c.paths.checkpoint.empty()) throw ConfigError("export needs paths.checkpoint");
  const auto ds = LoadOrGenerate(c);
  const auto ckpt = deployment::LoadCheckpoint(c.paths.checkpoint);
  const auto m = deployment::ModelFromCheckpoint(ckpt);
  std::vector<uint64_t> ids(ds.images.size());
  std::iota(ids.begin(), ids.end(), uint64_t{0});
  const auto table =
      deployment::InferenceTable::Export(m, model::MakeExtractor(m.config()), ds.images, ids);
  table.Save(OutPath(c, "inference_table.bin"));
  deployment::SaveCheckpoint(OutPath(c, "inference_model.ckpt"), ckpt);
  log << fmt::format("exported {} image embeddings of width {}\n", table.size(), table.dim());
}

void CmdPredict(const ExperimentConfig& c, std::ostream& log) {
  PrepareOutput(c);
  if (c.paths.checkpoint.empty() || c.paths.table.empty()) {
    throw ConfigError("predict needs paths.checkpoint and paths.table");
  }
  const auto ds = LoadOrGenerate(c);
  const auto samples = c.paths.samples.empty() ? ds.test : data::ReadSamples(c.paths.samples);
  deployment::KvPredictor kv(
      deployment::ModelFromCheckpoint(deployment::LoadCheckpoint(c.paths.checkpoint)),
      deployment::InferenceTable::Load(c.paths.table), ds.images);
  const auto logits = kv.Logits(samples);
  std::string out = "index,user,label,logit,probability\n";
  for (size_t i = 0; i < samples.size(); ++i) {
    out += fmt::format("{},{},{},{},{}\n", i, samples[i].user, samples[i].label, Num(logits[i]),
                       Num(numerics::Sigmoid(logits[i])));
  }
  WriteText(OutPath(c, "scores.csv"), out);
  log << fmt::format("scored {} samples ({} cold image lookups)\n", samples.size(),
                     kv.cold_lookups());
}

int Main(int argc, char** argv) {
  CLI::App app{"DICM experiment driver"};
  app.require_subcommand(1);
  std::string config_path, out, mode, aggregator, warmup, data_dir, checkpoint, table, samples,
      scores, init_checkpoint;
  std::optional<uint64_t> seed;
  app.add_option("--config", config_path, "YAML experiment config");
  app.add_option("--seed", seed, "seed for data, model init and training");
  app.add_option("--out", out, "output directory");
  app.add_option("--mode", mode, "ams | ps-store-in-server | store-in-worker");
  app.add_option("--aggregator", aggregator, "concat | max | sum | attn | multiquery-attn");
  app.add_option("--warmup", warmup, "non | partial | full");
  app.add_option("--data", data_dir, "dataset directory (default: generate from config)");
  app.add_option("--checkpoint", checkpoint, "model checkpoint");
  app.add_option("--init-checkpoint", init_checkpoint, "warm-up source for train");
  app.add_option("--table", table, "inference table for predict");
  app.add_option("--samples", samples, "JSONL samples for predict");
  app.add_option("--scores", scores, "CSV user,score,label for eval");
  using Cmd = void (*)(const ExperimentConfig&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, Cmd>> commands = {
      {"gen-data", "generate a synthetic dataset", CmdGenData},
      {"train", "train a model", CmdTrain},
      {"eval", "AUC, GAUC and log loss of a checkpoint or scores file", CmdEval},
      {"accounting", "storage and communication per strategy", CmdAccounting},
      {"export", "precompute image embeddings for serving", CmdExport},
      {"predict", "score samples with the key-value predictor", CmdPredict},
  };
  for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help)->fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : LoadExperimentConfig(config_path);
    if (seed) c.data.seed = c.model.init_seed = c.train.seed = *seed;
    if (!out.empty()) c.paths.out_dir = out;
    if (!mode.empty()) c.cluster.mode = mode;
    if (!aggregator.empty()) c.model.aggregator = aggregator;
    if (!warmup.empty()) c.train.warmup = warmup;
    if (!data_dir.empty()) c.paths.data_dir = data_dir;
    if (!checkpoint.empty()) c.paths.checkpoint = checkpoint;
    if (!init_checkpoint.empty()) c.paths.init_checkpoint = init_checkpoint;
    if (!table.empty()) c.paths.table = table;
    if (!samples.empty()) c.paths.samples = samples;
    if (!scores.empty()) c.paths.scores = scores;
    c.Validate();
    for (const auto& [name, help, fn] : commands) {
      if (app.got_subcommand(name)) fn(c, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace dicm::cli

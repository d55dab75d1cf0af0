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

#ifndef DICM_CLI_COMMANDS_H_
#define DICM_CLI_COMMANDS_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "dicm/cli/experiment_config.h"

namespace dicm::cli {

// Output files, all under paths.out_dir, next to resolved_config.yaml:
//   gen-data    dataset/ (see SaveDataset)
//   train       checkpoint.bin, metrics.csv, traffic.csv (cluster trainer)
//   eval        eval.csv, plus aggregators.csv when eval.sweep is set
//   accounting  accounting.csv
//   export      inference_table.bin, inference_model.ckpt
//   predict     scores.csv
//
// CSV headers:
//   metrics.csv      iteration,loss,lr
//   traffic.csv      category,direction,messages,wire_bytes,elements,accounted_bytes
//   eval.csv         model,split,samples,auc,gauc,logloss
//   aggregators.csv  model,split,samples,auc,gauc,logloss
//   accounting.csv   see StorageReport::Csv
//   scores.csv       index,user,label,logit,probability
void CmdGenData(const ExperimentConfig& c, std::ostream& log);
void CmdTrain(const ExperimentConfig& c, std::ostream& log);
void CmdEval(const ExperimentConfig& c, std::ostream& log);
void CmdAccounting(const ExperimentConfig& c, std::ostream& log);
void CmdExport(const ExperimentConfig& c, std::ostream& log);
void CmdPredict(const ExperimentConfig& c, std::ostream& log);

// Entry point of the dicm binary; returns the process exit code.
int Main(int argc, char** argv);

}  // namespace dicm::cli

#endif  // DICM_CLI_COMMANDS_H_

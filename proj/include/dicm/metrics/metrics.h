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

#ifndef DICM_METRICS_METRICS_H_
#define DICM_METRICS_METRICS_H_

#include <cstdint>
#include <span>
#include <vector>

namespace dicm::metrics {

struct ScoredImpression {
  uint64_t user = 0;
  double score = 0.0;
  int label = 0;
};

// Probability that a random positive outranks a random negative, ties
// counting one half. O(n log n). UndefinedMetricError without both classes,
// ContractError on non-finite scores or mismatched lengths.
double Auc(std::span<const double> scores, std::span<const int> labels);

// Impression-weighted mean of per-user AUC over users having both classes.
// UndefinedMetricError when no user qualifies.
double Gauc(std::span<const ScoredImpression> impressions);

struct LogLossResult {
  double value = 0.0;
  size_t clamped = 0;  // probabilities moved into [1e-12, 1 - 1e-12]
};

// -mean(y log p + (1 - y) log(1 - p)).
LogLossResult LogLoss(std::span<const double> probabilities, std::span<const int> labels);

}  // namespace dicm::metrics

#endif  // DICM_METRICS_METRICS_H_

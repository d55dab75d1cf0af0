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

#include "dicm/metrics/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "dicm/common/error.h"

namespace dicm::metrics {

namespace {

constexpr double kClamp = 1e-12;

void CheckInputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ContractError("metric: " + std::to_string(scores.size()) + " scores for " +
                        std::to_string(labels.size()) + " labels");
  }
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw ContractError("metric: non-finite score");
    if (labels[i] != 0 && labels[i] != 1) throw ContractError("metric: label not 0/1");
  }
}

}  // namespace

double Auc(std::span<const double> scores, std::span<const int> labels) {
  CheckInputs(scores, labels);
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney U: for each tie block, positives beat every lower negative
  // and half of the negatives inside the block.
  double wins = 0.0;
  uint64_t negatives_below = 0, positives = 0, negatives = 0;
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    uint64_t pos = 0, neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? pos : neg) += 1;
      ++j;
    }
    wins += static_cast<double>(pos) *
            (static_cast<double>(negatives_below) + 0.5 * static_cast<double>(neg));
    negatives_below += neg;
    positives += pos;
    negatives += neg;
    i = j;
  }
  if (positives == 0 || negatives == 0) {
    throw UndefinedMetricError("AUC undefined: need at least one positive and one negative");
  }
  return wins / (static_cast<double>(positives) * static_cast<double>(negatives));
}

double Gauc(std::span<const ScoredImpression> impressions) {
  std::map<uint64_t, std::pair<std::vector<double>, std::vector<int>>> by_user;
  for (const auto& imp : impressions) {
    auto& [s, l] = by_user[imp.user];
    s.push_back(imp.score);
    l.push_back(imp.label);
  }
  double num = 0.0, den = 0.0;
  for (const auto& [user, sl] : by_user) {
    const auto& [s, l] = sl;
    const bool has_pos = std::find(l.begin(), l.end(), 1) != l.end();
    const bool has_neg = std::find(l.begin(), l.end(), 0) != l.end();
    if (!has_pos || !has_neg) {
      CheckInputs(s, l);
      continue;
    }
    const double w = static_cast<double>(s.size());
    num += w * Auc(s, l);
    den += w;
  }
  if (den == 0.0) throw UndefinedMetricError("GAUC undefined: no user has both classes");
  return num / den;
}

LogLossResult LogLoss(std::span<const double> probabilities, std::span<const int> labels) {
  if (probabilities.size() != labels.size() || probabilities.empty()) {
    throw ContractError("log loss: need equal, non-empty probability and label lists");
  }
  LogLossResult r;
  double total = 0.0;
  for (size_t i = 0; i < probabilities.size(); ++i) {
    double p = probabilities[i];
    if (std::isnan(p)) throw ContractError("log loss: NaN probability");
    if (p < kClamp || p > 1.0 - kClamp) {
      p = std::clamp(p, kClamp, 1.0 - kClamp);
      ++r.clamped;
    }
    total += labels[i] == 1 ? std::log(p) : std::log1p(-p);
  }
  r.value = -total / static_cast<double>(probabilities.size());
  return r;
}

}  // namespace dicm::metrics

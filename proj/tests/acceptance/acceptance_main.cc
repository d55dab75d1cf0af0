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

// Runs every acceptance criterion and prints one PASS/FAIL line per
// criterion. Optional arguments select criteria by number.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <set>

#include "criteria.h"

namespace {

struct Criterion {
  int id;
  const char* name;
  std::function<dicm::acceptance::Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  using namespace dicm::acceptance;
  const Criterion criteria[] = {
      {1, "gradient correctness", GradientCorrectness},
      {2, "distributed oracle equivalence", DistributedEquivalence},
      {3, "dedup and replica invariants", DedupAndReplicas},
      {4, "accounting reproduction", AccountingReproduction},
      {5, "metric oracles", MetricOracles},
      {6, "relative image benefit", ImageBenefit},
      {7, "aggregator ordering", AggregatorOrdering},
      {8, "warm-up semantics", WarmupSemantics},
      {9, "inference export equivalence", InferenceExport},
      {10, "pre-rank model", PrerankModel},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d %s: %s (%.1fs) %s\n", c.id, out.pass ? "PASS" : "FAIL", c.name,
                secs, out.detail.c_str());
    std::fflush(stdout);
    failed += out.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

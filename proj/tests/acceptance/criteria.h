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

#ifndef DICM_TESTS_ACCEPTANCE_CRITERIA_H_
#define DICM_TESTS_ACCEPTANCE_CRITERIA_H_

#include <sstream>
#include <string>

namespace dicm::acceptance {

// Result of one criterion. |detail| carries the measured numbers.
struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects checks; the first failing message is kept in front.
class Checker {
 public:
  template <class T>
  bool Expect(bool ok, const std::string& what, const T& value) {
    std::ostringstream s;
    s.precision(6);
    s << what << "=" << value;
    if (!ok) {
      pass_ = false;
      failures_ += (failures_.empty() ? "" : "; ") + ("FAILED " + s.str());
    } else {
      notes_ += (notes_.empty() ? "" : ", ") + s.str();
    }
    return ok;
  }
  void Note(const std::string& text) { notes_ += (notes_.empty() ? "" : ", ") + text; }
  Outcome Done() const {
    return {pass_, failures_.empty() ? notes_ : failures_ + " | " + notes_};
  }

 private:
  bool pass_ = true;
  std::string failures_;
  std::string notes_;
};

Outcome GradientCorrectness();      // 1
Outcome DistributedEquivalence();   // 2
Outcome DedupAndReplicas();         // 3
Outcome AccountingReproduction();   // 4
Outcome MetricOracles();            // 5
Outcome ImageBenefit();             // 6
Outcome AggregatorOrdering();       // 7
Outcome WarmupSemantics();          // 8
Outcome InferenceExport();          // 9
Outcome PrerankModel();             // 10

}  // namespace dicm::acceptance

#endif  // DICM_TESTS_ACCEPTANCE_CRITERIA_H_

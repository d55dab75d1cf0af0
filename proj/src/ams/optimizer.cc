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

#include "dicm/ams/optimizer.h"

namespace dicm::ams {

OptimizerState OptimizerState::Fresh(const model::DicmModel& model) {
  OptimizerState s;
  for (const auto& g : model.Groups()) {
    std::vector<numerics::AdamState> group;
    for (const auto& p : g.params) {
      group.push_back(g.name == model::kIdGroup ? numerics::AdamState::RowSparse(*p.tensor)
                                                 : numerics::AdamState::Dense(*p.tensor));
    }
    s.states.push_back(std::move(group));
  }
  return s;
}

bool OptimizerState::Matches(const model::DicmModel& model) const {
  const auto groups = model.Groups();
  if (states.size() != groups.size()) return false;
  for (size_t g = 0; g < groups.size(); ++g) {
    if (states[g].size() != groups[g].params.size()) return false;
    for (size_t p = 0; p < states[g].size(); ++p) {
      const auto& t = *groups[g].params[p].tensor;
      const auto& st = states[g][p];
      const size_t want_steps = groups[g].name == model::kIdGroup ? t.rows() : 1;
      if (!st.m.SameShape(t) || !st.v.SameShape(t) || st.steps.size() != want_steps) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace dicm::ams

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

#ifndef DICM_AMS_OPTIMIZER_H_
#define DICM_AMS_OPTIMIZER_H_

#include <vector>

#include "dicm/model/dicm_model.h"
#include "dicm/numerics/adam.h"

namespace dicm::ams {

struct OptimizerConfig {
  numerics::LrSchedule lr;
  numerics::AdamConfig adam;
};

// Adam state for every model tensor, indexed like DicmModel::Groups():
// states[group][param]. ID tables carry row-sparse state.
struct OptimizerState {
  std::vector<std::vector<numerics::AdamState>> states;

  static OptimizerState Fresh(const model::DicmModel& model);
  // True when every state matches the shape of its model tensor.
  bool Matches(const model::DicmModel& model) const;
};

}  // namespace dicm::ams

#endif  // DICM_AMS_OPTIMIZER_H_

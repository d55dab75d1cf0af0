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

#ifndef DICM_COMMON_ERROR_H_
#define DICM_COMMON_ERROR_H_

#include <stdexcept>
#include <string>

namespace dicm {

// All library errors derive from Error so callers (and the CLI) can map them
// to a nonzero exit status with one catch clause.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DICM_DEFINE_ERROR(Name)          \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

DICM_DEFINE_ERROR(DimensionError);
DICM_DEFINE_ERROR(ContractError);
DICM_DEFINE_ERROR(NonFiniteError);
DICM_DEFINE_ERROR(OutOfVocabularyError);
DICM_DEFINE_ERROR(UnknownImageError);
DICM_DEFINE_ERROR(SchemaError);
DICM_DEFINE_ERROR(ConfigError);
DICM_DEFINE_ERROR(UndefinedMetricError);
DICM_DEFINE_ERROR(ProtocolError);
DICM_DEFINE_ERROR(RoutingError);
DICM_DEFINE_ERROR(BarrierTimeout);
DICM_DEFINE_ERROR(IoError);
DICM_DEFINE_ERROR(FormatError);

#undef DICM_DEFINE_ERROR

}  // namespace dicm

#endif  // DICM_COMMON_ERROR_H_

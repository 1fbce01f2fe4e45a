// Copyright 2026 The polykin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace polykin {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define POLYKIN_DEFINE_ERROR(Name)                                  \
  struct Name : Error {                                             \
    explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
  }

POLYKIN_DEFINE_ERROR(DegenerateCollision);
POLYKIN_DEFINE_ERROR(SingularJacobian);
POLYKIN_DEFINE_ERROR(DomainError);
POLYKIN_DEFINE_ERROR(QuadratureFailure);
POLYKIN_DEFINE_ERROR(UnsupportedAngular);
POLYKIN_DEFINE_ERROR(NotFound);
POLYKIN_DEFINE_ERROR(NoValidK0);
POLYKIN_DEFINE_ERROR(RejectionStall);
POLYKIN_DEFINE_ERROR(InsufficientSamples);
POLYKIN_DEFINE_ERROR(HypothesisViolation);
POLYKIN_DEFINE_ERROR(ConfigError);

#undef POLYKIN_DEFINE_ERROR

}  // namespace polykin

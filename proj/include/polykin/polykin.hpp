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

#include "polykin/analysis.hpp"
#include "polykin/collision.hpp"
#include "polykin/config.hpp"
#include "polykin/core.hpp"
#include "polykin/dsmc.hpp"
#include "polykin/errors.hpp"
#include "polykin/models.hpp"
#include "polykin/numerics.hpp"
#include "polykin/rng.hpp"
#include "polykin/stats.hpp"

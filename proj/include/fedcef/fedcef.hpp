// Copyright 2026 The fedcef Authors. All Rights Reserved.
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
// =============================================================================

#pragma once

#include "fedcef/algorithms/baselines.hpp"
#include "fedcef/algorithms/fedcef.hpp"
#include "fedcef/algorithms/state.hpp"
#include "fedcef/compressors.hpp"
#include "fedcef/core/error.hpp"
#include "fedcef/core/param_vector.hpp"
#include "fedcef/core/rng.hpp"
#include "fedcef/metrics.hpp"
#include "fedcef/problems.hpp"
#include "fedcef/regularizers.hpp"

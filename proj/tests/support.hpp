// Copyright 2026 The ceadapt Authors
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

#include "ceadapt/config.hpp"
#include "ceadapt/value_family.hpp"

namespace ceadapt::testing {

/// Default mountain car family (8 samples, 128×128), solved once per process.
const PolicyFamily& reference_family();

/// 1-D chain on nodes {0, 1, 2}: one action that moves one node right per dt, unit
/// stage cost, node 2 absorbing.
EnvironmentSpec toy_chain(double dt);

/// Small environment with Δ ≡ 0 and dynamics/cost symmetric under x ↦ −x.
EnvironmentSpec symmetric_toy();

/// Family over `grid` whose value tables are filled from `fn(node_state, θ)` and whose
/// policy entries come from `action` (action 0 when empty).
PolicyFamily synthetic_family(const EnvironmentSpec& env, const Grid& grid, const std::vector<double>& thetas,
                              const std::function<double(const StateVec&, double)>& fn,
                              const std::function<int(const StateVec&, double)>& action = {});

}  // namespace ceadapt::testing

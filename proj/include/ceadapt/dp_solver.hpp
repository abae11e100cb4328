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

#include <vector>

#include "ceadapt/grid.hpp"
#include "ceadapt/model.hpp"

namespace ceadapt {

struct SolverConfig {
  /// Time step of the discrete-time dynamics used by value iteration [s].
  double dt = 0.1;
  /// How the dynamics are integrated across one dt with the action held fixed.
  enum class Integrator { kEuler, kRk4 } integrator = Integrator::kRk4;
  /// Integrator substeps per dt.
  int substeps = 10;
  /// Stop once max |ΔV| over a sweep falls below this (value units).
  double sweep_tolerance = 1e-6;
  int max_sweeps = 5000;
  /// Goal-absorbing slack in cells: a node is absorbing when it is in the goal
  /// region enlarged by this many cell widths per axis.
  double goal_slack_cells = 0.5;
  /// Use ℓ_a (stage cost + constraint penalty) inside the backup.
  bool use_penalty = true;
  /// Worker threads for sweeps; 0 picks the hardware concurrency.
  int threads = 0;

  void validate() const;
};

struct ValueTable {
  Grid grid;
  std::vector<double> values;
  std::vector<char> absorbing;
};

/// Greedy action per node, stored as an index into the environment's action_set.
struct PolicyTable {
  Grid grid;
  std::vector<int> actions;
};

struct BackupResult {
  double value = 0.0;
  int action = 0;
};

struct SolveStats {
  bool converged = false;
  int sweeps = 0;
  /// max |ΔV| of the last sweep performed.
  double residual = 0.0;
  double seconds = 0.0;
  /// max |ΔV| per sweep, in order.
  std::vector<double> sweep_deltas;
};

struct SolveResult {
  ValueTable value;
  PolicyTable policy;
  SolveStats stats;
};

StateVec goal_slack(const Grid& grid, const SolverConfig& cfg);
std::vector<char> absorbing_mask(const EnvironmentSpec& env, const Grid& grid, const SolverConfig& cfg);

/// State reached from x after dt under constant u, clamped to the grid.
StateVec transition(const EnvironmentSpec& env, const ParamVec& theta, const Grid& grid, const StateVec& x,
                    const ControlVec& u, const SolverConfig& cfg);

/// Stage cost used inside the backup (ℓ_a when the penalty is enabled).
double backup_cost(const EnvironmentSpec& env, const SolverConfig& cfg, const StateVec& x,
                   const ControlVec& u);

/// One Bellman backup at `node`, evaluated directly from the environment callbacks:
///   min_u [ ℓ_a(x,u)·dt + V(transition(x,u)) ]
/// Ties go to the smallest action index. Absorbing nodes return (0, null action).
BackupResult bellman_backup(const EnvironmentSpec& env, const ParamVec& theta, const ValueTable& table,
                            std::size_t node, const SolverConfig& cfg);

/// Synchronous (Jacobi) value iteration from V ≡ 0. Non-convergence is reported in
/// `stats.converged`, never thrown.
SolveResult value_iteration(const EnvironmentSpec& env, const ParamVec& theta, const Grid& grid,
                            const SolverConfig& cfg);

/// `count` uniformly spaced scalar samples spanning the environment's parameter box.
std::vector<ParamVec> uniform_theta_samples(const EnvironmentSpec& env, int count);

}  // namespace ceadapt

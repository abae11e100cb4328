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

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ceadapt/types.hpp"

namespace ceadapt {

struct AxisBounds {
  double min = 0.0;
  double max = 0.0;
  double span() const { return max - min; }
};

/// Hinge ("L1") penalty on states near the state bounds:
///   σ(x) = Σ_axes w · max(0, margin − dist_to_bound(x))
/// Outside the box the penalty is evaluated at the boundary and grows with
/// `exterior_slope` per unit of violation. Each bound can be switched off, which
/// is how a goal lying on a bound is kept penalty-free.
struct ConstraintPenalty {
  double weight = 10.0;
  double margin = 0.05;
  double exterior_slope = 10.0;
  std::vector<bool> penalize_lower;
  std::vector<bool> penalize_upper;
};

/// A parametrically uncertain control problem ẋ = f(x,u) − Δ(x)ᵀθ with stage cost ℓ.
/// Declared as data plus pure callbacks so solver and learner code is environment-agnostic.
struct EnvironmentSpec {
  using DynamicsFn = std::function<StateVec(const StateVec&, const ControlVec&)>;
  using BasisFn = std::function<BasisMat(const StateVec&)>;
  using CostFn = std::function<double(const StateVec&, const ControlVec&)>;
  /// Goal membership with a per-axis slack (zero slack = exact goal test).
  using GoalFn = std::function<bool(const StateVec&, const StateVec& slack)>;
  /// Projects a simulated state back onto the admissible set (walls, clips).
  using BoundaryFn = std::function<void(StateVec&)>;

  std::string name;
  int n = 0;
  int m = 0;
  int p = 0;
  StateVec goal_state;
  std::vector<AxisBounds> state_bounds;
  std::vector<ControlVec> action_set;
  std::vector<AxisBounds> control_bounds;
  /// Index into action_set reported for goal-absorbing nodes.
  int null_action = 0;
  ParamDomain param_domain;

  DynamicsFn known_dynamics;
  BasisFn basis;
  CostFn stage_cost;
  GoalFn in_goal;
  BoundaryFn apply_boundary;
  std::optional<ConstraintPenalty> penalty;
  /// Scalar constants baked into the callbacks, recorded so stored artifacts can be
  /// matched against the environment that produced them.
  std::map<std::string, double> constants;

  void validate() const;
};

struct MountainCarOptions {
  double goal_position = 0.5;
  double cost_sharpness = 40.0;
  double control_gain = 0.1;
  double theta_min = 0.05;
  double theta_max = 0.4;
  bool constraint_penalty = true;
  ConstraintPenalty penalty{};
};

/// Mountain car with unknown slope: ṗ = v, v̇ = 0.1u − θ cos(3p),
/// p ∈ [−1.2, 0.5], v ∈ [−1, 1], u ∈ {−1, 0, 1}, θ ∈ [0.05, 0.4].
EnvironmentSpec make_mountain_car(const MountainCarOptions& opts = {});

StateVec eval_known_dynamics(const EnvironmentSpec& env, const StateVec& x, const ControlVec& u);
BasisMat eval_basis(const EnvironmentSpec& env, const StateVec& x);
/// f(x,u) − Δ(x)ᵀθ. θ need not lie in the parameter box.
StateVec eval_dynamics(const EnvironmentSpec& env, const StateVec& x, const ControlVec& u,
                       const ParamVec& theta);
double stage_cost(const EnvironmentSpec& env, const StateVec& x, const ControlVec& u);
double constraint_penalty(const EnvironmentSpec& env, const StateVec& x);
/// ℓ(x,u) + σ(g(x)); equals stage_cost when no penalty is configured.
double augmented_stage_cost(const EnvironmentSpec& env, const StateVec& x, const ControlVec& u);

}  // namespace ceadapt

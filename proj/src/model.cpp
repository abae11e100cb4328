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

#include "ceadapt/model.hpp"

#include <algorithm>
#include <cmath>

namespace ceadapt {

void EnvironmentSpec::validate() const {
  require(n > 0 && m > 0 && p > 0, name + ": dimensions must be positive");
  require(goal_state.size() == n, name + ": goal_state has wrong length");
  require(static_cast<int>(state_bounds.size()) == n, name + ": state_bounds has wrong length");
  for (const auto& b : state_bounds) require(b.min < b.max, name + ": empty state bound");
  require(!action_set.empty(), name + ": action_set is empty");
  for (const auto& a : action_set) require(a.size() == m, name + ": action has wrong length");
  require(static_cast<int>(control_bounds.size()) == m, name + ": control_bounds has wrong length");
  require(null_action >= 0 && null_action < static_cast<int>(action_set.size()),
          name + ": null_action out of range");
  require(param_domain.size() == p, name + ": param_domain has wrong length");
  require(static_cast<bool>(known_dynamics) && static_cast<bool>(basis) &&
              static_cast<bool>(stage_cost) && static_cast<bool>(in_goal),
          name + ": missing callback");
  if (penalty) {
    require(static_cast<int>(penalty->penalize_lower.size()) == n &&
                static_cast<int>(penalty->penalize_upper.size()) == n,
            name + ": penalty axis flags have wrong length");
    require(penalty->weight >= 0.0 && penalty->margin >= 0.0 && penalty->exterior_slope >= 0.0,
            name + ": penalty parameters must be nonnegative");
  }
}

EnvironmentSpec make_mountain_car(const MountainCarOptions& opts) {
  EnvironmentSpec env;
  env.name = "mountain_car";
  env.n = 2;
  env.m = 1;
  env.p = 1;
  env.goal_state = vec2(opts.goal_position, 0.0);
  env.state_bounds = {{-1.2, opts.goal_position}, {-1.0, 1.0}};
  env.action_set = {scalar_vec(-1.0), scalar_vec(0.0), scalar_vec(1.0)};
  env.control_bounds = {{-1.0, 1.0}};
  env.null_action = 1;
  env.param_domain = ParamDomain(scalar_vec(opts.theta_min), scalar_vec(opts.theta_max));
  env.constants = {{"goal_position", opts.goal_position},
                   {"cost_sharpness", opts.cost_sharpness},
                   {"control_gain", opts.control_gain}};

  const double gain = opts.control_gain;
  env.known_dynamics = [gain](const StateVec& x, const ControlVec& u) {
    return vec2(x(1), gain * u(0));
  };
  env.basis = [](const StateVec& x) {
    BasisMat d(1, 2);
    d << 0.0, std::cos(3.0 * x(0));
    return d;
  };
  const double goal = opts.goal_position;
  const double k = opts.cost_sharpness;
  env.stage_cost = [goal, k](const StateVec& x, const ControlVec&) {
    return 1.0 - std::exp(-k * std::abs(x(0) - goal));
  };
  env.in_goal = [goal](const StateVec& x, const StateVec& slack) { return x(0) >= goal - slack(0); };

  const double p_min = env.state_bounds[0].min;
  env.apply_boundary = [p_min](StateVec& x) {
    // Inelastic wall on the left; the right edge is the goal and ends the episode.
    if (x(0) < p_min) {
      x(0) = p_min;
      if (x(1) < 0.0) x(1) = 0.0;
    }
    x(1) = std::clamp(x(1), -1.0, 1.0);
  };

  if (opts.constraint_penalty) {
    ConstraintPenalty pen = opts.penalty;
    if (pen.penalize_lower.empty()) pen.penalize_lower = {true, true};
    if (pen.penalize_upper.empty()) pen.penalize_upper = {false, true};
    env.penalty = pen;
  }
  env.validate();
  return env;
}

namespace {

void check_state(const EnvironmentSpec& env, const StateVec& x) {
  if (x.size() != env.n) {
    throw ContractViolation(env.name + ": state has length " + std::to_string(x.size()) +
                            ", expected " + std::to_string(env.n));
  }
}

void check_control(const EnvironmentSpec& env, const ControlVec& u) {
  if (u.size() != env.m) {
    throw ContractViolation(env.name + ": control has length " + std::to_string(u.size()) +
                            ", expected " + std::to_string(env.m));
  }
}

}  // namespace

StateVec eval_known_dynamics(const EnvironmentSpec& env, const StateVec& x, const ControlVec& u) {
  check_state(env, x);
  check_control(env, u);
  return env.known_dynamics(x, u);
}

BasisMat eval_basis(const EnvironmentSpec& env, const StateVec& x) {
  check_state(env, x);
  BasisMat d = env.basis(x);
  require(d.rows() == env.p && d.cols() == env.n, env.name + ": basis callback returned wrong shape");
  return d;
}

StateVec eval_dynamics(const EnvironmentSpec& env, const StateVec& x, const ControlVec& u,
                       const ParamVec& theta) {
  if (theta.size() != env.p) throw ContractViolation(env.name + ": parameter has wrong length");
  return eval_known_dynamics(env, x, u) - eval_basis(env, x).transpose() * theta;
}

double stage_cost(const EnvironmentSpec& env, const StateVec& x, const ControlVec& u) {
  check_state(env, x);
  return env.stage_cost(x, u);
}

double constraint_penalty(const EnvironmentSpec& env, const StateVec& x) {
  check_state(env, x);
  if (!env.penalty) return 0.0;
  const ConstraintPenalty& pen = *env.penalty;
  double sigma = 0.0;
  auto hinge = [&pen](double dist) {
    if (dist >= 0.0) return pen.weight * std::max(0.0, pen.margin - dist);
    return pen.weight * pen.margin + pen.exterior_slope * (-dist);
  };
  for (int i = 0; i < env.n; ++i) {
    if (pen.penalize_lower[i]) sigma += hinge(x(i) - env.state_bounds[i].min);
    if (pen.penalize_upper[i]) sigma += hinge(env.state_bounds[i].max - x(i));
  }
  return sigma;
}

double augmented_stage_cost(const EnvironmentSpec& env, const StateVec& x, const ControlVec& u) {
  return stage_cost(env, x, u) + constraint_penalty(env, x);
}

}  // namespace ceadapt

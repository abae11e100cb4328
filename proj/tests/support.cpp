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

#include "support.hpp"

#include <cmath>

namespace ceadapt::testing {

const PolicyFamily& reference_family() {
  static const PolicyFamily fam = [] {
    const ExperimentConfig cfg = default_config();
    const EnvironmentSpec env = make_environment(cfg);
    return solve_family(env, make_theta_samples(cfg, env), make_grid(cfg, env), cfg.solver, cfg.smoothing);
  }();
  return fam;
}

EnvironmentSpec toy_chain(double dt) {
  EnvironmentSpec env;
  env.name = "toy_chain";
  env.n = 1;
  env.m = 1;
  env.p = 1;
  env.goal_state = StateVec::Constant(1, 2.0);
  env.state_bounds = {{0.0, 2.0}};
  env.action_set = {ControlVec::Constant(1, 1.0)};
  env.control_bounds = {{0.0, 1.0}};
  env.null_action = 0;
  env.param_domain = ParamDomain(scalar_vec(0.0), scalar_vec(1.0));
  env.known_dynamics = [dt](const StateVec&, const ControlVec& u) { return StateVec::Constant(1, u(0) / dt); };
  env.basis = [](const StateVec&) { return BasisMat::Zero(1, 1); };
  env.stage_cost = [](const StateVec& x, const ControlVec&) { return x(0) >= 2.0 ? 0.0 : 1.0; };
  env.in_goal = [](const StateVec& x, const StateVec& slack) { return x(0) >= 2.0 - slack(0); };
  env.validate();
  return env;
}

EnvironmentSpec symmetric_toy() {
  EnvironmentSpec env;
  env.name = "symmetric_toy";
  env.n = 2;
  env.m = 1;
  env.p = 1;
  env.goal_state = vec2(0.0, 0.0);
  env.state_bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
  env.action_set = {scalar_vec(-1.0), scalar_vec(0.0), scalar_vec(1.0)};
  env.control_bounds = {{-1.0, 1.0}};
  env.null_action = 1;
  env.param_domain = ParamDomain(scalar_vec(0.0), scalar_vec(1.0));
  // Double integrator: ṗ = v, v̇ = u.
  env.known_dynamics = [](const StateVec& x, const ControlVec& u) { return vec2(x(1), u(0)); };
  env.basis = [](const StateVec&) { return BasisMat::Zero(1, 2); };
  env.stage_cost = [](const StateVec& x, const ControlVec&) { return x(0) * x(0) + 0.5 * x(1) * x(1); };
  env.in_goal = [](const StateVec& x, const StateVec& slack) {
    return std::abs(x(0)) <= slack(0) && std::abs(x(1)) <= slack(1);
  };
  env.validate();
  return env;
}

PolicyFamily synthetic_family(const EnvironmentSpec& env, const Grid& grid, const std::vector<double>& thetas,
                              const std::function<double(const StateVec&, double)>& fn,
                              const std::function<int(const StateVec&, double)>& action) {
  std::vector<FamilySample> samples;
  for (double th : thetas) {
    FamilySample s;
    s.theta = scalar_vec(th);
    s.value.grid = grid;
    s.policy.grid = grid;
    s.value.values.resize(grid.size());
    s.value.absorbing.assign(grid.size(), 0);
    s.policy.actions.assign(grid.size(), 0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const StateVec x = grid.node_state(i);
      s.value.values[i] = fn(x, th);
      if (action) s.policy.actions[i] = action(x, th);
    }
    s.stats.converged = true;
    samples.push_back(std::move(s));
  }
  return PolicyFamily(env, SolverConfig{}, SmoothingConfig{}, std::move(samples));
}

}  // namespace ceadapt::testing

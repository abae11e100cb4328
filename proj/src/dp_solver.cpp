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

#include "ceadapt/dp_solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "ceadapt/parallel.hpp"

namespace ceadapt {

void SolverConfig::validate() const {
  require(dt > 0.0, "SolverConfig: dt must be > 0");
  require(sweep_tolerance > 0.0, "SolverConfig: sweep_tolerance must be > 0");
  require(max_sweeps >= 1, "SolverConfig: max_sweeps must be >= 1");
  require(goal_slack_cells >= 0.0, "SolverConfig: goal_slack_cells must be >= 0");
  require(substeps >= 1, "SolverConfig: substeps must be >= 1");
  require(threads >= 0, "SolverConfig: threads must be >= 0");
}

StateVec goal_slack(const Grid& grid, const SolverConfig& cfg) {
  StateVec slack(grid.dims());
  for (int a = 0; a < grid.dims(); ++a) slack(a) = cfg.goal_slack_cells * grid.axis(a).spacing();
  return slack;
}

std::vector<char> absorbing_mask(const EnvironmentSpec& env, const Grid& grid, const SolverConfig& cfg) {
  const StateVec slack = goal_slack(grid, cfg);
  std::vector<char> mask(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) mask[i] = env.in_goal(grid.node_state(i), slack) ? 1 : 0;
  return mask;
}

double backup_cost(const EnvironmentSpec& env, const SolverConfig& cfg, const StateVec& x,
                   const ControlVec& u) {
  return cfg.use_penalty ? augmented_stage_cost(env, x, u) : stage_cost(env, x, u);
}

StateVec transition(const EnvironmentSpec& env, const ParamVec& theta, const Grid& grid, const StateVec& x,
                    const ControlVec& u, const SolverConfig& cfg) {
  auto F = [&](const StateVec& y) { return eval_dynamics(env, y, u, theta); };
  StateVec xn = x;
  if (cfg.integrator == SolverConfig::Integrator::kEuler) {
    const double h = cfg.dt / cfg.substeps;
    for (int i = 0; i < cfg.substeps; ++i) xn += F(xn) * h;
  } else {
    const double h = cfg.dt / cfg.substeps;
    for (int i = 0; i < cfg.substeps; ++i) {
      const StateVec k1 = F(xn);
      const StateVec k2 = F(xn + 0.5 * h * k1);
      const StateVec k3 = F(xn + 0.5 * h * k2);
      const StateVec k4 = F(xn + h * k3);
      xn += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  if (xn.hasNaN()) throw SolverFailure(env.name + ": next state is NaN during backup");
  return grid.clamp(xn);
}

BackupResult bellman_backup(const EnvironmentSpec& env, const ParamVec& theta, const ValueTable& table,
                            std::size_t node, const SolverConfig& cfg) {
  require(node < table.grid.size(), "bellman_backup: node out of range");
  require(table.absorbing.size() == table.grid.size(), "bellman_backup: table has no absorbing mask");
  if (table.absorbing[node]) return {0.0, env.null_action};
  const StateVec x = table.grid.node_state(node);
  BackupResult best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t a = 0; a < env.action_set.size(); ++a) {
    const ControlVec& u = env.action_set[a];
    const Stencil s = make_stencil(table.grid, transition(env, theta, table.grid, x, u, cfg));
    double q = backup_cost(env, cfg, x, u) * cfg.dt;
    double cont = 0.0;
    for (std::size_t c = 0; c < s.nodes.size(); ++c) cont += s.weights[c] * table.values[s.nodes[c]];
    q += cont;
    if (std::isnan(q)) throw SolverFailure(env.name + ": NaN during Bellman backup");
    if (q < best.value) best = {q, static_cast<int>(a)};
  }
  return best;
}

namespace {

// Transition model for one θ: per (node, action) the stage cost·dt and the
// interpolation stencil of the next state. Independent of V, so built once.
struct Transitions {
  std::size_t corners = 0;
  std::size_t actions = 0;
  std::vector<double> cost_dt;       // [node * actions + a]
  std::vector<std::size_t> nodes;    // [(node * actions + a) * corners + c]
  std::vector<double> weights;
};

Transitions build_transitions(const EnvironmentSpec& env, const ParamVec& theta, const Grid& grid,
                              const std::vector<char>& absorbing, const SolverConfig& cfg) {
  Transitions t;
  t.corners = std::size_t{1} << grid.dims();
  t.actions = env.action_set.size();
  const std::size_t rows = grid.size() * t.actions;
  t.cost_dt.assign(rows, 0.0);
  t.nodes.assign(rows * t.corners, 0);
  t.weights.assign(rows * t.corners, 0.0);
  parallel_for(grid.size(), cfg.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (absorbing[i]) continue;
      const StateVec x = grid.node_state(i);
      for (std::size_t a = 0; a < t.actions; ++a) {
        const ControlVec& u = env.action_set[a];
        const std::size_t row = i * t.actions + a;
        t.cost_dt[row] = backup_cost(env, cfg, x, u) * cfg.dt;
        const Stencil s = make_stencil(grid, transition(env, theta, grid, x, u, cfg));
        for (std::size_t c = 0; c < t.corners; ++c) {
          t.nodes[row * t.corners + c] = s.nodes[c];
          t.weights[row * t.corners + c] = s.weights[c];
        }
      }
    }
  });
  return t;
}

}  // namespace

SolveResult value_iteration(const EnvironmentSpec& env, const ParamVec& theta, const Grid& grid,
                            const SolverConfig& cfg) {
  cfg.validate();
  require(theta.size() == env.p, "value_iteration: parameter has wrong length");
  require(grid.dims() == env.n, "value_iteration: grid dimension does not match environment");
  const auto start = std::chrono::steady_clock::now();

  SolveResult out;
  out.value.grid = grid;
  out.policy.grid = grid;
  out.value.absorbing = absorbing_mask(env, grid, cfg);
  const std::vector<char>& absorbing = out.value.absorbing;
  const Transitions tr = build_transitions(env, theta, grid, absorbing, cfg);

  std::vector<double> current(grid.size(), 0.0);
  std::vector<double> next(grid.size(), 0.0);
  std::vector<int> actions(grid.size(), env.null_action);
  const int workers = resolve_threads(cfg.threads);
  std::vector<double> chunk_delta(static_cast<std::size_t>(workers), 0.0);

  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    std::fill(chunk_delta.begin(), chunk_delta.end(), 0.0);
    const std::size_t chunk = (grid.size() + workers - 1) / workers;
    parallel_for(grid.size(), workers, [&](std::size_t begin, std::size_t end) {
      double delta = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        if (absorbing[i]) {
          next[i] = 0.0;
          actions[i] = env.null_action;
          continue;
        }
        double best = std::numeric_limits<double>::infinity();
        int best_a = 0;
        for (std::size_t a = 0; a < tr.actions; ++a) {
          const std::size_t row = i * tr.actions + a;
          double cont = 0.0;
          for (std::size_t c = 0; c < tr.corners; ++c) {
            cont += tr.weights[row * tr.corners + c] * current[tr.nodes[row * tr.corners + c]];
          }
          const double q = tr.cost_dt[row] + cont;
          if (q < best) {
            best = q;
            best_a = static_cast<int>(a);
          }
        }
        next[i] = best;
        actions[i] = best_a;
        delta = std::max(delta, std::abs(best - current[i]));
      }
      chunk_delta[begin / chunk] = delta;
    });
    const double delta = *std::max_element(chunk_delta.begin(), chunk_delta.end());
    if (std::isnan(delta)) throw SolverFailure(env.name + ": value iteration produced NaN");
    current.swap(next);
    out.stats.sweep_deltas.push_back(delta);
    out.stats.sweeps = sweep + 1;
    out.stats.residual = delta;
    if (delta < cfg.sweep_tolerance) {
      out.stats.converged = true;
      break;
    }
  }

  out.value.values = std::move(current);
  out.policy.actions = std::move(actions);
  out.stats.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<ParamVec> uniform_theta_samples(const EnvironmentSpec& env, int count) {
  require(count >= 1, "uniform_theta_samples: count must be >= 1");
  require(env.p == 1, "uniform_theta_samples: only scalar parameters are supported");
  const double lo = env.param_domain.lower(0);
  const double hi = env.param_domain.upper(0);
  std::vector<ParamVec> out;
  if (count == 1) {
    out.push_back(scalar_vec(0.5 * (lo + hi)));
    return out;
  }
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / (count - 1);
    out.push_back(scalar_vec(i == count - 1 ? hi : lo + t * (hi - lo)));
  }
  return out;
}

}  // namespace ceadapt

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

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ceadapt/adapt.hpp"

namespace ceadapt {

/// static: fixed θ̂₀ policy, no learning. optimal: policy of θ_true, no learning.
enum class PolicyMode { kStatic, kDirect, kComposite, kOptimal };

std::string to_string(PolicyMode mode);
PolicyMode policy_mode_from_string(const std::string& s);

struct SimConfig {
  double dt = 0.001;
  double horizon = 60.0;
  StateVec x0 = vec2(-0.5, 0.0);
  ParamVec theta_true;
  ParamVec theta_hat0;
  PolicyMode mode = PolicyMode::kComposite;
  /// Apply the environment's boundary rule (walls, clips) after every plant step.
  bool enforce_bounds = true;

  void validate(const EnvironmentSpec& env) const;
};

struct LogRow {
  double t = 0.0;
  StateVec x;
  ControlVec u;
  ParamVec theta_hat;
  double rho = 0.0;
  double upsilon = 0.0;
  double stage_cost = 0.0;
  double aug_cost = 0.0;
  /// Cost accumulated strictly before this row: Σ_{j<k} ℓ(x_j)·dt.
  double running_cost = 0.0;
  /// V*_θ̂(x) for the θ̂ the policy used at this row.
  double value = 0.0;
  /// Predictor error (zero vector in modes without a predictor).
  StateVec eps;
  bool low_confidence = false;
  /// The boundary rule modified the plant step leaving this row.
  bool boundary_hit = false;
  /// guard_domain altered the θ̂ step leaving this row.
  bool guard_hit = false;
};

struct TrajectoryLog {
  PolicyMode mode = PolicyMode::kStatic;
  double dt = 0.0;
  std::vector<LogRow> rows;
  bool reached = false;
  bool failed = false;
  std::string failure;
  int rho_clamp_hits = 0;
};

struct EpisodeState {
  StateVec x;
  AdaptState adapt;
};

struct StepOutput {
  EpisodeState next;
  LogRow record;
  /// Derivatives were evaluated (learning modes only).
  bool adapted = false;
};

/// One explicit Euler step of plant and learner. Throws SolverFailure on NaN.
StepOutput step(const PolicyFamily& fam, const SimConfig& sim, const AdaptConfig& acfg, const EpisodeState& s,
                double t);

/// Runs until t ≥ T or the goal is reached. NaN aborts return the partial log flagged failed.
TrajectoryLog run_episode(const PolicyFamily& fam, const SimConfig& sim, const AdaptConfig& acfg);

struct ClosedLoopCost {
  double value = 0.0;
  /// Goal not reached within the horizon; `value` keeps the finite cost accrued up to T.
  bool divergent = false;
};

ClosedLoopCost closed_loop_cost(const TrajectoryLog& log);

struct LyapunovTrace {
  std::vector<double> values;
  /// The constant ψ(θ)/γ was dropped because θ lies on the potential's boundary.
  bool shifted = false;
};

/// V_c = υ(ρ)(V*_θ̂(x) + η) + (1/γ) d_ψ(θ‖θ̂) per logged row. Rejects static-mode logs.
LyapunovTrace lyapunov_trace(const TrajectoryLog& log, const ParamVec& theta_true, const AdaptConfig& acfg);

/// One row per logged step; column layout is fixed (see docs/formats.md).
void write_csv(std::ostream& os, const TrajectoryLog& log, const std::optional<LyapunovTrace>& trace);
std::string csv_header(int n, int m, int p);
/// Reads a log written by write_csv. Mode, step and goal flag are not part of the CSV
/// and are supplied by the caller (normally from the episode summary).
TrajectoryLog read_csv(std::istream& is, PolicyMode mode, double dt, bool reached);

}  // namespace ceadapt

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

#include <string>
#include <vector>

#include "ceadapt/dp_solver.hpp"

namespace ceadapt {

enum class ThetaInterp { kLinear, kCatmullRom };

std::string to_string(ThetaInterp interp);
ThetaInterp theta_interp_from_string(const std::string& s);

struct SmoothingConfig {
  ThetaInterp theta_interp = ThetaInterp::kLinear;
  /// Gain k of the normalized squash tanh(k·a)/tanh(k) applied to interpolated actions.
  double squash_gain = 3.0;
};

/// One solved θ sample.
struct FamilySample {
  ParamVec theta;
  ValueTable value;
  PolicyTable policy;
  SolveStats stats;
};

/// θ-indexed family of value functions and policies, queryable at any θ̂ in the
/// sampled range. Immutable after construction; safe for concurrent queries.
class PolicyFamily {
 public:
  PolicyFamily(EnvironmentSpec env, SolverConfig solver, SmoothingConfig smoothing,
               std::vector<FamilySample> samples);

  const EnvironmentSpec& env() const { return env_; }
  const Grid& grid() const { return samples_.front().value.grid; }
  const SolverConfig& solver_config() const { return solver_; }
  const SmoothingConfig& smoothing() const { return smoothing_; }
  std::size_t size() const { return samples_.size(); }
  const FamilySample& sample(std::size_t i) const { return samples_[i]; }
  const std::vector<FamilySample>& samples() const { return samples_; }
  double theta_min() const { return samples_.front().theta(0); }
  double theta_max() const { return samples_.back().theta(0); }

  /// Interpolated action component `c` of sample `j` at x, before squashing.
  double raw_action(std::size_t j, int c, const StateVec& x) const;

  /// Blend weights over samples at θ̂ (value weights and θ-derivative weights).
  struct ThetaWeights {
    std::vector<std::size_t> index;
    std::vector<double> w;
    std::vector<double> dw;
  };
  ThetaWeights theta_weights(const ParamVec& theta_hat) const;

 private:
  EnvironmentSpec env_;
  SolverConfig solver_;
  SmoothingConfig smoothing_;
  std::vector<FamilySample> samples_;
  // action_values_[j][c]: control component c of sample j's greedy action per node.
  std::vector<std::vector<std::vector<double>>> action_values_;
};

/// Solves every θ sample and assembles the family. Throws SolverFailure naming every
/// θ that failed to converge.
PolicyFamily solve_family(const EnvironmentSpec& env, const std::vector<ParamVec>& theta_samples,
                          const Grid& grid, const SolverConfig& cfg, const SmoothingConfig& smoothing = {});

/// V*_θ̂(x): multilinear in x, piecewise linear (or Catmull-Rom) in θ̂.
double value_at(const PolicyFamily& fam, const ParamVec& theta_hat, const StateVec& x);
/// ∇ₓV*_θ̂(x) of the interpolant.
StateVec grad_x_value(const PolicyFamily& fam, const ParamVec& theta_hat, const StateVec& x);
/// ∇_θ̂V*_θ̂(x): slope of the θ interpolation; mean of left/right slopes at a sample.
ParamVec grad_theta_value(const PolicyFamily& fam, const ParamVec& theta_hat, const StateVec& x);
/// Continuous certainty-equivalence action π*_θ̂(x) within the control bounds.
ControlVec policy_at(const PolicyFamily& fam, const ParamVec& theta_hat, const StateVec& x);

/// Normalized squash: maps [−1,1] onto itself with squash(±1) = ±1 and squash(0) = 0.
double squash(double a, double gain);

}  // namespace ceadapt

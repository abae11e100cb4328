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

#include <json.hpp>

#include "ceadapt/config.hpp"

namespace ceadapt {

/// Episode summary (schema ceadapt.episode/1). `max_lyapunov_violation` is null for
/// modes without a Lyapunov function.
nlohmann::json episode_summary(const TrajectoryLog& log, const SimConfig& sim, const AdaptConfig& acfg,
                               const std::string& case_label);

struct Table1Cell {
  std::string case_label;
  PolicyMode mode = PolicyMode::kStatic;
  double cost = 0.0;
  bool reached = false;
  bool failed = false;
  std::string failure;
  ParamVec theta_hat_final;
};

struct Table1Result {
  std::vector<std::string> case_labels;
  std::vector<PolicyMode> modes;
  /// Row-major: cells[case * modes.size() + mode].
  std::vector<Table1Cell> cells;
  /// One line per failed ordering condition; empty when all hold.
  std::vector<std::string> ordering_failures;

  const Table1Cell& at(const std::string& label, PolicyMode mode) const;
  bool orderings_hold() const { return ordering_failures.empty(); }
};

/// Runs every (case, mode) episode of the configuration.
Table1Result run_table1(const PolicyFamily& fam, const ExperimentConfig& cfg);

/// Ordering conditions, with unreached goals counted as infinite cost:
///   optimal ≤ composite ≤ direct ≤ static, learning modes and optimal reach the goal,
///   composite cost ≤ 2 × optimal cost.
std::vector<std::string> check_orderings(const Table1Result& r);

std::string table1_csv(const Table1Result& r);
std::string table1_text(const Table1Result& r);

/// Trajectory over the policy heatmap of θ in the (p, v) plane.
std::string phase_portrait_svg(const PolicyFamily& fam, const ParamVec& theta, const TrajectoryLog& log);
/// Position against time with the goal line.
std::string position_svg(const TrajectoryLog& log, double goal_position);

}  // namespace ceadapt

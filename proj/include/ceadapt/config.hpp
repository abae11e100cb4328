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

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ceadapt/sim.hpp"

namespace ceadapt {

/// Malformed or invalid configuration. The message names the offending field
/// (dotted path) or, for syntax errors, the line and column.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One plant configuration of the experiment matrix.
struct EnvironmentCase {
  std::string label;
  ParamVec theta_true;
  /// Initial estimate used by the learning and static modes.
  ParamVec theta_hat0;
};

struct ExperimentConfig {
  std::string environment = "mountain_car";
  MountainCarOptions mountain_car;
  int nodes_per_axis = 128;
  SolverConfig solver;
  /// Uniform samples over Θ, unless `theta_values` is non-empty.
  int theta_count = 8;
  std::vector<double> theta_values;
  SmoothingConfig smoothing;
  AdaptConfig adapt;
  /// Potential by name; its box is the environment's parameter box.
  BregmanPotential::Kind potential = BregmanPotential::Kind::kQuadratic;
  double sim_dt = 0.001;
  double horizon = 60.0;
  StateVec x0 = vec2(-0.5, 0.0);
  bool enforce_bounds = true;
  std::vector<PolicyMode> modes{PolicyMode::kOptimal, PolicyMode::kComposite, PolicyMode::kDirect,
                                PolicyMode::kStatic};
  std::vector<EnvironmentCase> cases;
  /// Episode run by `simulate`.
  PolicyMode simulate_mode = PolicyMode::kComposite;
  std::string simulate_case = "steep";
  bool plots = true;
  std::string output_dir = "ceadapt_out";
  /// Family location; relative paths resolve against output_dir.
  std::string family_dir = "family";

  /// Checks ranges and cross-field consistency; throws ConfigError.
  void validate() const;
};

/// The reference configuration (flat/steep adversarial swap, all defaults).
ExperimentConfig default_config();

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Strict: every key must be known; missing keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Parses JSON text, reporting syntax errors with line and column.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const SolverConfig& cfg);
nlohmann::json to_json(const SmoothingConfig& cfg);
nlohmann::json to_json(const AdaptConfig& cfg);
SolverConfig solver_config_from_json(const nlohmann::json& j, const std::string& path = "solver");
SmoothingConfig smoothing_from_json(const nlohmann::json& j, const std::string& path = "smoothing");

EnvironmentSpec make_environment(const ExperimentConfig& cfg);
Grid make_grid(const ExperimentConfig& cfg, const EnvironmentSpec& env);
std::vector<ParamVec> make_theta_samples(const ExperimentConfig& cfg, const EnvironmentSpec& env);
AdaptConfig make_adapt_config(const ExperimentConfig& cfg, const EnvironmentSpec& env);
SimConfig make_sim_config(const ExperimentConfig& cfg, const EnvironmentCase& c, PolicyMode mode);
const EnvironmentCase& find_case(const ExperimentConfig& cfg, const std::string& label);
std::filesystem::path family_path(const ExperimentConfig& cfg);

}  // namespace ceadapt

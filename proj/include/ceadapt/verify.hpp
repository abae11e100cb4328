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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ceadapt/sim.hpp"

namespace ceadapt {

/// One located violation, kept so failures can be traced back to a node or a step.
struct Violation {
  std::string where;
  double amount = 0.0;
};

struct CheckResult {
  std::string name;
  /// Threshold the per-item violation is compared against (after any slack).
  double tolerance = 0.0;
  /// Largest excess over the tolerance-free quantity being checked.
  double max_violation = 0.0;
  bool passed = false;
  bool skipped = false;
  std::string notice;
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::size_t excluded = 0;
  /// Worst offenders, largest first.
  std::vector<Violation> worst;
  std::vector<std::pair<std::string, double>> metrics;

  double metric(const std::string& key) const;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

nlohmann::json to_json(const CheckResult& check);
nlohmann::json to_json(const VerificationReport& report);
/// Fixed-width text table, one line per check.
std::string render_table(const VerificationReport& report);

/// max over non-absorbing interior nodes of |V(x) − min_u[ℓ_a dt + V(x⁺)]|, using the
/// callback-driven backup rather than the solver's cached transitions.
CheckResult hjb_residual(const EnvironmentSpec& env, const ParamVec& theta, const ValueTable& table,
                         const SolverConfig& cfg, double tolerance);
/// Same for family sample `index`, at the family's solver config and sweep tolerance.
CheckResult hjb_residual(const PolicyFamily& fam, std::size_t index);

/// Per-step CLF decrement |V_{k+1} − V_k + ℓ_a,k·dt| ≤ 10·dt² + slack_rate·dt on at
/// least `min_fraction` of the steps. `slack_rate` is the interpolation slack in value
/// units per second. Rejects logs that are not optimal-mode at θ, and logs whose
/// off-goal stage cost is not strictly positive.
struct ClfOptions {
  double slack_rate = 1.0;
  double min_fraction = 0.99;
};
CheckResult clf_check(const PolicyFamily& fam, const ParamVec& theta, const std::vector<TrajectoryLog>& logs,
                      const ClfOptions& opts = {});

/// Per-step V_c bound of the learning laws:
///   direct:    ΔV_c ≤ −υℓ_a·dt + tol
///   composite: ΔV_c ≤ −υℓ_a·dt − (α/γ)‖ε‖²·dt + tol
/// tol defaults to 10·dt². Rejects static and optimal logs.
CheckResult lyapunov_monotonicity(const TrajectoryLog& log, const ParamVec& theta_true, const AdaptConfig& acfg,
                                  double tolerance = -1.0);

/// Splits each V_c step into the value-table part υ(V_θ̂(x_{k+1}) − V_θ̂(x_k) + ℓ_a dt),
/// evaluated at frozen θ̂_k, and the remainder. The remainder is what the learning law
/// controls and is checked against the same bound as lyapunov_monotonicity.
struct LyapunovSplit {
  CheckResult table_part;
  CheckResult learning_part;
};
LyapunovSplit lyapunov_split(const PolicyFamily& fam, const TrajectoryLog& log, const ParamVec& theta_true,
                             const AdaptConfig& acfg, double tolerance = -1.0);

/// m(x) = ℓ_a(x, π*_θ̄(x)) − ‖Δ(x)∇ₓV*_θ̄(x)‖₁ · max_{θ∈Θ}‖θ̄ − θ‖_∞ on every node of
/// sample `index`.
struct ShapingMargin {
  std::vector<double> margin;
  double fraction_nonnegative = 0.0;
  double min_margin = 0.0;
};
ShapingMargin reward_shaping_margin(const PolicyFamily& fam, std::size_t index, const ParamDomain& theta_set);

/// Analytic interpolant gradients (x and θ̂) against central differences.
struct GradientProbe {
  StateVec x;
  ParamVec theta_hat;
};
struct GradientOptions {
  std::size_t samples = 1000;
  std::uint64_t seed = 7;
  /// Finite-difference step as a fraction of each axis span (θ span for θ̂). Probes
  /// closer than one step to a cell or θ-sample boundary are excluded.
  double step_fraction = 1e-4;
  /// Relative error bound; the denominator is max(‖fd‖∞, 1).
  double tolerance = 1e-6;
};
CheckResult gradient_consistency(const PolicyFamily& fam, const std::vector<GradientProbe>& probes,
                                 const GradientOptions& opts = {});
/// Uniform random probes over the grid box and the sampled θ range.
CheckResult gradient_consistency(const PolicyFamily& fam, const GradientOptions& opts = {});

}  // namespace ceadapt

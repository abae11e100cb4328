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

#include "ceadapt/value_family.hpp"

namespace ceadapt {

/// Strictly convex potential ψ generating the Bregman divergence of the learner.
///   kQuadratic:  ½‖θ‖²
///   kLogBarrier: Σᵢ −ln(θᵢ − aᵢ) − ln(bᵢ − θᵢ) on the open box (a, b)
///   kBoxEntropy: Σᵢ (θᵢ − aᵢ)ln(θᵢ − aᵢ) + (bᵢ − θᵢ)ln(bᵢ − θᵢ); finite on the closed box,
///                Hessian blows up at the faces so mirror steps stay inside.
class BregmanPotential {
 public:
  enum class Kind { kQuadratic, kLogBarrier, kBoxEntropy };

  static BregmanPotential quadratic() { return BregmanPotential(Kind::kQuadratic, {}); }
  static BregmanPotential log_barrier(ParamDomain box) { return BregmanPotential(Kind::kLogBarrier, std::move(box)); }
  static BregmanPotential box_entropy(ParamDomain box) { return BregmanPotential(Kind::kBoxEntropy, std::move(box)); }
  static BregmanPotential make(Kind kind, const ParamDomain& box);

  Kind kind() const { return kind_; }
  const ParamDomain& box() const { return box_; }
  bool in_domain(const ParamVec& theta) const;
  /// Where gradient and Hessian exist (the open box for both box potentials).
  bool in_interior(const ParamVec& theta) const;

  double value(const ParamVec& theta) const;
  ParamVec gradient(const ParamVec& theta) const;
  Eigen::MatrixXd hessian(const ParamVec& theta) const;
  Eigen::MatrixXd hessian_inverse(const ParamVec& theta) const;

 private:
  BregmanPotential(Kind kind, ParamDomain box) : kind_(kind), box_(std::move(box)) {
    require(kind_ == Kind::kQuadratic || (box_.size() > 0 && (box_.width().array() > 0.0).all()),
            "BregmanPotential: box potentials need a box with positive width");
  }
  void check(const ParamVec& theta) const;
  void check_interior(const ParamVec& theta) const;

  Kind kind_;
  ParamDomain box_;
};

std::string to_string(BregmanPotential::Kind kind);
BregmanPotential::Kind potential_kind_from_string(const std::string& s);

/// d_ψ(y‖x) = ψ(y) − ψ(x) − (y−x)ᵀ∇ψ(x). y must lie in ψ's domain, x in its interior.
double bregman_divergence(const BregmanPotential& psi, const ParamVec& y, const ParamVec& x);

/// d_ψ(y‖x) − ψ(y) = −ψ(x) − (y−x)ᵀ∇ψ(x). Only x must lie in ψ's domain, so this
/// stays finite when y sits on the closed boundary of a barrier's box.
double bregman_divergence_shifted(const BregmanPotential& psi, const ParamVec& y, const ParamVec& x);

enum class PredictorMode { kUnfiltered, kFiltered };

struct AdaptConfig {
  double gamma = 0.02;
  double alpha = 200000.0;
  double eta = 100.0;
  /// υ(ρ) = c1·e^ρ + c2
  double c1 = 0.9;
  double c2 = 0.1;
  double rho0 = 0.0;
  /// ρ is clamped into this window before exponentiation.
  double rho_min = -20.0;
  double rho_max = 6.0;
  PredictorMode predictor = PredictorMode::kUnfiltered;
  /// Pole of the first-order velocity filter [1/s].
  double beta = 50.0;
  /// Filtered predictor output is flagged low-confidence for this many filter time constants.
  double warmup_time_constants = 3.0;
  /// Interior margin kept by guard_domain for the box potentials, as a fraction of box width.
  double guard_margin = 1e-6;
  BregmanPotential potential = BregmanPotential::quadratic();

  void validate() const;
};

/// Online learner state. The filter registers are only used in filtered predictor mode.
struct AdaptState {
  ParamVec theta_hat;
  double rho = 0.0;
  StateVec x_filt;
  StateVec f_filt;
  BasisMat basis_filt;
  double elapsed = 0.0;
};

AdaptState init_adapt_state(const EnvironmentSpec& env, const AdaptConfig& cfg, const ParamVec& theta_hat0,
                            const StateVec& x0);

double upsilon(const AdaptConfig& cfg, double rho);
double upsilon_grad(const AdaptConfig& cfg, double rho);
bool rho_clamped(const AdaptConfig& cfg, double rho);

struct AdaptRates {
  ParamVec theta_dot;
  double rho_dot = 0.0;
};

/// ρ̇ = −(υ/υ′) Σᵢ [∇_θ̂ᵢV*_θ̂(x) / (V*_θ̂(x) + η)] θ̂̇ᵢ for a given θ̂̇.
double rho_rate(const PolicyFamily& fam, const AdaptConfig& cfg, const AdaptState& st, const StateVec& x,
                const ParamVec& theta_dot);

/// Direct law:
///   θ̂̇ = −γ υ(ρ) [∇²ψ(θ̂)]⁻¹ Δ(x) ∇ₓV*_θ̂(x)
///   ρ̇ = −(υ/υ′) Σᵢ [∇_θ̂ᵢV*_θ̂(x) / (V*_θ̂(x) + η)] θ̂̇ᵢ
AdaptRates direct_update(const PolicyFamily& fam, const AdaptConfig& cfg, const AdaptState& st,
                         const StateVec& x);

struct PredictorOutput {
  StateVec eps;
  /// Regressor paired with ε in the composite term: Δ(x), or the filtered Δ̂ in filtered mode.
  BasisMat regressor;
  bool low_confidence = false;
};

/// ε = ẋ − F_θ̂(x,u) (unfiltered, needs ẋ), or ε = β(x − x̂) − (f̂ − Δ̂ᵀθ̂) from the
/// filter registers (filtered). Either way ε = regressorᵀ(θ̂ − θ) when the plant
/// follows F_θ exactly.
PredictorOutput state_predictor_error(const EnvironmentSpec& env, const AdaptConfig& cfg, const AdaptState& st,
                                      const StateVec& x, const StateVec* xdot_true, const ControlVec& u);

/// Composite law: direct term − α [∇²ψ(θ̂)]⁻¹ regressor ε, with ρ̇ driven by the total θ̂̇.
AdaptRates composite_update(const PolicyFamily& fam, const AdaptConfig& cfg, const AdaptState& st,
                            const StateVec& x, const PredictorOutput& pred);
/// Unfiltered convenience form using Δ(x) as the regressor.
AdaptRates composite_update(const PolicyFamily& fam, const AdaptConfig& cfg, const AdaptState& st,
                            const StateVec& x, const StateVec& eps);

/// Euler step of the velocity filters x̂, f̂, Δ̂ (all with pole β).
void advance_filters(const EnvironmentSpec& env, const AdaptConfig& cfg, AdaptState& st, const StateVec& x,
                     const ControlVec& u, double dt);

/// Keeps θ̂ admissible after an integration step: interior clamp with margin for the
/// box potentials, box projection for the quadratic potential.
AdaptState guard_domain(const AdaptConfig& cfg, const ParamDomain& domain, AdaptState st);

}  // namespace ceadapt

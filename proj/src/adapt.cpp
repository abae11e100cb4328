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

#include "ceadapt/adapt.hpp"

#include <algorithm>
#include <cmath>

namespace ceadapt {

std::string to_string(BregmanPotential::Kind kind) {
  switch (kind) {
    case BregmanPotential::Kind::kQuadratic: return "quadratic";
    case BregmanPotential::Kind::kLogBarrier: return "log_barrier";
    case BregmanPotential::Kind::kBoxEntropy: return "box_entropy";
  }
  return "unknown";
}

BregmanPotential::Kind potential_kind_from_string(const std::string& s) {
  if (s == "quadratic") return BregmanPotential::Kind::kQuadratic;
  if (s == "log_barrier") return BregmanPotential::Kind::kLogBarrier;
  if (s == "box_entropy") return BregmanPotential::Kind::kBoxEntropy;
  throw ContractViolation("unknown potential '" + s + "' (expected quadratic|log_barrier|box_entropy)");
}

BregmanPotential BregmanPotential::make(Kind kind, const ParamDomain& box) {
  switch (kind) {
    case Kind::kQuadratic: return quadratic();
    case Kind::kLogBarrier: return log_barrier(box);
    case Kind::kBoxEntropy: return box_entropy(box);
  }
  throw ContractViolation("BregmanPotential::make: unknown kind");
}

bool BregmanPotential::in_domain(const ParamVec& theta) const {
  switch (kind_) {
    case Kind::kQuadratic: return theta.allFinite();
    case Kind::kLogBarrier: return box_.contains_strictly(theta);
    case Kind::kBoxEntropy: return box_.contains(theta);
  }
  return false;
}

bool BregmanPotential::in_interior(const ParamVec& theta) const {
  return kind_ == Kind::kQuadratic ? theta.allFinite() : box_.contains_strictly(theta);
}

void BregmanPotential::check(const ParamVec& theta) const {
  if (!in_domain(theta)) throw DomainError("BregmanPotential: argument outside the potential's domain");
}

void BregmanPotential::check_interior(const ParamVec& theta) const {
  if (!in_interior(theta)) throw DomainError("BregmanPotential: argument outside the potential's interior");
}

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

double BregmanPotential::value(const ParamVec& theta) const {
  check(theta);
  if (kind_ == Kind::kQuadratic) return 0.5 * theta.squaredNorm();
  double v = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double lo = theta(i) - box_.lower(i);
    const double hi = box_.upper(i) - theta(i);
    v += kind_ == Kind::kLogBarrier ? -std::log(lo) - std::log(hi) : xlogx(lo) + xlogx(hi);
  }
  return v;
}

ParamVec BregmanPotential::gradient(const ParamVec& theta) const {
  check_interior(theta);
  if (kind_ == Kind::kQuadratic) return theta;
  ParamVec g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double lo = theta(i) - box_.lower(i);
    const double hi = box_.upper(i) - theta(i);
    g(i) = kind_ == Kind::kLogBarrier ? -1.0 / lo + 1.0 / hi : std::log(lo) - std::log(hi);
  }
  return g;
}

Eigen::MatrixXd BregmanPotential::hessian(const ParamVec& theta) const {
  check_interior(theta);
  if (kind_ == Kind::kQuadratic) return Eigen::MatrixXd::Identity(theta.size(), theta.size());
  Eigen::VectorXd d(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double lo = theta(i) - box_.lower(i);
    const double hi = box_.upper(i) - theta(i);
    d(i) = kind_ == Kind::kLogBarrier ? 1.0 / (lo * lo) + 1.0 / (hi * hi) : 1.0 / lo + 1.0 / hi;
  }
  return d.asDiagonal();
}

Eigen::MatrixXd BregmanPotential::hessian_inverse(const ParamVec& theta) const {
  check_interior(theta);
  if (kind_ == Kind::kQuadratic) return Eigen::MatrixXd::Identity(theta.size(), theta.size());
  // Separable: invert the diagonal in closed form.
  Eigen::VectorXd d(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double lo = theta(i) - box_.lower(i);
    const double hi = box_.upper(i) - theta(i);
    d(i) = kind_ == Kind::kLogBarrier ? lo * lo * hi * hi / (lo * lo + hi * hi) : lo * hi / (lo + hi);
  }
  return d.asDiagonal();
}

double bregman_divergence(const BregmanPotential& psi, const ParamVec& y, const ParamVec& x) {
  require(y.size() == x.size(), "bregman_divergence: dimension mismatch");
  const double d = psi.value(y) - psi.value(x) - (y - x).dot(psi.gradient(x));
  return std::max(d, 0.0);
}

double bregman_divergence_shifted(const BregmanPotential& psi, const ParamVec& y, const ParamVec& x) {
  require(y.size() == x.size(), "bregman_divergence_shifted: dimension mismatch");
  return -psi.value(x) - (y - x).dot(psi.gradient(x));
}

void AdaptConfig::validate() const {
  require(gamma > 0.0, "AdaptConfig: gamma must be > 0");
  require(alpha >= 0.0, "AdaptConfig: alpha must be >= 0");
  require(eta > 0.0, "AdaptConfig: eta must be > 0");
  require(c1 > 0.0 && c2 > 0.0, "AdaptConfig: c1 and c2 must be > 0");
  require(rho_min < rho_max, "AdaptConfig: rho window is empty");
  require(beta > 0.0, "AdaptConfig: beta must be > 0");
  require(guard_margin > 0.0 && guard_margin < 0.5, "AdaptConfig: guard_margin must be in (0, 0.5)");
}

AdaptState init_adapt_state(const EnvironmentSpec& env, const AdaptConfig& cfg, const ParamVec& theta_hat0,
                            const StateVec& x0) {
  require(theta_hat0.size() == env.p, "init_adapt_state: θ̂₀ has wrong length");
  require(x0.size() == env.n, "init_adapt_state: x₀ has wrong length");
  AdaptState st;
  st.theta_hat = theta_hat0;
  st.rho = cfg.rho0;
  st.x_filt = x0;
  st.f_filt = StateVec::Zero(env.n);
  st.basis_filt = BasisMat::Zero(env.p, env.n);
  st.elapsed = 0.0;
  return st;
}

double upsilon(const AdaptConfig& cfg, double rho) {
  return cfg.c1 * std::exp(std::clamp(rho, cfg.rho_min, cfg.rho_max)) + cfg.c2;
}

double upsilon_grad(const AdaptConfig& cfg, double rho) {
  return cfg.c1 * std::exp(std::clamp(rho, cfg.rho_min, cfg.rho_max));
}

bool rho_clamped(const AdaptConfig& cfg, double rho) { return rho <= cfg.rho_min || rho >= cfg.rho_max; }

double rho_rate(const PolicyFamily& fam, const AdaptConfig& cfg, const AdaptState& st, const StateVec& x,
                const ParamVec& theta_dot) {
  const double v = value_at(fam, st.theta_hat, x);
  const ParamVec g_theta = grad_theta_value(fam, st.theta_hat, x);
  const double ratio = upsilon(cfg, st.rho) / upsilon_grad(cfg, st.rho);
  return -ratio * g_theta.dot(theta_dot) / (v + cfg.eta);
}

namespace {

ParamVec direct_term(const PolicyFamily& fam, const AdaptConfig& cfg, const AdaptState& st, const StateVec& x) {
  const BasisMat delta = eval_basis(fam.env(), x);
  const StateVec gx = grad_x_value(fam, st.theta_hat, x);
  return -cfg.gamma * upsilon(cfg, st.rho) * (cfg.potential.hessian_inverse(st.theta_hat) * (delta * gx));
}

}  // namespace

AdaptRates direct_update(const PolicyFamily& fam, const AdaptConfig& cfg, const AdaptState& st,
                         const StateVec& x) {
  AdaptRates r;
  r.theta_dot = direct_term(fam, cfg, st, x);
  r.rho_dot = rho_rate(fam, cfg, st, x, r.theta_dot);
  return r;
}

PredictorOutput state_predictor_error(const EnvironmentSpec& env, const AdaptConfig& cfg, const AdaptState& st,
                                      const StateVec& x, const StateVec* xdot_true, const ControlVec& u) {
  PredictorOutput out;
  if (cfg.predictor == PredictorMode::kUnfiltered) {
    require(xdot_true != nullptr, "state_predictor_error: unfiltered mode needs the true state velocity");
    out.eps = *xdot_true - eval_dynamics(env, x, u, st.theta_hat);
    out.regressor = eval_basis(env, x);
    return out;
  }
  require(st.x_filt.size() == env.n && st.f_filt.size() == env.n && st.basis_filt.rows() == env.p &&
              st.basis_filt.cols() == env.n,
          "state_predictor_error: filter registers are not initialized");
  const StateVec xhat_dot = cfg.beta * (x - st.x_filt);
  out.eps = xhat_dot - (st.f_filt - st.basis_filt.transpose() * st.theta_hat);
  out.regressor = st.basis_filt;
  out.low_confidence = st.elapsed < cfg.warmup_time_constants / cfg.beta;
  return out;
}

AdaptRates composite_update(const PolicyFamily& fam, const AdaptConfig& cfg, const AdaptState& st,
                            const StateVec& x, const PredictorOutput& pred) {
  AdaptRates r;
  r.theta_dot = direct_term(fam, cfg, st, x);
  if (cfg.alpha != 0.0) {
    r.theta_dot -= cfg.alpha * (cfg.potential.hessian_inverse(st.theta_hat) * (pred.regressor * pred.eps));
  }
  r.rho_dot = rho_rate(fam, cfg, st, x, r.theta_dot);
  return r;
}

AdaptRates composite_update(const PolicyFamily& fam, const AdaptConfig& cfg, const AdaptState& st,
                            const StateVec& x, const StateVec& eps) {
  PredictorOutput pred;
  pred.eps = eps;
  pred.regressor = eval_basis(fam.env(), x);
  return composite_update(fam, cfg, st, x, pred);
}

void advance_filters(const EnvironmentSpec& env, const AdaptConfig& cfg, AdaptState& st, const StateVec& x,
                     const ControlVec& u, double dt) {
  const double k = cfg.beta * dt;
  const StateVec f = eval_known_dynamics(env, x, u);
  const BasisMat delta = eval_basis(env, x);
  st.x_filt += k * (x - st.x_filt);
  st.f_filt += k * (f - st.f_filt);
  st.basis_filt += k * (delta - st.basis_filt);
  st.elapsed += dt;
}

AdaptState guard_domain(const AdaptConfig& cfg, const ParamDomain& domain, AdaptState st) {
  if (cfg.potential.kind() == BregmanPotential::Kind::kQuadratic) {
    st.theta_hat = domain.project(st.theta_hat);
    return st;
  }
  const ParamDomain& box = cfg.potential.box();
  const ParamVec margin = cfg.guard_margin * box.width();
  st.theta_hat = st.theta_hat.cwiseMax(box.lower + margin).cwiseMin(box.upper - margin);
  return st;
}

}  // namespace ceadapt

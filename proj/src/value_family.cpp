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

#include "ceadapt/value_family.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ceadapt {

std::string to_string(ThetaInterp interp) {
  return interp == ThetaInterp::kLinear ? "linear" : "catmull_rom";
}

ThetaInterp theta_interp_from_string(const std::string& s) {
  if (s == "linear") return ThetaInterp::kLinear;
  if (s == "catmull_rom") return ThetaInterp::kCatmullRom;
  throw ContractViolation("unknown theta interpolation '" + s + "' (expected linear|catmull_rom)");
}

PolicyFamily::PolicyFamily(EnvironmentSpec env, SolverConfig solver, SmoothingConfig smoothing,
                           std::vector<FamilySample> samples)
    : env_(std::move(env)), solver_(solver), smoothing_(smoothing), samples_(std::move(samples)) {
  require(!samples_.empty(), "PolicyFamily: empty family");
  require(smoothing_.squash_gain > 0.0, "PolicyFamily: squash_gain must be > 0");
  require(samples_.size() == 1 || env_.p == 1, "PolicyFamily: θ interpolation needs a scalar parameter");
  const Grid& g = samples_.front().value.grid;
  require(g.dims() == env_.n, "PolicyFamily: grid dimension does not match environment");
  for (std::size_t j = 0; j < samples_.size(); ++j) {
    const FamilySample& s = samples_[j];
    require(s.theta.size() == env_.p, "PolicyFamily: sample θ has wrong length");
    require(s.value.grid == g && s.policy.grid == g, "PolicyFamily: samples must share one grid");
    require(s.value.values.size() == g.size() && s.policy.actions.size() == g.size(),
            "PolicyFamily: table size does not match grid");
    if (j > 0) {
      require(s.theta(0) > samples_[j - 1].theta(0), "PolicyFamily: θ samples must be strictly increasing");
    }
  }
  action_values_.resize(samples_.size());
  for (std::size_t j = 0; j < samples_.size(); ++j) {
    action_values_[j].assign(env_.m, std::vector<double>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const int a = samples_[j].policy.actions[i];
      require(a >= 0 && a < static_cast<int>(env_.action_set.size()), "PolicyFamily: action index out of range");
      for (int c = 0; c < env_.m; ++c) action_values_[j][c][i] = env_.action_set[a](c);
    }
  }
}

double PolicyFamily::raw_action(std::size_t j, int c, const StateVec& x) const {
  return bilinear_interp(grid(), action_values_[j][c], x);
}

PolicyFamily::ThetaWeights PolicyFamily::theta_weights(const ParamVec& theta_hat) const {
  require(theta_hat.size() == env_.p, "theta_weights: parameter has wrong length");
  ThetaWeights out;
  const std::size_t k = samples_.size();
  if (k == 1) {
    out.index = {0};
    out.w = {1.0};
    out.dw = {0.0};
    return out;
  }
  auto th = [this](std::size_t i) { return samples_[i].theta(0); };
  const double span = th(k - 1) - th(0);
  const double q = std::clamp(theta_hat(0), th(0), th(k - 1));

  // Bracketing interval [th(i), th(i+1)] and exact-sample detection.
  std::size_t i = 0;
  while (i + 2 < k && q >= th(i + 1)) ++i;
  double t = (q - th(i)) / (th(i + 1) - th(i));
  std::ptrdiff_t at_sample = -1;
  for (std::size_t j = 0; j < k; ++j) {
    if (std::abs(q - th(j)) <= 1e-12 * span) at_sample = static_cast<std::ptrdiff_t>(j);
  }
  if (at_sample >= 0) {
    const auto j = static_cast<std::size_t>(at_sample);
    i = std::min(j, k - 2);
    t = (j == i) ? 0.0 : 1.0;
  }

  if (smoothing_.theta_interp == ThetaInterp::kLinear) {
    const double g = th(i + 1) - th(i);
    if (at_sample >= 0) {
      const auto j = static_cast<std::size_t>(at_sample);
      out.index = {j};
      out.w = {1.0};
      out.dw = {0.0};
      // Mean of the one-sided slopes at interior samples; one-sided at the ends.
      auto add = [&out](std::size_t idx, double dw) {
        for (std::size_t m = 0; m < out.index.size(); ++m) {
          if (out.index[m] == idx) {
            out.dw[m] += dw;
            return;
          }
        }
        out.index.push_back(idx);
        out.w.push_back(0.0);
        out.dw.push_back(dw);
      };
      const bool has_left = j > 0;
      const bool has_right = j + 1 < k;
      const double share = (has_left && has_right) ? 0.5 : 1.0;
      if (has_left) {
        const double gl = th(j) - th(j - 1);
        add(j - 1, -share / gl);
        add(j, share / gl);
      }
      if (has_right) {
        const double gr = th(j + 1) - th(j);
        add(j, -share / gr);
        add(j + 1, share / gr);
      }
      return out;
    }
    out.index = {i, i + 1};
    out.w = {1.0 - t, t};
    out.dw = {-1.0 / g, 1.0 / g};
    return out;
  }

  // Cubic Hermite with finite-difference tangents (non-uniform Catmull-Rom).
  // Tangent at sample j expressed as weights over neighboring samples.
  auto tangent = [&](std::size_t j) -> std::vector<std::pair<std::size_t, double>> {
    if (j == 0) return {{0, -1.0 / (th(1) - th(0))}, {1, 1.0 / (th(1) - th(0))}};
    if (j == k - 1) return {{k - 2, -1.0 / (th(k - 1) - th(k - 2))}, {k - 1, 1.0 / (th(k - 1) - th(k - 2))}};
    const double d = th(j + 1) - th(j - 1);
    return {{j - 1, -1.0 / d}, {j + 1, 1.0 / d}};
  };
  const double g = th(i + 1) - th(i);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double d00 = (6 * t2 - 6 * t) / g, d10 = (3 * t2 - 4 * t + 1), d01 = (-6 * t2 + 6 * t) / g,
               d11 = (3 * t2 - 2 * t);
  std::vector<double> w(k, 0.0), dw(k, 0.0);
  w[i] += h00;
  w[i + 1] += h01;
  dw[i] += d00;
  dw[i + 1] += d01;
  for (auto [idx, c] : tangent(i)) {
    w[idx] += h10 * g * c;
    dw[idx] += d10 * c;
  }
  for (auto [idx, c] : tangent(i + 1)) {
    w[idx] += h11 * g * c;
    dw[idx] += d11 * c;
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (w[j] != 0.0 || dw[j] != 0.0) {
      out.index.push_back(j);
      out.w.push_back(w[j]);
      out.dw.push_back(dw[j]);
    }
  }
  return out;
}

PolicyFamily solve_family(const EnvironmentSpec& env, const std::vector<ParamVec>& theta_samples,
                          const Grid& grid, const SolverConfig& cfg, const SmoothingConfig& smoothing) {
  require(!theta_samples.empty(), "solve_family: no θ samples");
  for (std::size_t j = 0; j < theta_samples.size(); ++j) {
    require(env.param_domain.contains(theta_samples[j]), "solve_family: θ sample outside the parameter box");
    if (j > 0) {
      require(theta_samples[j](0) > theta_samples[j - 1](0),
              "solve_family: θ samples must be sorted and pairwise distinct");
    }
  }
  std::vector<FamilySample> samples;
  std::ostringstream failed;
  bool any_failed = false;
  for (const ParamVec& theta : theta_samples) {
    SolveResult r = value_iteration(env, theta, grid, cfg);
    if (!r.stats.converged) {
      failed << (any_failed ? ", " : "") << "θ=" << theta.transpose() << " (residual " << r.stats.residual
             << " after " << r.stats.sweeps << " sweeps)";
      any_failed = true;
    }
    samples.push_back({theta, std::move(r.value), std::move(r.policy), std::move(r.stats)});
  }
  if (any_failed) throw SolverFailure("solve_family: value iteration did not converge for " + failed.str());
  return PolicyFamily(env, cfg, smoothing, std::move(samples));
}

double value_at(const PolicyFamily& fam, const ParamVec& theta_hat, const StateVec& x) {
  const auto tw = fam.theta_weights(theta_hat);
  double v = 0.0;
  for (std::size_t m = 0; m < tw.index.size(); ++m) {
    if (tw.w[m] == 0.0) continue;
    v += tw.w[m] * bilinear_interp(fam.grid(), fam.sample(tw.index[m]).value.values, x);
  }
  if (fam.smoothing().theta_interp == ThetaInterp::kCatmullRom) v = std::max(v, 0.0);
  return v;
}

StateVec grad_x_value(const PolicyFamily& fam, const ParamVec& theta_hat, const StateVec& x) {
  const auto tw = fam.theta_weights(theta_hat);
  StateVec g = StateVec::Zero(fam.env().n);
  for (std::size_t m = 0; m < tw.index.size(); ++m) {
    if (tw.w[m] == 0.0) continue;
    g += tw.w[m] * interp_gradient(fam.grid(), fam.sample(tw.index[m]).value.values, x);
  }
  return g;
}

ParamVec grad_theta_value(const PolicyFamily& fam, const ParamVec& theta_hat, const StateVec& x) {
  const auto tw = fam.theta_weights(theta_hat);
  ParamVec g = ParamVec::Zero(fam.env().p);
  for (std::size_t m = 0; m < tw.index.size(); ++m) {
    if (tw.dw[m] == 0.0) continue;
    g(0) += tw.dw[m] * bilinear_interp(fam.grid(), fam.sample(tw.index[m]).value.values, x);
  }
  return g;
}

double squash(double a, double gain) { return std::tanh(gain * a) / std::tanh(gain); }

ControlVec policy_at(const PolicyFamily& fam, const ParamVec& theta_hat, const StateVec& x) {
  const auto tw = fam.theta_weights(theta_hat);
  const EnvironmentSpec& env = fam.env();
  ControlVec u(env.m);
  for (int c = 0; c < env.m; ++c) {
    double a = 0.0;
    for (std::size_t m = 0; m < tw.index.size(); ++m) {
      if (tw.w[m] == 0.0) continue;
      a += tw.w[m] * fam.raw_action(tw.index[m], c, x);
    }
    const AxisBounds& b = env.control_bounds[c];
    const double mid = 0.5 * (b.min + b.max);
    const double half = 0.5 * (b.max - b.min);
    const double z = std::clamp((a - mid) / half, -1.0, 1.0);
    u(c) = std::clamp(mid + half * squash(z, fam.smoothing().squash_gain), b.min, b.max);
  }
  return u;
}

}  // namespace ceadapt

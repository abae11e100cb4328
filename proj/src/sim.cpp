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

#include "ceadapt/sim.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace ceadapt {

std::string to_string(PolicyMode mode) {
  switch (mode) {
    case PolicyMode::kStatic: return "static";
    case PolicyMode::kDirect: return "direct";
    case PolicyMode::kComposite: return "composite";
    case PolicyMode::kOptimal: return "optimal";
  }
  return "unknown";
}

PolicyMode policy_mode_from_string(const std::string& s) {
  if (s == "static") return PolicyMode::kStatic;
  if (s == "direct") return PolicyMode::kDirect;
  if (s == "composite") return PolicyMode::kComposite;
  if (s == "optimal") return PolicyMode::kOptimal;
  throw ContractViolation("unknown policy mode '" + s + "' (expected static|direct|composite|optimal)");
}

void SimConfig::validate(const EnvironmentSpec& env) const {
  require(dt > 0.0, "SimConfig: dt must be > 0");
  require(horizon >= 0.0, "SimConfig: horizon must be >= 0");
  require(x0.size() == env.n, "SimConfig: x0 has wrong length");
  require(theta_true.size() == env.p, "SimConfig: theta_true has wrong length");
  require(theta_hat0.size() == env.p, "SimConfig: theta_hat0 has wrong length");
  require(env.param_domain.contains(theta_true), "SimConfig: theta_true outside the parameter box");
}

namespace {

bool learning(PolicyMode mode) { return mode == PolicyMode::kDirect || mode == PolicyMode::kComposite; }

const ParamVec& policy_theta(const SimConfig& sim, const EpisodeState& s) {
  switch (sim.mode) {
    case PolicyMode::kStatic: return sim.theta_hat0;
    case PolicyMode::kOptimal: return sim.theta_true;
    default: return s.adapt.theta_hat;
  }
}

}  // namespace

StepOutput step(const PolicyFamily& fam, const SimConfig& sim, const AdaptConfig& acfg, const EpisodeState& s,
                double t) {
  const EnvironmentSpec& env = fam.env();
  const ParamVec& theta_pol = policy_theta(sim, s);

  StepOutput out;
  LogRow& rec = out.record;
  rec.t = t;
  rec.x = s.x;
  rec.u = policy_at(fam, theta_pol, s.x);
  rec.theta_hat = theta_pol;
  rec.rho = s.adapt.rho;
  rec.upsilon = upsilon(acfg, s.adapt.rho);
  rec.stage_cost = stage_cost(env, s.x, rec.u);
  rec.aug_cost = augmented_stage_cost(env, s.x, rec.u);
  rec.value = value_at(fam, theta_pol, s.x);
  rec.eps = StateVec::Zero(env.n);

  const StateVec xdot = eval_dynamics(env, s.x, rec.u, sim.theta_true);
  out.next = s;
  out.next.x = s.x + xdot * sim.dt;
  if (sim.enforce_bounds && env.apply_boundary) {
    const StateVec before = out.next.x;
    env.apply_boundary(out.next.x);
    rec.boundary_hit = before != out.next.x;
  }

  if (learning(sim.mode)) {
    AdaptRates rates;
    if (sim.mode == PolicyMode::kDirect) {
      rates = direct_update(fam, acfg, s.adapt, s.x);
    } else {
      const PredictorOutput pred = state_predictor_error(env, acfg, s.adapt, s.x, &xdot, rec.u);
      rec.eps = pred.eps;
      rec.low_confidence = pred.low_confidence;
      rates = composite_update(fam, acfg, s.adapt, s.x, pred);
    }
    AdaptState next = s.adapt;
    if (acfg.predictor == PredictorMode::kFiltered) advance_filters(env, acfg, next, s.x, rec.u, sim.dt);
    next.theta_hat = s.adapt.theta_hat + rates.theta_dot * sim.dt;
    next = guard_domain(acfg, env.param_domain, std::move(next));
    if (next.theta_hat != s.adapt.theta_hat + rates.theta_dot * sim.dt) {
      // The guard moved θ̂; drive ρ with the step actually taken.
      rates.rho_dot = rho_rate(fam, acfg, s.adapt, s.x, (next.theta_hat - s.adapt.theta_hat) / sim.dt);
      rec.guard_hit = true;
    }
    next.rho = s.adapt.rho + rates.rho_dot * sim.dt;
    out.next.adapt = std::move(next);
    out.adapted = true;
  }

  if (out.next.x.hasNaN() || out.next.adapt.theta_hat.hasNaN() || std::isnan(out.next.adapt.rho) ||
      std::isnan(rec.value) || rec.u.hasNaN()) {
    throw SolverFailure("step: NaN at t=" + std::to_string(t));
  }
  return out;
}

TrajectoryLog run_episode(const PolicyFamily& fam, const SimConfig& sim, const AdaptConfig& acfg) {
  const EnvironmentSpec& env = fam.env();
  sim.validate(env);
  acfg.validate();
  TrajectoryLog log;
  log.mode = sim.mode;
  log.dt = sim.dt;
  if (sim.horizon <= 0.0) return log;

  EpisodeState s;
  s.x = sim.x0;
  s.adapt = init_adapt_state(env, acfg, sim.theta_hat0, sim.x0);
  if (learning(sim.mode)) {
    require(acfg.potential.in_interior(sim.theta_hat0),
            "run_episode: θ̂₀ must lie strictly inside the potential's box");
  }
  const StateVec no_slack = StateVec::Zero(env.n);
  const auto steps = static_cast<long>(std::llround(sim.horizon / sim.dt));
  double running = 0.0;

  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * sim.dt;
    if (env.in_goal(s.x, no_slack)) {
      log.reached = true;
    }
    if (log.reached || k >= steps) {
      // Terminal row: state only, no further cost.
      LogRow last;
      last.t = t;
      last.x = s.x;
      const ParamVec& th = policy_theta(sim, s);
      last.theta_hat = th;
      last.rho = s.adapt.rho;
      last.upsilon = upsilon(acfg, s.adapt.rho);
      last.u = policy_at(fam, th, s.x);
      last.stage_cost = stage_cost(env, s.x, last.u);
      last.aug_cost = augmented_stage_cost(env, s.x, last.u);
      last.running_cost = running;
      last.value = value_at(fam, th, s.x);
      last.eps = StateVec::Zero(env.n);
      log.rows.push_back(std::move(last));
      break;
    }
    StepOutput out;
    try {
      out = step(fam, sim, acfg, s, t);
    } catch (const SolverFailure& e) {
      log.failed = true;
      log.failure = e.what();
      break;
    }
    out.record.running_cost = running;
    running += out.record.stage_cost * sim.dt;
    if (rho_clamped(acfg, out.next.adapt.rho)) ++log.rho_clamp_hits;
    log.rows.push_back(std::move(out.record));
    s = std::move(out.next);
  }
  return log;
}

ClosedLoopCost closed_loop_cost(const TrajectoryLog& log) {
  if (log.rows.empty()) return {};
  return {log.rows.back().running_cost, !log.reached};
}

LyapunovTrace lyapunov_trace(const TrajectoryLog& log, const ParamVec& theta_true, const AdaptConfig& acfg) {
  require(log.mode != PolicyMode::kStatic, "lyapunov_trace: V_c is not defined for static mode");
  LyapunovTrace out;
  const BregmanPotential& psi = acfg.potential;
  out.shifted = !psi.in_domain(theta_true);
  out.values.reserve(log.rows.size());
  for (const LogRow& r : log.rows) {
    const double div = out.shifted ? bregman_divergence_shifted(psi, theta_true, r.theta_hat)
                                   : bregman_divergence(psi, theta_true, r.theta_hat);
    out.values.push_back(upsilon(acfg, r.rho) * (r.value + acfg.eta) + div / acfg.gamma);
  }
  return out;
}

std::string csv_header(int n, int m, int p) {
  std::string h = "t";
  for (int i = 0; i < n; ++i) h += ",x" + std::to_string(i);
  for (int i = 0; i < m; ++i) h += ",u" + std::to_string(i);
  for (int i = 0; i < p; ++i) h += ",theta_hat" + std::to_string(i);
  h += ",rho,upsilon,stage_cost,aug_cost,running_cost,value,lyapunov";
  for (int i = 0; i < n; ++i) h += ",eps" + std::to_string(i);
  h += ",low_confidence,boundary_hit,guard_hit";
  return h;
}

void write_csv(std::ostream& os, const TrajectoryLog& log, const std::optional<LyapunovTrace>& trace) {
  if (log.rows.empty()) {
    os << "t\n";
    return;
  }
  const LogRow& r0 = log.rows.front();
  os << csv_header(static_cast<int>(r0.x.size()), static_cast<int>(r0.u.size()),
                   static_cast<int>(r0.theta_hat.size()))
     << '\n';
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    os << buf;
  };
  for (std::size_t k = 0; k < log.rows.size(); ++k) {
    const LogRow& r = log.rows[k];
    std::snprintf(buf, sizeof buf, "%.17g", r.t);
    os << buf;
    for (Eigen::Index i = 0; i < r.x.size(); ++i) put(r.x(i));
    for (Eigen::Index i = 0; i < r.u.size(); ++i) put(r.u(i));
    for (Eigen::Index i = 0; i < r.theta_hat.size(); ++i) put(r.theta_hat(i));
    put(r.rho);
    put(r.upsilon);
    put(r.stage_cost);
    put(r.aug_cost);
    put(r.running_cost);
    put(r.value);
    if (trace) {
      put(trace->values[k]);
    } else {
      os << ',';
    }
    for (Eigen::Index i = 0; i < r.eps.size(); ++i) put(r.eps(i));
    os << ',' << (r.low_confidence ? 1 : 0) << ',' << (r.boundary_hit ? 1 : 0) << ',' << (r.guard_hit ? 1 : 0) << '\n';
  }
}

TrajectoryLog read_csv(std::istream& is, PolicyMode mode, double dt, bool reached) {
  TrajectoryLog log;
  log.mode = mode;
  log.dt = dt;
  log.reached = reached;
  std::string line;
  if (!std::getline(is, line)) throw ContractViolation("read_csv: empty input");
  int n = 0, m = 0, p = 0;
  {
    std::stringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) {
      if (col.rfind("theta_hat", 0) == 0) {
        ++p;
      } else if (col.size() > 1 && col[0] == 'x') {
        ++n;
      } else if (col.size() > 1 && col[0] == 'u' && col != "upsilon") {
        ++m;
      }
    }
  }
  if (line == "t") return log;
  if (line != csv_header(n, m, p)) throw ContractViolation("read_csv: unexpected header '" + line + "'");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    const std::size_t expected = 1 + n + m + p + 7 + n + 3;
    if (f.size() != expected) throw ContractViolation("read_csv: row has " + std::to_string(f.size()) + " fields");
    std::size_t c = 0;
    auto num = [&] { return std::stod(f[c++]); };
    LogRow r;
    r.t = num();
    r.x.resize(n);
    for (int i = 0; i < n; ++i) r.x(i) = num();
    r.u.resize(m);
    for (int i = 0; i < m; ++i) r.u(i) = num();
    r.theta_hat.resize(p);
    for (int i = 0; i < p; ++i) r.theta_hat(i) = num();
    r.rho = num();
    r.upsilon = num();
    r.stage_cost = num();
    r.aug_cost = num();
    r.running_cost = num();
    r.value = num();
    ++c;  // lyapunov column is derived, not stored state
    r.eps.resize(n);
    for (int i = 0; i < n; ++i) r.eps(i) = num();
    r.low_confidence = f[c++] == "1";
    r.boundary_hit = f[c++] == "1";
    r.guard_hit = f[c++] == "1";
    log.rows.push_back(std::move(r));
  }
  return log;
}

}  // namespace ceadapt

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

#include "ceadapt/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <tuple>

#include "ceadapt/parallel.hpp"

namespace ceadapt {

namespace {

constexpr std::size_t kWorstKept = 5;

class WorstList {
 public:
  void offer(double amount, const std::function<std::string()>& where) {
    if (items_.size() == kWorstKept && amount <= items_.back().amount) return;
    items_.push_back({where(), amount});
    std::stable_sort(items_.begin(), items_.end(),
                     [](const Violation& a, const Violation& b) { return a.amount > b.amount; });
    if (items_.size() > kWorstKept) items_.pop_back();
  }
  void merge(const WorstList& other) {
    for (const Violation& v : other.items_) offer(v.amount, [&] { return v.where; });
  }
  std::vector<Violation> take() { return std::move(items_); }

 private:
  std::vector<Violation> items_;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string state_str(const StateVec& x) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) s += ", ";
    s += fmt("%.6g", x(i));
  }
  return s + ")";
}

double default_tol(const TrajectoryLog& log, double tolerance) {
  return tolerance >= 0.0 ? tolerance : 10.0 * log.dt * log.dt;
}

bool is_learning(PolicyMode mode) { return mode == PolicyMode::kDirect || mode == PolicyMode::kComposite; }

// Right-hand side of the per-step V_c bound without the integration tolerance.
double vc_bound(const TrajectoryLog& log, const LogRow& r, const AdaptConfig& acfg) {
  double b = -r.upsilon * r.aug_cost * log.dt;
  if (log.mode == PolicyMode::kComposite) b -= (acfg.alpha / acfg.gamma) * r.eps.squaredNorm() * log.dt;
  return b;
}

}  // namespace

double CheckResult::metric(const std::string& key) const {
  for (const auto& [k, v] : metrics) {
    if (k == key) return v;
  }
  throw ContractViolation("CheckResult: no metric '" + key + "' in " + name);
}

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed || c.skipped; });
}

nlohmann::json to_json(const CheckResult& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["tolerance"] = c.tolerance;
  j["max_violation"] = c.max_violation;
  j["passed"] = c.passed;
  j["skipped"] = c.skipped;
  if (!c.notice.empty()) j["notice"] = c.notice;
  j["checked"] = c.checked;
  j["violations"] = c.violations;
  j["excluded"] = c.excluded;
  j["worst"] = nlohmann::json::array();
  for (const Violation& v : c.worst) j["worst"].push_back({{"where", v.where}, {"amount", v.amount}});
  j["metrics"] = nlohmann::json::object();
  for (const auto& [k, v] : c.metrics) j["metrics"][k] = v;
  return j;
}

nlohmann::json to_json(const VerificationReport& report) {
  nlohmann::json j;
  j["schema"] = "ceadapt.verify/1";
  j["passed"] = report.passed();
  j["checks"] = nlohmann::json::array();
  for (const CheckResult& c : report.checks) j["checks"].push_back(to_json(c));
  return j;
}

std::string render_table(const VerificationReport& report) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-44s %-6s %12s %12s %10s %10s\n", "check", "result", "max_viol", "tolerance",
                "violations", "checked");
  os << line;
  for (const CheckResult& c : report.checks) {
    const char* verdict = c.skipped ? "SKIP" : (c.passed ? "PASS" : "FAIL");
    std::snprintf(line, sizeof line, "%-44s %-6s %12.4g %12.4g %10zu %10zu\n", c.name.c_str(), verdict,
                  c.max_violation, c.tolerance, c.violations, c.checked);
    os << line;
    if (!c.notice.empty()) os << "    note: " << c.notice << '\n';
    if (!c.passed && !c.skipped && !c.worst.empty()) {
      os << "    worst: " << c.worst.front().where << " (" << fmt("%.4g", c.worst.front().amount) << ")\n";
    }
  }
  return os.str();
}

CheckResult hjb_residual(const EnvironmentSpec& env, const ParamVec& theta, const ValueTable& table,
                         const SolverConfig& cfg, double tolerance) {
  CheckResult out;
  out.name = "hjb_residual";
  out.tolerance = tolerance;
  const Grid& grid = table.grid;
  require(table.values.size() == grid.size(), "hjb_residual: table size does not match its grid");

  struct Partial {
    double worst = 0.0;
    double worst_all = 0.0;
    std::size_t checked = 0, excluded = 0, violations = 0;
    WorstList list;
  };
  const int workers = resolve_threads(cfg.threads);
  std::vector<Partial> parts(static_cast<std::size_t>(workers));
  const std::size_t chunk = (grid.size() + workers - 1) / workers;
  parallel_for(grid.size(), workers, [&](std::size_t begin, std::size_t end) {
    Partial& p = parts[begin / chunk];
    for (std::size_t i = begin; i < end; ++i) {
      if (table.absorbing[i]) {
        ++p.excluded;
        continue;
      }
      const BackupResult b = bellman_backup(env, theta, table, i, cfg);
      const double r = std::abs(table.values[i] - b.value);
      p.worst_all = std::max(p.worst_all, r);
      const std::vector<int> idx = grid.multi_index(i);
      bool interior = true;
      for (int a = 0; a < grid.dims(); ++a) interior &= idx[a] > 0 && idx[a] < grid.axis(a).node_count - 1;
      if (!interior) {
        ++p.excluded;
        continue;
      }
      ++p.checked;
      p.worst = std::max(p.worst, r);
      if (r > tolerance) ++p.violations;
      p.list.offer(r, [&] { return "node " + std::to_string(i) + " at " + state_str(grid.node_state(i)); });
    }
  });
  double worst_all = 0.0;
  WorstList list;
  for (const Partial& p : parts) {
    out.max_violation = std::max(out.max_violation, p.worst);
    worst_all = std::max(worst_all, p.worst_all);
    out.checked += p.checked;
    out.excluded += p.excluded;
    out.violations += p.violations;
    list.merge(p.list);
  }
  out.worst = list.take();
  out.passed = out.violations == 0;
  out.metrics.emplace_back("max_residual_all_nodes", worst_all);
  return out;
}

CheckResult hjb_residual(const PolicyFamily& fam, std::size_t index) {
  require(index < fam.size(), "hjb_residual: sample index out of range");
  const FamilySample& s = fam.sample(index);
  CheckResult out = hjb_residual(fam.env(), s.theta, s.value, fam.solver_config(), fam.solver_config().sweep_tolerance);
  out.name = "hjb_residual[theta=" + fmt("%.6g", s.theta(0)) + "]";
  return out;
}

CheckResult clf_check(const PolicyFamily& fam, const ParamVec& theta, const std::vector<TrajectoryLog>& logs,
                      const ClfOptions& opts) {
  require(!logs.empty(), "clf_check: no trajectories");
  require(opts.min_fraction > 0.0 && opts.min_fraction <= 1.0, "clf_check: min_fraction must be in (0, 1]");
  require(opts.slack_rate >= 0.0, "clf_check: slack_rate must be >= 0");
  const StateVec no_slack = StateVec::Zero(fam.env().n);
  for (const TrajectoryLog& log : logs) {
    require(log.mode == PolicyMode::kOptimal, "clf_check: trajectories must be generated in optimal mode");
    for (std::size_t k = 0; k + 1 < log.rows.size(); ++k) {
      const LogRow& r = log.rows[k];
      require(r.theta_hat.size() == theta.size() && r.theta_hat == theta,
              "clf_check: trajectory was generated at a different θ");
      if (!fam.env().in_goal(r.x, no_slack)) {
        require(r.aug_cost > 0.0, "clf_check: stage cost must be strictly positive off the goal");
      }
    }
  }

  CheckResult out;
  out.name = "clf_decrement";
  const double dt = logs.front().dt;
  const double tol_int = 10.0 * dt * dt;
  out.tolerance = tol_int + opts.slack_rate * dt;
  WorstList list;
  double worst_raw = 0.0;
  std::size_t within_int = 0;
  for (std::size_t l = 0; l < logs.size(); ++l) {
    const TrajectoryLog& log = logs[l];
    for (std::size_t k = 0; k + 1 < log.rows.size(); ++k) {
      const LogRow& r = log.rows[k];
      const double res = std::abs(log.rows[k + 1].value - r.value + r.aug_cost * log.dt);
      ++out.checked;
      worst_raw = std::max(worst_raw, res);
      if (res <= tol_int) ++within_int;
      if (res > out.tolerance) {
        ++out.violations;
        out.max_violation = std::max(out.max_violation, res - out.tolerance);
      }
      list.offer(res, [&] {
        return "log " + std::to_string(l) + " step " + std::to_string(k) + " t=" + fmt("%.3f", r.t) + " x=" +
               state_str(r.x);
      });
    }
  }
  out.worst = list.take();
  const double frac = out.checked ? 1.0 - static_cast<double>(out.violations) / out.checked : 1.0;
  out.passed = frac >= opts.min_fraction;
  out.metrics.emplace_back("fraction_within", frac);
  out.metrics.emplace_back("fraction_within_integration_tol", out.checked ? double(within_int) / out.checked : 1.0);
  out.metrics.emplace_back("max_abs_residual", worst_raw);
  out.metrics.emplace_back("slack_rate", opts.slack_rate);
  return out;
}

CheckResult lyapunov_monotonicity(const TrajectoryLog& log, const ParamVec& theta_true, const AdaptConfig& acfg,
                                  double tolerance) {
  require(is_learning(log.mode), "lyapunov_monotonicity: log must come from direct or composite mode");
  CheckResult out;
  out.name = "lyapunov_" + to_string(log.mode);
  out.tolerance = default_tol(log, tolerance);
  const LyapunovTrace tr = lyapunov_trace(log, theta_true, acfg);
  WorstList list;
  double bound_sum = 0.0;
  for (std::size_t k = 0; k + 1 < log.rows.size(); ++k) {
    const LogRow& r = log.rows[k];
    const double bound = vc_bound(log, r, acfg);
    const double excess = tr.values[k + 1] - tr.values[k] - bound;
    bound_sum += bound;
    ++out.checked;
    if (excess > out.tolerance) ++out.violations;
    out.max_violation = std::max(out.max_violation, excess);
    list.offer(excess, [&] { return "step " + std::to_string(k) + " t=" + fmt("%.3f", r.t) + " x=" + state_str(r.x); });
  }
  out.worst = list.take();
  out.passed = out.violations == 0;
  if (tr.shifted) out.notice = "θ on the potential boundary: V_c shifted by −ψ(θ)/γ";
  const double total = tr.values.empty() ? 0.0 : tr.values.front() - tr.values.back();
  out.metrics.emplace_back("total_decrease", total);
  out.metrics.emplace_back("bound_total", -bound_sum);
  return out;
}

LyapunovSplit lyapunov_split(const PolicyFamily& fam, const TrajectoryLog& log, const ParamVec& theta_true,
                             const AdaptConfig& acfg, double tolerance) {
  require(is_learning(log.mode), "lyapunov_split: log must come from direct or composite mode");
  const double tol = default_tol(log, tolerance);
  const LyapunovTrace tr = lyapunov_trace(log, theta_true, acfg);
  LyapunovSplit out;
  out.table_part.name = "lyapunov_table_part_" + to_string(log.mode);
  out.learning_part.name = "lyapunov_learning_part_" + to_string(log.mode);
  out.table_part.tolerance = out.learning_part.tolerance = tol;
  WorstList tl, ll;
  for (std::size_t k = 0; k + 1 < log.rows.size(); ++k) {
    const LogRow& r = log.rows[k];
    const double v_next_frozen = value_at(fam, r.theta_hat, log.rows[k + 1].x);
    const double table = r.upsilon * (v_next_frozen - r.value + r.aug_cost * log.dt);
    const double learning = tr.values[k + 1] - tr.values[k] - table - vc_bound(log, r, acfg);
    auto where = [&] { return "step " + std::to_string(k) + " t=" + fmt("%.3f", r.t); };
    for (auto [c, v, l] : {std::tuple{&out.table_part, table, &tl}, std::tuple{&out.learning_part, learning, &ll}}) {
      ++c->checked;
      if (v > tol) ++c->violations;
      c->max_violation = std::max(c->max_violation, v);
      l->offer(v, where);
    }
  }
  out.table_part.worst = tl.take();
  out.learning_part.worst = ll.take();
  out.table_part.passed = out.table_part.violations == 0;
  out.learning_part.passed = out.learning_part.violations == 0;
  return out;
}

ShapingMargin reward_shaping_margin(const PolicyFamily& fam, std::size_t index, const ParamDomain& theta_set) {
  require(index < fam.size(), "reward_shaping_margin: sample index out of range");
  const EnvironmentSpec& env = fam.env();
  const FamilySample& s = fam.sample(index);
  require(theta_set.size() == env.p, "reward_shaping_margin: Θ has wrong dimension");
  double spread = 0.0;
  for (Eigen::Index i = 0; i < env.p; ++i) {
    spread = std::max({spread, s.theta(i) - theta_set.lower(i), theta_set.upper(i) - s.theta(i)});
  }
  const Grid& grid = s.value.grid;
  ShapingMargin out;
  out.margin.resize(grid.size());
  std::size_t nonneg = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const StateVec x = grid.node_state(i);
    const ControlVec& u = env.action_set[s.policy.actions[i]];
    const StateVec g = interp_gradient(grid, s.value.values, x);
    const double coupling = (eval_basis(env, x) * g).lpNorm<1>();
    out.margin[i] = augmented_stage_cost(env, x, u) - coupling * spread;
    if (out.margin[i] >= 0.0) ++nonneg;
  }
  out.fraction_nonnegative = static_cast<double>(nonneg) / grid.size();
  out.min_margin = *std::min_element(out.margin.begin(), out.margin.end());
  return out;
}

CheckResult gradient_consistency(const PolicyFamily& fam, const std::vector<GradientProbe>& probes,
                                 const GradientOptions& opts) {
  CheckResult out;
  out.name = "gradient_consistency";
  out.tolerance = opts.tolerance;
  const Grid& grid = fam.grid();
  const int n = grid.dims();
  const bool has_theta_axis = fam.size() > 1;
  const double theta_h = has_theta_axis ? opts.step_fraction * (fam.theta_max() - fam.theta_min()) : 0.0;
  auto axis_h = [&](int a) { return opts.step_fraction * (grid.axis(a).max - grid.axis(a).min); };
  WorstList list;

  for (std::size_t q = 0; q < probes.size(); ++q) {
    const GradientProbe& pr = probes[q];
    // Keep both finite-difference points inside one cell on every axis.
    const CellLocation loc = locate(grid, pr.x);
    bool near_edge = false;
    for (int a = 0; a < n; ++a) {
      const double g = axis_h(a) / grid.axis(a).spacing();
      near_edge |= loc.frac[a] <= g || loc.frac[a] >= 1.0 - g;
    }
    if (has_theta_axis) {
      for (const FamilySample& s : fam.samples()) near_edge |= std::abs(pr.theta_hat(0) - s.theta(0)) <= theta_h;
    }
    if (near_edge) {
      ++out.excluded;
      continue;
    }
    ++out.checked;
    const StateVec gx = grad_x_value(fam, pr.theta_hat, pr.x);
    double err = 0.0;
    for (int a = 0; a < n; ++a) {
      const double h = axis_h(a);
      StateVec xp = pr.x, xm = pr.x;
      xp(a) += h;
      xm(a) -= h;
      const double fd = (value_at(fam, pr.theta_hat, xp) - value_at(fam, pr.theta_hat, xm)) / (2.0 * h);
      err = std::max(err, std::abs(gx(a) - fd) / std::max(std::abs(fd), 1.0));
    }
    if (has_theta_axis) {
      const double h = theta_h;
      const ParamVec gt = grad_theta_value(fam, pr.theta_hat, pr.x);
      const double fd = (value_at(fam, scalar_vec(pr.theta_hat(0) + h), pr.x) -
                         value_at(fam, scalar_vec(pr.theta_hat(0) - h), pr.x)) /
                        (2.0 * h);
      err = std::max(err, std::abs(gt(0) - fd) / std::max(std::abs(fd), 1.0));
    }
    if (err > opts.tolerance) ++out.violations;
    out.max_violation = std::max(out.max_violation, err);
    list.offer(err, [&] { return "probe " + std::to_string(q) + " x=" + state_str(pr.x) + " θ̂=" + state_str(pr.theta_hat); });
  }
  out.worst = list.take();
  out.passed = out.violations == 0 && out.checked > 0;
  if (out.checked == 0) out.notice = "every probe was excluded";
  return out;
}

CheckResult gradient_consistency(const PolicyFamily& fam, const GradientOptions& opts) {
  const Grid& grid = fam.grid();
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<GradientProbe> probes;
  probes.reserve(opts.samples);
  for (std::size_t i = 0; i < opts.samples; ++i) {
    GradientProbe pr;
    pr.x.resize(grid.dims());
    for (int a = 0; a < grid.dims(); ++a) {
      pr.x(a) = grid.axis(a).min + unit(rng) * (grid.axis(a).max - grid.axis(a).min);
    }
    pr.theta_hat = fam.sample(0).theta;
    if (fam.size() > 1) pr.theta_hat(0) = fam.theta_min() + unit(rng) * (fam.theta_max() - fam.theta_min());
    probes.push_back(std::move(pr));
  }
  return gradient_consistency(fam, probes, opts);
}

}  // namespace ceadapt

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

#include "ceadapt/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "ceadapt/parallel.hpp"
#include "ceadapt/verify.hpp"

namespace ceadapt {

using nlohmann::json;

namespace {

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string f(double v, int prec = 2) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

// Blue (−1) through white (0) to red (+1).
std::string diverging(double a) {
  a = std::clamp(a, -1.0, 1.0);
  const int r = a < 0 ? static_cast<int>(255 * (1 + a)) : 255;
  const int b = a > 0 ? static_cast<int>(255 * (1 - a)) : 255;
  const int g = static_cast<int>(255 * (1 - std::abs(a)));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

double effective(const Table1Cell& c) { return c.reached && !c.failed ? c.cost : kInf; }

}  // namespace

json episode_summary(const TrajectoryLog& log, const SimConfig& sim, const AdaptConfig& acfg,
                     const std::string& case_label) {
  json j;
  j["schema"] = "ceadapt.episode/1";
  j["case"] = case_label;
  j["mode"] = to_string(log.mode);
  j["dt"] = sim.dt;
  if (sim.dt != 0.001) j["note"] = "nonstandard simulation step dt=" + g17(sim.dt) + " s (reference is 0.001 s)";
  j["horizon"] = sim.horizon;
  j["theta_true"] = vec_json(sim.theta_true);
  j["theta_hat0"] = vec_json(sim.theta_hat0);
  const ClosedLoopCost c = closed_loop_cost(log);
  j["cost"] = c.value;
  j["reached"] = log.reached;
  j["failed"] = log.failed;
  if (log.failed) j["failure"] = log.failure;
  j["steps"] = log.rows.empty() ? 0 : log.rows.size() - 1;
  if (!log.rows.empty()) {
    const LogRow& last = log.rows.back();
    j["t_end"] = last.t;
    j["final_state"] = vec_json(last.x);
    j["final_theta_hat"] = vec_json(last.theta_hat);
    j["terminal_stage_cost"] = last.stage_cost;
    double min_up = kInf;
    for (const LogRow& r : log.rows) min_up = std::min(min_up, r.upsilon);
    j["min_upsilon"] = min_up;
  }
  j["rho_clamp_hits"] = log.rho_clamp_hits;
  if ((log.mode == PolicyMode::kDirect || log.mode == PolicyMode::kComposite) && log.rows.size() > 1) {
    const CheckResult lc = lyapunov_monotonicity(log, sim.theta_true, acfg);
    j["max_lyapunov_violation"] = lc.max_violation;
    j["lyapunov_violating_steps"] = lc.violations;
  } else {
    j["max_lyapunov_violation"] = nullptr;
  }
  return j;
}

const Table1Cell& Table1Result::at(const std::string& label, PolicyMode mode) const {
  for (const Table1Cell& c : cells) {
    if (c.case_label == label && c.mode == mode) return c;
  }
  throw ContractViolation("Table1Result: no cell for " + label + "/" + to_string(mode));
}

Table1Result run_table1(const PolicyFamily& fam, const ExperimentConfig& cfg) {
  Table1Result out;
  out.modes = cfg.modes;
  for (const EnvironmentCase& c : cfg.cases) out.case_labels.push_back(c.label);
  out.cells.resize(cfg.cases.size() * cfg.modes.size());
  const AdaptConfig acfg = make_adapt_config(cfg, fam.env());
  parallel_for(out.cells.size(), cfg.solver.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const EnvironmentCase& ec = cfg.cases[i / cfg.modes.size()];
      const PolicyMode mode = cfg.modes[i % cfg.modes.size()];
      Table1Cell& cell = out.cells[i];
      cell.case_label = ec.label;
      cell.mode = mode;
      const TrajectoryLog log = run_episode(fam, make_sim_config(cfg, ec, mode), acfg);
      cell.cost = closed_loop_cost(log).value;
      cell.reached = log.reached;
      cell.failed = log.failed;
      cell.failure = log.failure;
      cell.theta_hat_final = log.rows.empty() ? ec.theta_hat0 : log.rows.back().theta_hat;
    }
  });
  out.ordering_failures = check_orderings(out);
  return out;
}

std::vector<std::string> check_orderings(const Table1Result& r) {
  std::vector<std::string> fails;
  auto has = [&](PolicyMode m) { return std::find(r.modes.begin(), r.modes.end(), m) != r.modes.end(); };
  const PolicyMode chain[] = {PolicyMode::kOptimal, PolicyMode::kComposite, PolicyMode::kDirect, PolicyMode::kStatic};
  for (const std::string& label : r.case_labels) {
    for (const Table1Cell& c : r.cells) {
      if (c.case_label == label && c.failed) fails.push_back(label + ": " + to_string(c.mode) + " aborted: " + c.failure);
    }
    std::vector<PolicyMode> present;
    for (PolicyMode m : chain) {
      if (has(m)) present.push_back(m);
    }
    for (std::size_t i = 0; i + 1 < present.size(); ++i) {
      const double a = effective(r.at(label, present[i]));
      const double b = effective(r.at(label, present[i + 1]));
      // Two divergent runs are tied, never out of order.
      if (a > b) {
        fails.push_back(label + ": cost(" + to_string(present[i]) + ") = " + g17(a) + " > cost(" +
                        to_string(present[i + 1]) + ") = " + g17(b));
      }
    }
    for (PolicyMode m : {PolicyMode::kOptimal, PolicyMode::kComposite, PolicyMode::kDirect}) {
      if (has(m) && !r.at(label, m).reached) fails.push_back(label + ": " + to_string(m) + " did not reach the goal");
    }
    if (has(PolicyMode::kOptimal) && has(PolicyMode::kComposite)) {
      const double opt = effective(r.at(label, PolicyMode::kOptimal));
      const double comp = effective(r.at(label, PolicyMode::kComposite));
      if (comp > 2.0 * opt) {
        fails.push_back(label + ": composite cost " + g17(comp) + " exceeds optimal " + g17(opt) + " by more than 100%");
      }
    }
  }
  return fails;
}

std::string table1_csv(const Table1Result& r) {
  std::string s = "case,mode,cost,reached,failed,theta_hat_final\n";
  for (const Table1Cell& c : r.cells) {
    s += c.case_label + "," + to_string(c.mode) + "," + g17(c.cost) + "," + (c.reached ? "1" : "0") + "," +
         (c.failed ? "1" : "0") + "," + g17(c.theta_hat_final(0)) + "\n";
  }
  return s;
}

std::string table1_text(const Table1Result& r) {
  std::ostringstream os;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-10s", "case");
  os << buf;
  for (PolicyMode m : r.modes) {
    std::snprintf(buf, sizeof buf, "%12s", to_string(m).c_str());
    os << buf;
  }
  os << '\n';
  for (const std::string& label : r.case_labels) {
    std::snprintf(buf, sizeof buf, "%-10s", label.c_str());
    os << buf;
    for (PolicyMode m : r.modes) {
      const Table1Cell& c = r.at(label, m);
      const std::string v = c.failed ? "aborted" : (c.reached ? f(c.cost) : "inf");
      std::snprintf(buf, sizeof buf, "%12s", v.c_str());
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

std::string phase_portrait_svg(const PolicyFamily& fam, const ParamVec& theta, const TrajectoryLog& log) {
  const Grid& g = fam.grid();
  const GridAxis& ap = g.axis(0);
  const GridAxis& av = g.axis(1);
  const int W = 640, H = 480, M = 50, cells = 80;
  const double pw = W - 2 * M, ph = H - 2 * M;
  auto sx = [&](double p) { return M + (p - ap.min) / (ap.max - ap.min) * pw; };
  auto sy = [&](double v) { return H - M - (v - av.min) / (av.max - av.min) * ph; };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const double cw = pw / cells, ch = ph / cells;
  for (int i = 0; i < cells; ++i) {
    for (int k = 0; k < cells; ++k) {
      const double p = ap.min + (i + 0.5) / cells * (ap.max - ap.min);
      const double v = av.min + (k + 0.5) / cells * (av.max - av.min);
      const double u = policy_at(fam, theta, vec2(p, v))(0);
      os << "<rect x=\"" << f(M + i * cw) << "\" y=\"" << f(H - M - (k + 1) * ch) << "\" width=\"" << f(cw + 0.3)
         << "\" height=\"" << f(ch + 0.3) << "\" fill=\"" << diverging(u) << "\"/>\n";
    }
  }
  if (!log.rows.empty()) {
    const std::size_t stride = std::max<std::size_t>(1, log.rows.size() / 2000);
    os << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < log.rows.size(); k += stride) {
      os << f(sx(log.rows[k].x(0))) << ',' << f(sy(log.rows[k].x(1))) << ' ';
    }
    os << f(sx(log.rows.back().x(0))) << ',' << f(sy(log.rows.back().x(1))) << "\"/>\n";
  }
  os << "<rect x=\"" << M << "\" y=\"" << M << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">position p</text>\n";
  os << "<text x=\"14\" y=\"" << H / 2 << "\" transform=\"rotate(-90 14 " << H / 2
     << ")\" text-anchor=\"middle\">velocity v</text>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"30\" text-anchor=\"middle\">policy at theta=" << f(theta(0), 3)
     << " (blue u=-1, red u=+1), " << to_string(log.mode) << " trajectory</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string position_svg(const TrajectoryLog& log, double goal_position) {
  const int W = 640, H = 320, M = 50;
  const double pw = W - 2 * M, ph = H - 2 * M;
  const double t_end = log.rows.empty() ? 1.0 : std::max(log.rows.back().t, 1e-9);
  const double pmin = -1.2, pmax = std::max(goal_position, 0.5);
  auto sx = [&](double t) { return M + t / t_end * pw; };
  auto sy = [&](double p) { return H - M - (p - pmin) / (pmax - pmin) * ph; };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << M << "\" x2=\"" << W - M << "\" y1=\"" << f(sy(goal_position)) << "\" y2=\""
     << f(sy(goal_position)) << "\" stroke=\"green\" stroke-dasharray=\"4 3\"/>\n";
  if (!log.rows.empty()) {
    const std::size_t stride = std::max<std::size_t>(1, log.rows.size() / 2000);
    os << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < log.rows.size(); k += stride) {
      os << f(sx(log.rows[k].t)) << ',' << f(sy(log.rows[k].x(0))) << ' ';
    }
    os << f(sx(log.rows.back().t)) << ',' << f(sy(log.rows.back().x(0))) << "\"/>\n";
  }
  os << "<rect x=\"" << M << "\" y=\"" << M << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">time [s] (0 to " << f(t_end)
     << ")</text>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"30\" text-anchor=\"middle\">position, " << to_string(log.mode)
     << " (goal dashed)</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace ceadapt

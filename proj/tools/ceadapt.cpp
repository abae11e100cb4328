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

// ceadapt: solve value-function families, run adaptive episodes, reproduce the
// closed-loop cost table and verify the stored artifacts.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ceadapt/family_io.hpp"
#include "ceadapt/report.hpp"
#include "ceadapt/verify.hpp"

namespace fs = std::filesystem;
using namespace ceadapt;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kUsage = 2, kIntegrity = 3, kSolver = 4 };

struct Options {
  std::string config;
  std::string out;
  long long seed = -1;
  int threads = -1;
  std::string mode;
  std::string case_label;
};

ExperimentConfig resolve(const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? default_config() : load_config(o.config);
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.threads >= 0) cfg.solver.threads = o.threads;
  if (!o.mode.empty()) {
    try {
      cfg.simulate_mode = policy_mode_from_string(o.mode);
    } catch (const ContractViolation& e) {
      throw ConfigError(std::string("--mode: ") + e.what());
    }
  }
  if (!o.case_label.empty()) cfg.simulate_case = o.case_label;
  cfg.validate();
  return cfg;
}

void write_text(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << s;
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
}

PolicyFamily open_family(const ExperimentConfig& cfg) {
  const fs::path dir = family_path(cfg);
  if (!fs::exists(dir)) {
    throw FamilyIoError("no family at '" + dir.string() + "'; run `ceadapt solve` with the same config first");
  }
  return load_family(dir, make_environment(cfg));
}

fs::path episode_stem(const ExperimentConfig& cfg, const std::string& label, PolicyMode mode) {
  return fs::path(cfg.output_dir) / "episodes" / (label + "_" + to_string(mode));
}

int cmd_defaults() {
  std::cout << to_json(default_config()).dump(2) << '\n';
  return kOk;
}

int cmd_solve(const ExperimentConfig& cfg) {
  const fs::path dir = family_path(cfg);
  if (fs::exists(dir)) {
    std::cerr << "error: '" << dir.string() << "' already exists; families are never overwritten\n";
    return kUsage;
  }
  const EnvironmentSpec env = make_environment(cfg);
  const std::vector<ParamVec> thetas = make_theta_samples(cfg, env);
  std::printf("solving %zu samples on a %dx%d grid\n", thetas.size(), cfg.nodes_per_axis, cfg.nodes_per_axis);
  const PolicyFamily fam = solve_family(env, thetas, make_grid(cfg, env), cfg.solver, cfg.smoothing);
  std::printf("%10s %8s %14s %14s %9s\n", "theta", "sweeps", "last_delta", "hjb_residual", "seconds");
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const FamilySample& s = fam.sample(i);
    const CheckResult r = hjb_residual(fam, i);
    std::printf("%10.6g %8d %14.3e %14.3e %9.3f\n", s.theta(0), s.stats.sweeps, s.stats.residual, r.max_violation,
                s.stats.seconds);
  }
  save_family(fam, dir);
  std::printf("family written to %s\ncontent hash %s\n", dir.string().c_str(),
              build_manifest(fam).at("content_hash").get<std::string>().c_str());
  return kOk;
}

int cmd_simulate(const ExperimentConfig& cfg) {
  const PolicyFamily fam = open_family(cfg);
  const EnvironmentCase& ec = find_case(cfg, cfg.simulate_case);
  const SimConfig sim = make_sim_config(cfg, ec, cfg.simulate_mode);
  const AdaptConfig acfg = make_adapt_config(cfg, fam.env());
  const TrajectoryLog log = run_episode(fam, sim, acfg);

  const fs::path stem = episode_stem(cfg, ec.label, cfg.simulate_mode);
  fs::create_directories(stem.parent_path());
  {
    std::ofstream csv(stem.string() + ".csv", std::ios::binary);
    std::optional<LyapunovTrace> trace;
    if (cfg.simulate_mode == PolicyMode::kDirect || cfg.simulate_mode == PolicyMode::kComposite) {
      trace = lyapunov_trace(log, sim.theta_true, acfg);
    }
    write_csv(csv, log, trace);
  }
  const nlohmann::json summary = episode_summary(log, sim, acfg, ec.label);
  write_text(stem.string() + ".json", summary.dump(2) + "\n");
  if (cfg.plots) {
    const ParamVec& th = log.rows.empty() ? sim.theta_hat0 : log.rows.back().theta_hat;
    write_text(stem.string() + "_phase.svg", phase_portrait_svg(fam, th, log));
    write_text(stem.string() + "_position.svg", position_svg(log, fam.env().goal_state(0)));
  }
  std::printf("%s / %s: cost %.4f, reached %s%s\n", ec.label.c_str(), to_string(cfg.simulate_mode).c_str(),
              summary["cost"].get<double>(), log.reached ? "yes" : "no", log.failed ? " (aborted)" : "");
  if (summary.contains("note")) std::printf("note: %s\n", summary["note"].get<std::string>().c_str());
  std::printf("log written to %s.csv\n", stem.string().c_str());
  return kOk;
}

int cmd_table1(const ExperimentConfig& cfg) {
  const PolicyFamily fam = open_family(cfg);
  const Table1Result r = run_table1(fam, cfg);
  std::cout << table1_text(r);
  const fs::path csv = fs::path(cfg.output_dir) / "table1.csv";
  write_text(csv, table1_csv(r));
  std::printf("csv written to %s\n", csv.string().c_str());
  for (const Table1Cell& c : r.cells) {
    if (c.failed) std::printf("aborted: %s / %s: %s\n", c.case_label.c_str(), to_string(c.mode).c_str(), c.failure.c_str());
  }
  if (!r.orderings_hold()) {
    for (const std::string& f : r.ordering_failures) std::printf("ordering failed: %s\n", f.c_str());
    return kCheckFailed;
  }
  std::printf("orderings hold\n");
  return kOk;
}

int cmd_verify(const ExperimentConfig& cfg) {
  const PolicyFamily fam = open_family(cfg);
  VerificationReport report;
  for (std::size_t i = 0; i < fam.size(); ++i) report.checks.push_back(hjb_residual(fam, i));
  report.checks.push_back(gradient_consistency(fam));

  {
    CheckResult shaping;
    shaping.name = "reward_shaping_margin";
    const std::size_t nominal = fam.size() / 2;
    const ShapingMargin m = reward_shaping_margin(fam, nominal, fam.env().param_domain);
    shaping.passed = true;
    shaping.checked = m.margin.size();
    shaping.notice = "informational: fraction of nodes where the stage cost dominates the model error term";
    shaping.metrics = {{"theta_nominal", fam.sample(nominal).theta(0)},
                       {"fraction_nonnegative", m.fraction_nonnegative},
                       {"min_margin", m.min_margin}};
    report.checks.push_back(shaping);
  }

  const AdaptConfig acfg = make_adapt_config(cfg, fam.env());
  std::size_t logs_found = 0;
  for (const EnvironmentCase& ec : cfg.cases) {
    for (PolicyMode mode : cfg.modes) {
      if (mode == PolicyMode::kStatic) continue;
      const fs::path stem = episode_stem(cfg, ec.label, mode);
      if (!fs::exists(stem.string() + ".csv") || !fs::exists(stem.string() + ".json")) continue;
      std::ifstream js(stem.string() + ".json");
      const nlohmann::json summary = nlohmann::json::parse(js);
      std::ifstream csv(stem.string() + ".csv");
      const TrajectoryLog log =
          read_csv(csv, mode, summary.at("dt").get<double>(), summary.at("reached").get<bool>());
      ++logs_found;
      if (mode == PolicyMode::kOptimal) {
        CheckResult c = clf_check(fam, ec.theta_true, {log});
        c.name += "[" + ec.label + "]";
        report.checks.push_back(c);
      } else {
        CheckResult c = lyapunov_monotonicity(log, ec.theta_true, acfg);
        c.name += "[" + ec.label + "]";
        report.checks.push_back(c);
      }
    }
  }
  if (logs_found == 0) {
    CheckResult skipped;
    skipped.name = "lyapunov_and_clf";
    skipped.skipped = true;
    skipped.notice = "no episode logs under " + (fs::path(cfg.output_dir) / "episodes").string() +
                     "; Lyapunov and CLF checks skipped (run `ceadapt simulate` first)";
    report.checks.push_back(skipped);
  }

  std::cout << render_table(report);
  const fs::path out = fs::path(cfg.output_dir) / "verify.json";
  write_text(out, to_json(report).dump(2) + "\n");
  std::printf("report written to %s\n", out.string().c_str());
  return report.passed() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certainty-equivalence adaptive control on precomputed value-function families"};
  app.require_subcommand(1);
  Options o;
  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "Experiment config (JSON); defaults when omitted");
    sub->add_option("--out", o.out, "Output directory (overrides output_dir)");
    sub->add_option("--seed", o.seed, "Reserved; the pipeline is deterministic");
    sub->add_option("--threads", o.threads, "Worker threads (0 = hardware concurrency)");
  };
  CLI::App* solve = app.add_subcommand("solve", "Solve and store the value-function family");
  CLI::App* simulate = app.add_subcommand("simulate", "Run one episode and write its log and summary");
  CLI::App* table1 = app.add_subcommand("table1", "Run every (case, mode) episode and print the cost matrix");
  CLI::App* verify = app.add_subcommand("verify", "Run the verification checks on stored artifacts");
  app.add_subcommand("defaults", "Print the full default config");
  for (CLI::App* s : {solve, simulate, table1, verify}) common(s);
  simulate->add_option("--mode", o.mode, "static | direct | composite | optimal");
  simulate->add_option("--case", o.case_label, "Experiment case label (e.g. flat, steep)");
  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("defaults")) return cmd_defaults();
    const ExperimentConfig cfg = resolve(o);
    if (app.got_subcommand(solve)) return cmd_solve(cfg);
    if (app.got_subcommand(simulate)) return cmd_simulate(cfg);
    if (app.got_subcommand(table1)) return cmd_table1(cfg);
    if (app.got_subcommand(verify)) return cmd_verify(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const FamilyIoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIntegrity;
  } catch (const SolverFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

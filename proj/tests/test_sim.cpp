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

#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "ceadapt/config.hpp"
#include "support.hpp"

using namespace ceadapt;
using ceadapt::testing::reference_family;
using ceadapt::testing::synthetic_family;

namespace {

SimConfig episode(PolicyMode mode, double theta_true, double theta_hat0) {
  SimConfig sim;
  sim.mode = mode;
  sim.theta_true = scalar_vec(theta_true);
  sim.theta_hat0 = scalar_vec(theta_hat0);
  return sim;
}

// Reference adversarial runs, shared across test cases.
const TrajectoryLog& reference_run(PolicyMode mode, bool steep) {
  static std::map<std::pair<int, bool>, TrajectoryLog> cache;
  const auto key = std::pair{static_cast<int>(mode), steep};
  auto it = cache.find(key);
  if (it == cache.end()) {
    const double th = steep ? 0.4 : 0.05;
    const double th0 = mode == PolicyMode::kOptimal ? th : (steep ? 0.05 : 0.4);
    it = cache.emplace(key, run_episode(reference_family(), episode(mode, th, th0), AdaptConfig{})).first;
  }
  return it->second;
}

}  // namespace

TEST_CASE("optimal mode never adapts") {
  const PolicyFamily& fam = reference_family();
  const SimConfig sim = episode(PolicyMode::kOptimal, 0.2, 0.2);
  EpisodeState s{sim.x0, init_adapt_state(fam.env(), AdaptConfig{}, sim.theta_hat0, sim.x0)};
  for (int k = 0; k < 50; ++k) {
    const StepOutput out = step(fam, sim, AdaptConfig{}, s, k * sim.dt);
    CHECK_FALSE(out.adapted);
    CHECK(out.next.adapt.theta_hat(0) == 0.2);
    CHECK(out.next.adapt.rho == 0.0);
    s = out.next;
  }
}

TEST_CASE("inelastic left wall") {
  const PolicyFamily& fam = reference_family();
  SimConfig sim = episode(PolicyMode::kOptimal, 0.2, 0.2);
  const EpisodeState s{vec2(-1.2, -0.5), init_adapt_state(fam.env(), AdaptConfig{}, sim.theta_hat0, sim.x0)};
  const StepOutput out = step(fam, sim, AdaptConfig{}, s, 0.0);
  CHECK(out.next.x(0) == -1.2);
  CHECK(out.next.x(1) == 0.0);
  CHECK(out.record.boundary_hit);
}

TEST_CASE("one Euler step from the start state") {
  const EnvironmentSpec env = make_mountain_car();
  // Every node drives forward, so the policy output is exactly +1.
  const PolicyFamily fam = synthetic_family(
      env, Grid::over(env, 9), {0.05, 0.4}, [](const StateVec&, double) { return 1.0; },
      [](const StateVec&, double) { return 2; });
  const SimConfig sim = episode(PolicyMode::kStatic, 0.4, 0.05);
  const EpisodeState s{sim.x0, init_adapt_state(env, AdaptConfig{}, sim.theta_hat0, sim.x0)};
  const StepOutput out = step(fam, sim, AdaptConfig{}, s, 0.0);
  CHECK(out.record.u(0) == 1.0);
  CHECK(out.next.x(0) == -0.5);
  CHECK(out.next.x(1) == doctest::Approx(7.17051193329188e-5).epsilon(1e-13));
  CHECK(out.next.x(1) == doctest::Approx((0.1 - 0.4 * std::cos(-1.5)) * 0.001).epsilon(1e-15));
}

TEST_CASE("degenerate horizon and empty log") {
  SimConfig sim = episode(PolicyMode::kComposite, 0.05, 0.4);
  sim.horizon = 0.0;
  const TrajectoryLog log = run_episode(reference_family(), sim, AdaptConfig{});
  CHECK(log.rows.empty());
  const ClosedLoopCost c = closed_loop_cost(log);
  CHECK(c.value == 0.0);
  CHECK(closed_loop_cost(TrajectoryLog{}).value == 0.0);
}

TEST_CASE("optimal flat run reaches the goal") {
  const TrajectoryLog& log = reference_run(PolicyMode::kOptimal, false);
  CHECK(log.reached);
  CHECK_FALSE(closed_loop_cost(log).divergent);
  CHECK(std::isfinite(closed_loop_cost(log).value));
}

TEST_CASE("flat static policy on the steep mountain diverges") {
  const TrajectoryLog log =
      run_episode(reference_family(), episode(PolicyMode::kStatic, 0.4, 0.05), AdaptConfig{});
  CHECK_FALSE(log.reached);
  const ClosedLoopCost c = closed_loop_cost(log);
  CHECK(c.divergent);
  CHECK(c.value > 0.0);
  CHECK(log.rows.back().t == doctest::Approx(60.0));
}

TEST_CASE("pinned reference costs") {
  // Values from the reference run on the default configuration.
  CHECK(closed_loop_cost(reference_run(PolicyMode::kComposite, false)).value ==
        doctest::Approx(5.0132817723728325).epsilon(1e-6));
  CHECK(closed_loop_cost(reference_run(PolicyMode::kDirect, true)).value ==
        doctest::Approx(33.240151264301261).epsilon(1e-6));
}

TEST_CASE("trajectory invariants on the learning runs") {
  for (PolicyMode mode : {PolicyMode::kDirect, PolicyMode::kComposite}) {
    for (bool steep : {false, true}) {
      CAPTURE(to_string(mode));
      CAPTURE(steep);
      const TrajectoryLog& log = reference_run(mode, steep);
      REQUIRE(log.reached);
      CHECK_FALSE(log.failed);
      CHECK(log.rho_clamp_hits == 0);
      double prev_cost = 0.0;
      for (std::size_t k = 0; k < log.rows.size(); ++k) {
        const LogRow& r = log.rows[k];
        CHECK(r.t == doctest::Approx(k * 0.001).epsilon(1e-12));
        CHECK((r.x(0) >= -1.2 && r.x(0) <= 0.5 + 1e-2));
        CHECK((r.x(1) >= -1.0 && r.x(1) <= 1.0));
        CHECK(r.running_cost >= prev_cost);
        CHECK(r.upsilon > 0.1);
        prev_cost = r.running_cost;
        // Goal latching: only the terminal row sits at or past the goal.
        if (k + 1 < log.rows.size()) CHECK(r.x(0) < 0.5);
      }
      CHECK(log.rows.back().x(0) >= 0.5);
      CHECK(prev_cost <= 60.0);
    }
  }
}

TEST_CASE("episodes are deterministic") {
  const SimConfig sim = episode(PolicyMode::kComposite, 0.4, 0.05);
  const TrajectoryLog a = run_episode(reference_family(), sim, AdaptConfig{});
  const TrajectoryLog& b = reference_run(PolicyMode::kComposite, true);
  REQUIRE(a.rows.size() == b.rows.size());
  std::ostringstream sa, sb;
  write_csv(sa, a, std::nullopt);
  write_csv(sb, b, std::nullopt);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("lyapunov trace") {
  const PolicyFamily& fam = reference_family();
  SUBCASE("starts at V + eta when the estimate is exact") {
    SimConfig sim = episode(PolicyMode::kDirect, 0.2, 0.2);
    sim.horizon = 0.01;
    const TrajectoryLog log = run_episode(fam, sim, AdaptConfig{});
    const LyapunovTrace tr = lyapunov_trace(log, sim.theta_true, AdaptConfig{});
    CHECK(tr.values.front() == doctest::Approx(value_at(fam, sim.theta_true, sim.x0) + 100.0).epsilon(1e-14));
    CHECK_FALSE(tr.shifted);
  }
  SUBCASE("static logs are rejected") {
    TrajectoryLog log;
    log.mode = PolicyMode::kStatic;
    CHECK_THROWS_AS(lyapunov_trace(log, scalar_vec(0.2), AdaptConfig{}), ContractViolation);
  }
  SUBCASE("shifted when the true parameter is on a barrier face") {
    AdaptConfig acfg;
    acfg.potential = BregmanPotential::log_barrier(fam.env().param_domain);
    SimConfig sim = episode(PolicyMode::kDirect, 0.4, 0.2);
    sim.horizon = 0.01;
    const TrajectoryLog log = run_episode(fam, sim, acfg);
    CHECK(lyapunov_trace(log, sim.theta_true, acfg).shifted);
  }
}

TEST_CASE("learning modes require an interior initial estimate") {
  AdaptConfig acfg;
  acfg.potential = BregmanPotential::log_barrier(reference_family().env().param_domain);
  CHECK_THROWS_AS(run_episode(reference_family(), episode(PolicyMode::kComposite, 0.05, 0.4), acfg),
                  ContractViolation);
}

TEST_CASE("CSV round trip") {
  const TrajectoryLog& log = reference_run(PolicyMode::kComposite, false);
  std::stringstream ss;
  write_csv(ss, log, lyapunov_trace(log, scalar_vec(0.05), AdaptConfig{}));
  std::string header;
  std::getline(ss, header);
  CHECK(header == csv_header(2, 1, 1));
  CHECK(header == "t,x0,x1,u0,theta_hat0,rho,upsilon,stage_cost,aug_cost,running_cost,value,lyapunov,eps0,eps1,"
                  "low_confidence,boundary_hit,guard_hit");
  ss.seekg(0);
  const TrajectoryLog back = read_csv(ss, log.mode, log.dt, log.reached);
  REQUIRE(back.rows.size() == log.rows.size());
  for (std::size_t k = 0; k < log.rows.size(); k += 97) {
    const LogRow &a = log.rows[k], &b = back.rows[k];
    CHECK(a.t == b.t);
    CHECK(a.x == b.x);
    CHECK(a.u == b.u);
    CHECK(a.theta_hat == b.theta_hat);
    CHECK(a.rho == b.rho);
    CHECK(a.aug_cost == b.aug_cost);
    CHECK(a.value == b.value);
    CHECK(a.eps == b.eps);
    CHECK(a.guard_hit == b.guard_hit);
  }
}

TEST_CASE("policy mode names") {
  for (PolicyMode m : {PolicyMode::kStatic, PolicyMode::kDirect, PolicyMode::kComposite, PolicyMode::kOptimal}) {
    CHECK(policy_mode_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(policy_mode_from_string("greedy"), ContractViolation);
}

TEST_CASE("sim config validation") {
  const EnvironmentSpec& env = reference_family().env();
  SimConfig sim = episode(PolicyMode::kComposite, 0.2, 0.2);
  CHECK_NOTHROW(sim.validate(env));
  sim.dt = 0.0;
  CHECK_THROWS_AS(sim.validate(env), ContractViolation);
  sim = episode(PolicyMode::kComposite, 0.9, 0.2);
  CHECK_THROWS_AS(sim.validate(env), ContractViolation);
}

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
#include <numbers>
#include <random>

#include "ceadapt/model.hpp"

using namespace ceadapt;

namespace {

const EnvironmentSpec& car() {
  static const EnvironmentSpec env = make_mountain_car();
  return env;
}

void check_vec(const StateVec& got, double a, double b, double tol = 1e-15) {
  REQUIRE(got.size() == 2);
  CHECK(got(0) == doctest::Approx(a).epsilon(tol));
  CHECK(got(1) == doctest::Approx(b).epsilon(tol));
}

}  // namespace

TEST_CASE("known dynamics of the mountain car") {
  check_vec(eval_known_dynamics(car(), vec2(0.0, 0.3), scalar_vec(1.0)), 0.3, 0.1);
  check_vec(eval_known_dynamics(car(), vec2(0.0, 0.0), scalar_vec(0.0)), 0.0, 0.0);
  check_vec(eval_known_dynamics(car(), vec2(-0.5, -0.2), scalar_vec(-1.0)), -0.2, -0.1);
}

TEST_CASE("dimension mismatch is a contract violation") {
  CHECK_THROWS_AS(eval_known_dynamics(car(), scalar_vec(0.0), scalar_vec(1.0)), ContractViolation);
  CHECK_THROWS_AS(eval_known_dynamics(car(), vec2(0.0, 0.0), vec2(1.0, 0.0)), ContractViolation);
  CHECK_THROWS_AS(eval_basis(car(), StateVec::Zero(3)), ContractViolation);
  CHECK_THROWS_AS(eval_dynamics(car(), vec2(0.0, 0.0), scalar_vec(1.0), vec2(0.1, 0.2)), ContractViolation);
}

TEST_CASE("basis") {
  const BasisMat d0 = eval_basis(car(), vec2(0.0, 0.0));
  CHECK(d0.rows() == 1);
  CHECK(d0.cols() == 2);
  CHECK(d0(0, 0) == 0.0);
  CHECK(d0(0, 1) == 1.0);
  CHECK(std::abs(eval_basis(car(), vec2(std::numbers::pi / 6.0, 0.0))(0, 1)) < 1e-15);
  // cos(-3.6)
  CHECK(eval_basis(car(), vec2(-1.2, 0.0))(0, 1) == doctest::Approx(-0.896758416334147).epsilon(1e-14));
}

TEST_CASE("full dynamics") {
  check_vec(eval_dynamics(car(), vec2(0.0, 0.0), scalar_vec(1.0), scalar_vec(0.4)), 0.0, -0.3);
  check_vec(eval_dynamics(car(), vec2(0.0, 0.5), scalar_vec(0.0), scalar_vec(0.05)), 0.5, -0.05);
  const StateVec x = vec2(-0.7, 0.2);
  const ControlVec u = scalar_vec(-1.0);
  CHECK((eval_dynamics(car(), x, u, scalar_vec(0.0)) - eval_known_dynamics(car(), x, u)).norm() == 0.0);
  // θ outside the box is allowed.
  CHECK_NOTHROW(eval_dynamics(car(), x, u, scalar_vec(3.0)));
}

TEST_CASE("stage cost") {
  const ControlVec u = scalar_vec(0.0);
  CHECK(stage_cost(car(), vec2(0.5, 0.3), u) == 0.0);
  CHECK(stage_cost(car(), vec2(0.4, 0.0), u) == doctest::Approx(0.981684361111266).epsilon(1e-13));
  CHECK(stage_cost(car(), vec2(0.475, 0.0), u) == doctest::Approx(0.632120558828558).epsilon(1e-13));
}

TEST_CASE("stage cost is nonnegative and zero only at the goal position") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> p(-1.2, 0.5), v(-1.0, 1.0), u(-1.0, 1.0);
  for (int i = 0; i < 20000; ++i) {
    const StateVec x = vec2(p(rng), v(rng));
    const double c = stage_cost(car(), x, scalar_vec(u(rng)));
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
    if (x(0) != 0.5) CHECK(c > 0.0);
    CHECK(augmented_stage_cost(car(), x, scalar_vec(0.0)) >= c);
  }
}

TEST_CASE("hinge penalty") {
  const ControlVec u = scalar_vec(0.0);
  SUBCASE("deep interior equals stage cost") {
    const StateVec x = vec2(-0.5, 0.1);
    CHECK(augmented_stage_cost(car(), x, u) == stage_cost(car(), x, u));
  }
  SUBCASE("on the velocity bound with margin 0.1") {
    MountainCarOptions opts;
    opts.penalty.margin = 0.1;
    opts.penalty.weight = 7.0;
    const EnvironmentSpec env = make_mountain_car(opts);
    const StateVec x = vec2(-0.5, 1.0);
    CHECK(augmented_stage_cost(env, x, u) == doctest::Approx(stage_cost(env, x, u) + 7.0 * 0.1).epsilon(1e-14));
  }
  SUBCASE("goal bound carries no penalty") {
    CHECK(constraint_penalty(car(), vec2(0.5, 0.0)) == 0.0);
    CHECK(augmented_stage_cost(car(), vec2(0.5, 0.0), u) == 0.0);
  }
  SUBCASE("exterior grows with the configured slope") {
    const double at_bound = constraint_penalty(car(), vec2(-0.5, 1.0));
    CHECK(constraint_penalty(car(), vec2(-0.5, 1.2)) == doctest::Approx(at_bound + 10.0 * 0.2).epsilon(1e-12));
  }
  SUBCASE("penalty disabled") {
    MountainCarOptions opts;
    opts.constraint_penalty = false;
    const EnvironmentSpec env = make_mountain_car(opts);
    CHECK(constraint_penalty(env, vec2(-1.2, 1.0)) == 0.0);
  }
}

TEST_CASE("dynamics are affine in theta") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> p(-1.2, 0.5), v(-1.0, 1.0), th(-1.0, 1.0), a(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const StateVec x = vec2(p(rng), v(rng));
    const ControlVec u = scalar_vec(std::round(2.0 * a(rng)) - 1.0);
    const ParamVec t1 = scalar_vec(th(rng)), t2 = scalar_vec(th(rng));
    const double w = a(rng);
    const StateVec lhs = eval_dynamics(car(), x, u, w * t1 + (1.0 - w) * t2);
    const StateVec rhs = w * eval_dynamics(car(), x, u, t1) + (1.0 - w) * eval_dynamics(car(), x, u, t2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("basis is a pure function") {
  const StateVec x = vec2(-0.8312, 0.25);
  const BasisMat a = eval_basis(car(), x);
  const BasisMat b = eval_basis(car(), x);
  CHECK(a == b);
}

TEST_CASE("boundary rule") {
  StateVec x = vec2(-1.25, -0.3);
  car().apply_boundary(x);
  CHECK(x(0) == -1.2);
  CHECK(x(1) == 0.0);
  x = vec2(0.0, 1.5);
  car().apply_boundary(x);
  CHECK(x(1) == 1.0);
}

TEST_CASE("environment validation") {
  EnvironmentSpec env = make_mountain_car();
  env.action_set.clear();
  CHECK_THROWS_AS(env.validate(), ContractViolation);
  env = make_mountain_car();
  env.basis = nullptr;
  CHECK_THROWS_AS(env.validate(), ContractViolation);
}

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

#include <random>

#include "ceadapt/grid.hpp"

using namespace ceadapt;

namespace {

Grid unit_square(int nodes) { return Grid({{0.0, 1.0, nodes}, {0.0, 1.0, nodes}}); }

}  // namespace

TEST_CASE("flat and multi indices round-trip with axis 0 fastest") {
  const Grid g({{-1.0, 1.0, 4}, {0.0, 2.0, 3}});
  CHECK(g.size() == 12);
  CHECK(g.stride(0) == 1);
  CHECK(g.stride(1) == 4);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::vector<int> mi = g.multi_index(i);
    CHECK(g.flat_index(mi) == i);
  }
  const StateVec last = g.node_state(11);
  CHECK(last(0) == 1.0);
  CHECK(last(1) == 2.0);
}

TEST_CASE("grid over environment bounds") {
  const EnvironmentSpec env = make_mountain_car();
  const Grid g = Grid::over(env, 128);
  CHECK(g.size() == 128u * 128u);
  CHECK(g.axis(0).min == -1.2);
  CHECK(g.axis(0).max == 0.5);
  CHECK(g.axis(1).node(127) == 1.0);
}

TEST_CASE("grid rejects degenerate axes") {
  CHECK_THROWS_AS(Grid({{0.0, 1.0, 1}}), ContractViolation);
  CHECK_THROWS_AS(Grid({{1.0, 1.0, 3}}), ContractViolation);
}

TEST_CASE("bilinear interpolation") {
  const Grid g = unit_square(2);
  SUBCASE("exact at nodes") {
    const std::vector<double> v{3.0, -1.0, 2.5, 7.0};
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(bilinear_interp(g, v, g.node_state(i)) == v[i]);
  }
  SUBCASE("cell center is the corner mean") {
    const std::vector<double> v{3.0, -1.0, 2.5, 7.0};
    CHECK(bilinear_interp(g, v, vec2(0.5, 0.5)) == doctest::Approx(2.875).epsilon(1e-15));
  }
  SUBCASE("corners 0,0,1,1 along one axis at offset 0.25") {
    // Values 0 on the x=0 edge, 1 on the x=1 edge.
    const std::vector<double> v{0.0, 1.0, 0.0, 1.0};
    CHECK(bilinear_interp(g, v, vec2(0.25, 0.6)) == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("queries outside the grid are clamped") {
    const std::vector<double> v{0.0, 1.0, 0.0, 1.0};
    CHECK(bilinear_interp(g, v, vec2(4.0, 0.5)) == 1.0);
    CHECK(bilinear_interp(g, v, vec2(-4.0, 0.5)) == 0.0);
  }
  SUBCASE("NaN in the table is a solver failure") {
    const std::vector<double> v{0.0, std::nan(""), 0.0, 1.0};
    CHECK_THROWS_AS(bilinear_interp(g, v, vec2(0.5, 0.5)), SolverFailure);
  }
}

TEST_CASE("interpolation of a multilinear field is exact") {
  const Grid g({{-1.0, 2.0, 7}, {0.5, 1.5, 5}});
  auto f = [](const StateVec& x) { return 1.5 - 2.0 * x(0) + 0.75 * x(1) + 0.3 * x(0) * x(1); };
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.node_state(i));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> a(-1.0, 2.0), b(0.5, 1.5);
  for (int i = 0; i < 500; ++i) {
    const StateVec x = vec2(a(rng), b(rng));
    CHECK(bilinear_interp(g, v, x) == doctest::Approx(f(x)).epsilon(1e-12));
  }
}

TEST_CASE("interpolant gradient") {
  const Grid g({{0.0, 2.0, 9}, {-1.0, 1.0, 5}});
  SUBCASE("constant table gives zero") {
    const std::vector<double> v(g.size(), 4.2);
    CHECK(interp_gradient(g, v, vec2(0.37, 0.2)).norm() == 0.0);
  }
  SUBCASE("linear field along one axis") {
    const double s = -3.25;
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = s * g.node_state(i)(1) + 1.0;
    for (const StateVec& x : {vec2(0.37, 0.2), vec2(0.5, 0.5), vec2(2.0, -1.0), vec2(0.0, 0.77)}) {
      const StateVec grad = interp_gradient(g, v, x);
      CHECK(std::abs(grad(1) - s) <= 1e-9);
      CHECK(std::abs(grad(0)) <= 1e-9);
    }
  }
  SUBCASE("interior node averages the adjacent slopes") {
    std::vector<double> v(g.size(), 0.0);
    // V = |x0 - 1| along axis 0: slopes −1 and +1 meet at the node x0 = 1.
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = std::abs(g.node_state(i)(0) - 1.0);
    CHECK(interp_gradient(g, v, vec2(1.0, 0.1))(0) == doctest::Approx(0.0));
    CHECK(interp_gradient(g, v, vec2(1.1, 0.1))(0) == doctest::Approx(1.0));
  }
}

TEST_CASE("stencil weights sum to one and reproduce interpolation") {
  const Grid g({{0.0, 1.0, 6}, {0.0, 3.0, 4}});
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = std::sin(static_cast<double>(i));
  const StateVec x = vec2(0.33, 1.7);
  const Stencil st = make_stencil(g, x);
  double w = 0.0, acc = 0.0;
  for (std::size_t k = 0; k < st.nodes.size(); ++k) {
    w += st.weights[k];
    acc += st.weights[k] * v[st.nodes[k]];
  }
  CHECK(w == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(acc == doctest::Approx(bilinear_interp(g, v, x)).epsilon(1e-14));
}

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

#include "ceadapt/grid.hpp"

#include <algorithm>
#include <cmath>

namespace ceadapt {

namespace {
constexpr double kSnap = 1e-9;
}

Grid::Grid(std::vector<GridAxis> axes) : axes_(std::move(axes)) {
  require(!axes_.empty(), "Grid: needs at least one axis");
  strides_.resize(axes_.size());
  size_ = 1;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    require(axes_[a].node_count >= 2, "Grid: node_count must be >= 2 on every axis");
    require(axes_[a].min < axes_[a].max, "Grid: axis min must be < max");
    strides_[a] = size_;
    size_ *= static_cast<std::size_t>(axes_[a].node_count);
  }
}

Grid Grid::over(const EnvironmentSpec& env, int nodes_per_axis) {
  std::vector<GridAxis> axes;
  for (const auto& b : env.state_bounds) axes.push_back({b.min, b.max, nodes_per_axis});
  return Grid(std::move(axes));
}

std::vector<int> Grid::multi_index(std::size_t flat) const {
  std::vector<int> idx(axes_.size());
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    idx[a] = static_cast<int>(flat % axes_[a].node_count);
    flat /= axes_[a].node_count;
  }
  return idx;
}

std::size_t Grid::flat_index(std::span<const int> idx) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) flat += strides_[a] * idx[a];
  return flat;
}

StateVec Grid::node_state(std::size_t flat) const {
  StateVec x(dims());
  const auto idx = multi_index(flat);
  for (int a = 0; a < dims(); ++a) x(a) = axes_[a].node(idx[a]);
  return x;
}

StateVec Grid::clamp(const StateVec& x) const {
  require(x.size() == dims(), "Grid::clamp: dimension mismatch");
  StateVec out = x;
  for (int a = 0; a < dims(); ++a) out(a) = std::clamp(out(a), axes_[a].min, axes_[a].max);
  return out;
}

bool Grid::operator==(const Grid& other) const {
  if (axes_.size() != other.axes_.size()) return false;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    if (axes_[a].min != other.axes_[a].min || axes_[a].max != other.axes_[a].max ||
        axes_[a].node_count != other.axes_[a].node_count) {
      return false;
    }
  }
  return true;
}

CellLocation locate(const Grid& grid, const StateVec& x) {
  require(x.size() == grid.dims(), "locate: state dimension does not match grid");
  CellLocation loc;
  const int n = grid.dims();
  loc.lower.resize(n);
  loc.frac.resize(n);
  loc.on_interior_node.resize(n);
  for (int a = 0; a < n; ++a) {
    const GridAxis& ax = grid.axis(a);
    const double xc = std::clamp(x(a), ax.min, ax.max);
    double u = (xc - ax.min) / ax.spacing();
    const double r = std::round(u);
    const bool snapped = std::abs(u - r) < kSnap;
    if (snapped) u = r;
    int i = static_cast<int>(std::floor(u));
    i = std::clamp(i, 0, ax.node_count - 2);
    loc.lower[a] = i;
    loc.frac[a] = std::clamp(u - i, 0.0, 1.0);
    loc.on_interior_node[a] = snapped && r > 0.0 && r < ax.node_count - 1;
  }
  return loc;
}

Stencil make_stencil(const Grid& grid, const StateVec& x) {
  const CellLocation loc = locate(grid, x);
  const int n = grid.dims();
  const std::size_t corners = std::size_t{1} << n;
  Stencil s;
  s.nodes.resize(corners);
  s.weights.resize(corners);
  for (std::size_t c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t node = 0;
    for (int a = 0; a < n; ++a) {
      const bool upper = (c >> a) & 1U;
      w *= upper ? loc.frac[a] : 1.0 - loc.frac[a];
      node += grid.stride(a) * static_cast<std::size_t>(loc.lower[a] + (upper ? 1 : 0));
    }
    s.nodes[c] = node;
    s.weights[c] = w;
  }
  return s;
}

double bilinear_interp(const Grid& grid, std::span<const double> values, const StateVec& x) {
  require(values.size() == grid.size(), "bilinear_interp: table size does not match grid");
  const Stencil s = make_stencil(grid, x);
  double out = 0.0;
  for (std::size_t c = 0; c < s.nodes.size(); ++c) out += s.weights[c] * values[s.nodes[c]];
  if (std::isnan(out)) throw SolverFailure("bilinear_interp: NaN in value table");
  return out;
}

namespace {

// Interpolated value on the hyperplane where axis `a` sits at node `j`.
double slice_value(const Grid& grid, std::span<const double> values, const CellLocation& loc, int a,
                   int j) {
  const int n = grid.dims();
  const std::size_t corners = std::size_t{1} << n;
  double out = 0.0;
  for (std::size_t c = 0; c < corners; ++c) {
    if ((c >> a) & 1U) continue;
    double w = 1.0;
    std::size_t node = grid.stride(a) * static_cast<std::size_t>(j);
    for (int b = 0; b < n; ++b) {
      if (b == a) continue;
      const bool upper = (c >> b) & 1U;
      w *= upper ? loc.frac[b] : 1.0 - loc.frac[b];
      node += grid.stride(b) * static_cast<std::size_t>(loc.lower[b] + (upper ? 1 : 0));
    }
    out += w * values[node];
  }
  return out;
}

}  // namespace

StateVec interp_gradient(const Grid& grid, std::span<const double> values, const StateVec& x) {
  require(values.size() == grid.size(), "interp_gradient: table size does not match grid");
  const CellLocation loc = locate(grid, x);
  StateVec g(grid.dims());
  for (int a = 0; a < grid.dims(); ++a) {
    const double h = grid.axis(a).spacing();
    const int i = loc.lower[a];
    auto slope = [&](int cell) {
      return (slice_value(grid, values, loc, a, cell + 1) - slice_value(grid, values, loc, a, cell)) /
             h;
    };
    g(a) = loc.on_interior_node[a] ? 0.5 * (slope(i - 1) + slope(i)) : slope(i);
  }
  if (g.hasNaN()) throw SolverFailure("interp_gradient: NaN in value table");
  return g;
}

}  // namespace ceadapt

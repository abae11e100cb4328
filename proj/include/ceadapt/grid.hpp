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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ceadapt/model.hpp"

namespace ceadapt {

struct GridAxis {
  double min = 0.0;
  double max = 1.0;
  int node_count = 2;

  double spacing() const { return (max - min) / (node_count - 1); }
  double node(int i) const { return i == node_count - 1 ? max : min + i * spacing(); }
};

/// Uniform rectangular grid. Node indices are flattened with axis 0 varying fastest.
class Grid {
 public:
  Grid() = default;
  explicit Grid(std::vector<GridAxis> axes);

  /// Grid over the environment's state bounds with `nodes_per_axis` nodes on every axis.
  static Grid over(const EnvironmentSpec& env, int nodes_per_axis);

  int dims() const { return static_cast<int>(axes_.size()); }
  const GridAxis& axis(int a) const { return axes_[a]; }
  const std::vector<GridAxis>& axes() const { return axes_; }
  std::size_t size() const { return size_; }
  std::size_t stride(int a) const { return strides_[a]; }

  std::vector<int> multi_index(std::size_t flat) const;
  std::size_t flat_index(std::span<const int> idx) const;
  StateVec node_state(std::size_t flat) const;
  StateVec clamp(const StateVec& x) const;

  bool operator==(const Grid& other) const;

 private:
  std::vector<GridAxis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

/// Containing cell of a query: lower-corner index and fractional offset per axis.
/// Offsets within 1e-9 of a node are snapped so node queries are exact.
struct CellLocation {
  std::vector<int> lower;
  std::vector<double> frac;
  /// True where the query sits on an interior node of that axis.
  std::vector<bool> on_interior_node;
};

CellLocation locate(const Grid& grid, const StateVec& x);

/// Multilinear interpolation of node values over the containing cell; x is clamped
/// to the grid. A NaN reaching the result raises SolverFailure.
double bilinear_interp(const Grid& grid, std::span<const double> values, const StateVec& x);

/// Gradient of the multilinear interpolant. Inside a cell this is the exact slope;
/// on an interior node of an axis it is the mean of the two adjacent one-sided slopes;
/// on the grid boundary it is the boundary cell's slope.
StateVec interp_gradient(const Grid& grid, std::span<const double> values, const StateVec& x);

/// Precomputed interpolation stencil (2^n corners) for one query point.
struct Stencil {
  std::vector<std::size_t> nodes;
  std::vector<double> weights;
};

Stencil make_stencil(const Grid& grid, const StateVec& x);

}  // namespace ceadapt

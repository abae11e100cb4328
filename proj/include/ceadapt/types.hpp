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

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ceadapt {

using StateVec = Eigen::VectorXd;
using ControlVec = Eigen::VectorXd;
using ParamVec = Eigen::VectorXd;
/// Basis matrix Δ(x), shape p × n.
using BasisMat = Eigen::MatrixXd;

/// Raised when a caller breaks an operation's precondition (dimensions, empty inputs).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Argument outside the domain of a potential or a parameter box.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical failure inside the solver or a query on solver output (NaN, divergence).
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed box realization of the parameter set. A zero-width axis collapses it to a point.
struct ParamDomain {
  ParamVec lower;
  ParamVec upper;

  ParamDomain() = default;
  ParamDomain(ParamVec lo, ParamVec hi);

  Eigen::Index size() const { return lower.size(); }
  ParamVec width() const { return upper - lower; }
  ParamVec center() const { return 0.5 * (lower + upper); }
  bool contains(const ParamVec& theta) const;
  bool contains_strictly(const ParamVec& theta) const;
  ParamVec project(const ParamVec& theta) const;
};

inline ParamVec scalar_vec(double v) {
  ParamVec out(1);
  out(0) = v;
  return out;
}

inline StateVec vec2(double a, double b) {
  StateVec out(2);
  out << a, b;
  return out;
}

void require(bool cond, const std::string& what);

}  // namespace ceadapt

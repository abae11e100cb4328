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

#include "ceadapt/types.hpp"

namespace ceadapt {

void require(bool cond, const std::string& what) {
  if (!cond) throw ContractViolation(what);
}

ParamDomain::ParamDomain(ParamVec lo, ParamVec hi) : lower(std::move(lo)), upper(std::move(hi)) {
  require(lower.size() == upper.size() && lower.size() > 0, "ParamDomain: bound dimensions differ");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    require(lower(i) <= upper(i), "ParamDomain: lower must be <= upper componentwise");
  }
}

bool ParamDomain::contains(const ParamVec& theta) const {
  if (theta.size() != lower.size()) return false;
  return ((theta - lower).array() >= 0.0).all() && ((upper - theta).array() >= 0.0).all();
}

bool ParamDomain::contains_strictly(const ParamVec& theta) const {
  if (theta.size() != lower.size()) return false;
  return ((theta - lower).array() > 0.0).all() && ((upper - theta).array() > 0.0).all();
}

ParamVec ParamDomain::project(const ParamVec& theta) const {
  require(theta.size() == lower.size(), "ParamDomain::project: dimension mismatch");
  return theta.cwiseMax(lower).cwiseMin(upper);
}

}  // namespace ceadapt

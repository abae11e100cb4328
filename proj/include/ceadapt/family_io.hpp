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

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ceadapt/value_family.hpp"

namespace ceadapt {

/// Thrown when a family directory is missing, malformed, or fails its hash checks.
class FamilyIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kManifestSchema = "ceadapt.family/1";
inline constexpr const char* kManifestName = "manifest.json";

/// Data-only description of an environment (no callbacks). Two environments with the
/// same descriptor are interchangeable for a stored family.
nlohmann::json environment_descriptor(const EnvironmentSpec& env);
nlohmann::json solver_config_json(const SolverConfig& cfg);
nlohmann::json smoothing_json(const SmoothingConfig& cfg);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Binary encoding of one sample (value table, absorbing mask, policy, sweep history).
std::string encode_table(const FamilySample& s);
FamilySample decode_table(const std::string& bytes, const ParamVec& theta, const Grid& grid);

/// Manifest with per-table hashes and a content hash over everything except timings.
nlohmann::json build_manifest(const PolicyFamily& fam);
std::string content_hash(const nlohmann::json& manifest);

/// Writes tables and manifest into `dir`, which must not exist yet. The directory is
/// assembled under a temporary name and renamed into place.
void save_family(const PolicyFamily& fam, const std::filesystem::path& dir);

/// Reads a family written by save_family. Verifies the content hash, every table
/// hash, and that `env` matches the stored environment descriptor.
PolicyFamily load_family(const std::filesystem::path& dir, const EnvironmentSpec& env);

}  // namespace ceadapt

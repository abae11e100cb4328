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

#include "ceadapt/family_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>
#include <unistd.h>

#include "ceadapt/config.hpp"

namespace ceadapt {

using nlohmann::json;
namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "table files are little-endian");

namespace {

constexpr char kTableMagic[8] = {'C', 'E', 'A', 'T', 'B', 'L', '0', '1'};

class Writer {
 public:
  template <class T>
  void put(const T& v) {
    buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  template <class T>
  void put_array(const T* data, std::size_t count) {
    buf_.append(reinterpret_cast<const char*>(data), count * sizeof(T));
  }
  void put_raw(const char* data, std::size_t count) { buf_.append(data, count); }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}
  template <class T>
  T get() {
    T v;
    take(&v, sizeof(T));
    return v;
  }
  template <class T>
  void get_array(T* out, std::size_t count) {
    take(out, count * sizeof(T));
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void take(void* out, std::size_t n) {
    if (bytes_.size() - pos_ < n) throw FamilyIoError("table file is truncated");
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json grid_json(const Grid& g) {
  json axes = json::array();
  for (const GridAxis& a : g.axes()) axes.push_back({{"min", a.min}, {"max", a.max}, {"node_count", a.node_count}});
  return {{"axes", axes}};
}

Grid grid_from_json(const json& j) {
  std::vector<GridAxis> axes;
  for (const json& a : j.at("axes")) {
    axes.push_back({a.at("min").get<double>(), a.at("max").get<double>(), a.at("node_count").get<int>()});
  }
  return Grid(std::move(axes));
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FamilyIoError("cannot read '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FamilyIoError("cannot write '" + p.string() + "'");
}

std::string table_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "table_%03zu.bin", i);
  return buf;
}

// Solver settings that do not influence the result are left out of the stored record.
json stored_solver_json(const SolverConfig& cfg) {
  json j = to_json(cfg);
  j.erase("threads");
  return j;
}

}  // namespace

json environment_descriptor(const EnvironmentSpec& env) {
  json bounds = json::array();
  for (const AxisBounds& b : env.state_bounds) bounds.push_back({b.min, b.max});
  json cbounds = json::array();
  for (const AxisBounds& b : env.control_bounds) cbounds.push_back({b.min, b.max});
  json actions = json::array();
  for (const ControlVec& u : env.action_set) actions.push_back(vec_json(u));
  json j = {{"name", env.name},
            {"n", env.n},
            {"m", env.m},
            {"p", env.p},
            {"goal_state", vec_json(env.goal_state)},
            {"state_bounds", bounds},
            {"control_bounds", cbounds},
            {"action_set", actions},
            {"null_action", env.null_action},
            {"param_lower", vec_json(env.param_domain.lower)},
            {"param_upper", vec_json(env.param_domain.upper)},
            {"constants", env.constants}};
  if (env.penalty) {
    const ConstraintPenalty& p = *env.penalty;
    j["penalty"] = {{"weight", p.weight},
                    {"margin", p.margin},
                    {"exterior_slope", p.exterior_slope},
                    {"penalize_lower", p.penalize_lower},
                    {"penalize_upper", p.penalize_upper}};
  } else {
    j["penalty"] = nullptr;
  }
  return j;
}

json solver_config_json(const SolverConfig& cfg) { return to_json(cfg); }
json smoothing_json(const SmoothingConfig& cfg) { return to_json(cfg); }

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw FamilyIoError("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

std::string encode_table(const FamilySample& s) {
  const Grid& g = s.value.grid;
  const std::size_t n = g.size();
  require(s.value.values.size() == n && s.value.absorbing.size() == n && s.policy.actions.size() == n,
          "encode_table: table sizes do not match the grid");
  Writer w;
  w.put_raw(kTableMagic, sizeof kTableMagic);
  w.put(static_cast<std::uint32_t>(g.dims()));
  for (const GridAxis& a : g.axes()) w.put(static_cast<std::uint32_t>(a.node_count));
  w.put(static_cast<std::uint64_t>(n));
  w.put_array(s.value.values.data(), n);
  w.put_array(s.value.absorbing.data(), n);
  for (int a : s.policy.actions) w.put(static_cast<std::int32_t>(a));
  w.put(static_cast<std::uint8_t>(s.stats.converged ? 1 : 0));
  w.put(static_cast<std::uint32_t>(s.stats.sweeps));
  w.put(s.stats.residual);
  w.put(static_cast<std::uint64_t>(s.stats.sweep_deltas.size()));
  w.put_array(s.stats.sweep_deltas.data(), s.stats.sweep_deltas.size());
  return w.take();
}

FamilySample decode_table(const std::string& bytes, const ParamVec& theta, const Grid& grid) {
  Reader r(bytes);
  char magic[sizeof kTableMagic];
  r.get_array(magic, sizeof magic);
  if (std::memcmp(magic, kTableMagic, sizeof magic) != 0) throw FamilyIoError("not a table file (bad magic)");
  const auto dims = r.get<std::uint32_t>();
  if (static_cast<int>(dims) != grid.dims()) throw FamilyIoError("table dimension does not match the manifest grid");
  for (int a = 0; a < grid.dims(); ++a) {
    if (static_cast<int>(r.get<std::uint32_t>()) != grid.axis(a).node_count) {
      throw FamilyIoError("table node counts do not match the manifest grid");
    }
  }
  const auto n = r.get<std::uint64_t>();
  if (n != grid.size()) throw FamilyIoError("table node total does not match the manifest grid");
  FamilySample s;
  s.theta = theta;
  s.value.grid = grid;
  s.policy.grid = grid;
  s.value.values.resize(n);
  s.value.absorbing.resize(n);
  s.policy.actions.resize(n);
  r.get_array(s.value.values.data(), n);
  r.get_array(s.value.absorbing.data(), n);
  for (std::size_t i = 0; i < n; ++i) s.policy.actions[i] = r.get<std::int32_t>();
  s.stats.converged = r.get<std::uint8_t>() != 0;
  s.stats.sweeps = static_cast<int>(r.get<std::uint32_t>());
  s.stats.residual = r.get<double>();
  s.stats.sweep_deltas.resize(r.get<std::uint64_t>());
  r.get_array(s.stats.sweep_deltas.data(), s.stats.sweep_deltas.size());
  if (!r.done()) throw FamilyIoError("trailing bytes after table data");
  return s;
}

json build_manifest(const PolicyFamily& fam) {
  json m;
  m["schema"] = kManifestSchema;
  m["environment"] = environment_descriptor(fam.env());
  m["grid"] = grid_json(fam.grid());
  m["solver"] = stored_solver_json(fam.solver_config());
  m["smoothing"] = to_json(fam.smoothing());
  json samples = json::array();
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const FamilySample& s = fam.sample(i);
    samples.push_back({{"theta", vec_json(s.theta)},
                       {"file", table_name(i)},
                       {"sha256", sha256_hex(encode_table(s))},
                       {"converged", s.stats.converged},
                       {"sweeps", s.stats.sweeps},
                       {"residual", s.stats.residual},
                       {"seconds", s.stats.seconds}});
  }
  m["samples"] = samples;
  m["content_hash"] = content_hash(m);
  return m;
}

std::string content_hash(const json& manifest) {
  json m = manifest;
  m.erase("content_hash");
  if (m.contains("samples")) {
    for (json& s : m["samples"]) s.erase("seconds");
  }
  return sha256_hex(m.dump());
}

void save_family(const PolicyFamily& fam, const fs::path& dir) {
  if (fs::exists(dir)) throw FamilyIoError("refusing to overwrite existing path '" + dir.string() + "'");
  const fs::path parent = dir.has_parent_path() ? dir.parent_path() : fs::path(".");
  fs::create_directories(parent);
  const fs::path tmp = parent / ("." + dir.filename().string() + ".tmp" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  fs::create_directory(tmp);
  try {
    for (std::size_t i = 0; i < fam.size(); ++i) write_file(tmp / table_name(i), encode_table(fam.sample(i)));
    write_file(tmp / kManifestName, build_manifest(fam).dump(2) + "\n");
    fs::rename(tmp, dir);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    throw;
  }
}

PolicyFamily load_family(const fs::path& dir, const EnvironmentSpec& env) {
  const fs::path mpath = dir / kManifestName;
  if (!fs::exists(mpath)) throw FamilyIoError("no family manifest at '" + mpath.string() + "'");
  json m;
  try {
    m = json::parse(read_file(mpath));
  } catch (const json::exception& e) {
    throw FamilyIoError("manifest is not valid JSON: " + std::string(e.what()));
  }
  try {
    if (m.at("schema").get<std::string>() != kManifestSchema) {
      throw FamilyIoError("unsupported manifest schema '" + m.at("schema").get<std::string>() + "'");
    }
    if (content_hash(m) != m.at("content_hash").get<std::string>()) {
      throw FamilyIoError("manifest content hash mismatch (manifest was modified)");
    }
    if (m.at("environment") != environment_descriptor(env)) {
      throw FamilyIoError("family was solved for a different environment configuration");
    }
    const Grid grid = grid_from_json(m.at("grid"));
    const SolverConfig solver = solver_config_from_json(m.at("solver"), "manifest.solver");
    const SmoothingConfig smoothing = smoothing_from_json(m.at("smoothing"), "manifest.smoothing");
    std::vector<FamilySample> samples;
    for (const json& s : m.at("samples")) {
      const std::string file = s.at("file").get<std::string>();
      const std::string bytes = read_file(dir / file);
      if (sha256_hex(bytes) != s.at("sha256").get<std::string>()) {
        throw FamilyIoError("hash mismatch for table '" + file + "' (file was modified or corrupted)");
      }
      const std::vector<double> th = s.at("theta").get<std::vector<double>>();
      FamilySample fs_ = decode_table(bytes, Eigen::Map<const Eigen::VectorXd>(th.data(), th.size()), grid);
      fs_.stats.seconds = s.at("seconds").get<double>();
      samples.push_back(std::move(fs_));
    }
    return PolicyFamily(env, solver, smoothing, std::move(samples));
  } catch (const json::exception& e) {
    throw FamilyIoError("malformed manifest: " + std::string(e.what()));
  } catch (const ConfigError& e) {
    throw FamilyIoError("malformed manifest: " + std::string(e.what()));
  }
}

}  // namespace ceadapt

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

#include <fstream>
#include <sstream>

#include <unistd.h>

#include "ceadapt/family_io.hpp"

using namespace ceadapt;
namespace fs = std::filesystem;

namespace {

const PolicyFamily& small_family() {
  static const PolicyFamily fam = [] {
    const EnvironmentSpec env = make_mountain_car();
    return solve_family(env, uniform_theta_samples(env, 3), Grid::over(env, 20), SolverConfig{});
  }();
  return fam;
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("ceadapt_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

void flip_byte(const fs::path& p, std::streamoff offset) {
  std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(offset);
  char c = 0;
  f.read(&c, 1);
  c ^= 0x01;
  f.seekp(offset);
  f.write(&c, 1);
}

}  // namespace

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("table encoding round-trips bit-exactly") {
  const FamilySample& s = small_family().sample(1);
  const std::string bytes = encode_table(s);
  const FamilySample back = decode_table(bytes, s.theta, s.value.grid);
  CHECK(back.value.values == s.value.values);
  CHECK(back.value.absorbing == s.value.absorbing);
  CHECK(back.policy.actions == s.policy.actions);
  CHECK(back.stats.sweep_deltas == s.stats.sweep_deltas);
  CHECK(back.stats.sweeps == s.stats.sweeps);
  CHECK(encode_table(back) == bytes);
  CHECK_THROWS_AS(decode_table(bytes.substr(0, bytes.size() - 3), s.theta, s.value.grid), FamilyIoError);
  CHECK_THROWS_AS(decode_table(bytes + "x", s.theta, s.value.grid), FamilyIoError);
  CHECK_THROWS_AS(decode_table("NOTATABLE" + bytes, s.theta, s.value.grid), FamilyIoError);
  CHECK_THROWS_AS(decode_table(bytes, s.theta, Grid::over(small_family().env(), 21)), FamilyIoError);
}

TEST_CASE("save and load") {
  const PolicyFamily& fam = small_family();
  TempDir tmp;
  const fs::path dir = tmp.path / "family";
  save_family(fam, dir);
  CHECK(fs::exists(dir / kManifestName));
  for (std::size_t i = 0; i < fam.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "table_%03zu.bin", i);
    CHECK(fs::exists(dir / name));
  }

  SUBCASE("round trip") {
    const PolicyFamily back = load_family(dir, fam.env());
    REQUIRE(back.size() == fam.size());
    for (std::size_t i = 0; i < fam.size(); ++i) {
      CHECK(back.sample(i).theta == fam.sample(i).theta);
      CHECK(back.sample(i).value.values == fam.sample(i).value.values);
      CHECK(back.sample(i).policy.actions == fam.sample(i).policy.actions);
    }
    CHECK(back.grid() == fam.grid());
    CHECK(build_manifest(back).at("content_hash") == build_manifest(fam).at("content_hash"));
  }
  SUBCASE("existing directory is never overwritten") {
    CHECK_THROWS_AS(save_family(fam, dir), FamilyIoError);
  }
  SUBCASE("corrupted table") {
    flip_byte(dir / "table_001.bin", 100);
    try {
      (void)load_family(dir, fam.env());
      FAIL("expected FamilyIoError");
    } catch (const FamilyIoError& e) {
      CHECK(std::string(e.what()).find("table_001.bin") != std::string::npos);
    }
  }
  SUBCASE("edited manifest") {
    std::ifstream in(dir / kManifestName);
    nlohmann::json m = nlohmann::json::parse(in);
    in.close();
    m["solver"]["sweep_tolerance"] = 1e-3;
    std::ofstream(dir / kManifestName) << m.dump(2);
    CHECK_THROWS_WITH_AS(load_family(dir, fam.env()), doctest::Contains("content hash"), FamilyIoError);
  }
  SUBCASE("different environment") {
    MountainCarOptions opts;
    opts.cost_sharpness = 20.0;
    CHECK_THROWS_WITH_AS(load_family(dir, make_mountain_car(opts)), doctest::Contains("different environment"),
                         FamilyIoError);
  }
  SUBCASE("missing manifest") {
    CHECK_THROWS_AS(load_family(tmp.path / "nowhere", fam.env()), FamilyIoError);
  }
}

TEST_CASE("content hash is reproducible and ignores timings") {
  const EnvironmentSpec env = make_mountain_car();
  const PolicyFamily again = solve_family(env, uniform_theta_samples(env, 3), Grid::over(env, 20), SolverConfig{});
  const nlohmann::json a = build_manifest(small_family());
  const nlohmann::json b = build_manifest(again);
  CHECK(a.at("content_hash") == b.at("content_hash"));
  nlohmann::json c = a;
  c["samples"][0]["seconds"] = 1234.0;
  CHECK(content_hash(c) == a.at("content_hash").get<std::string>());
  c["samples"][0]["residual"] = 1.0;
  CHECK(content_hash(c) != a.at("content_hash").get<std::string>());
  CHECK(a.at("schema") == kManifestSchema);
  CHECK_FALSE(a.at("solver").contains("threads"));
}

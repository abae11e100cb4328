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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args, const fs::path& cwd) {
  const fs::path log = cwd / "cli_output.txt";
  const std::string cmd =
      "cd '" + cwd.string() + "' && '" + std::string(CEADAPT_CLI_PATH) + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("ceadapt_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "small.json") << R"({
  "grid": {"nodes_per_axis": 32},
  "theta_samples": {"count": 4},
  "sim": {"horizon": 20},
  "output_dir": "out"
})";
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

}  // namespace

TEST_CASE("command line workflow") {
  Workspace ws;
  const fs::path& d = ws.dir;

  const Run defaults = cli("defaults", d);
  REQUIRE(defaults.code == 0);
  CHECK(nlohmann::json::parse(defaults.out).at("grid").at("nodes_per_axis") == 128);

  const Run solve = cli("solve --config small.json", d);
  REQUIRE(solve.code == 0);
  CHECK(solve.out.find("content hash") != std::string::npos);
  CHECK(fs::exists(d / "out/family/manifest.json"));
  CHECK(fs::exists(d / "out/family/table_003.bin"));

  SUBCASE("solve refuses to overwrite and is reproducible") {
    CHECK(cli("solve --config small.json", d).code == 2);
    REQUIRE(cli("solve --config small.json --out again --threads 1", d).code == 0);
    const auto hash = [&](const fs::path& p) {
      std::ifstream in(p);
      return nlohmann::json::parse(in).at("content_hash").get<std::string>();
    };
    CHECK(hash(d / "out/family/manifest.json") == hash(d / "again/family/manifest.json"));
  }

  SUBCASE("simulate writes the log, summary and plots") {
    const Run r = cli("simulate --config small.json --mode composite --case steep", d);
    REQUIRE(r.code == 0);
    const fs::path stem = d / "out/episodes/steep_composite";
    CHECK(fs::exists(stem.string() + ".csv"));
    CHECK(fs::exists(stem.string() + "_phase.svg"));
    CHECK(fs::exists(stem.string() + "_position.svg"));
    std::ifstream js(stem.string() + ".json");
    const nlohmann::json s = nlohmann::json::parse(js);
    CHECK(s.at("schema") == "ceadapt.episode/1");
    CHECK(s.at("mode") == "composite");
    CHECK(s.contains("cost"));
    CHECK(s.contains("reached"));
    CHECK_FALSE(s.contains("note"));
  }

  SUBCASE("nonstandard step is noted") {
    std::ofstream(d / "coarse.json") << R"({"grid": {"nodes_per_axis": 32}, "theta_samples": {"count": 4},
      "sim": {"dt": 0.01, "horizon": 20}, "output_dir": "out", "simulate": {"plots": false}})";
    const Run r = cli("simulate --config coarse.json --mode direct --case flat", d);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("note:") != std::string::npos);
    std::ifstream js(d / "out/episodes/flat_direct.json");
    CHECK(nlohmann::json::parse(js).contains("note"));
    CHECK_FALSE(fs::exists(d / "out/episodes/flat_direct_phase.svg"));
  }

  SUBCASE("verify without logs skips the trajectory checks") {
    const Run r = cli("verify --config small.json", d);
    CHECK(r.out.find("skipped") != std::string::npos);
    std::ifstream js(d / "out/verify.json");
    const nlohmann::json rep = nlohmann::json::parse(js);
    bool found = false;
    for (const auto& c : rep.at("checks")) {
      if (c.at("name") == "lyapunov_and_clf") found = c.at("skipped").get<bool>();
    }
    CHECK(found);
  }

  SUBCASE("table1 is byte-identical across runs") {
    const Run a = cli("table1 --config small.json", d);
    CHECK((a.code == 0 || a.code == 1));
    const std::string first = slurp(d / "out/table1.csv");
    CHECK(first.rfind("case,mode,cost,reached,failed,theta_hat_final\n", 0) == 0);
    const Run b = cli("table1 --config small.json --threads 3", d);
    CHECK(b.code == a.code);
    CHECK(slurp(d / "out/table1.csv") == first);
  }

  SUBCASE("corrupted table fails the integrity check") {
    {
      std::fstream f(d / "out/family/table_002.bin", std::ios::in | std::ios::out | std::ios::binary);
      f.seekp(64);
      f.put('\x7f');
    }
    const Run r = cli("verify --config small.json", d);
    CHECK(r.code == 3);
    CHECK(r.out.find("hash mismatch") != std::string::npos);
    CHECK(cli("simulate --config small.json", d).code == 3);
  }

  SUBCASE("usage and config errors") {
    std::ofstream(d / "broken.json") << "{\n  \"grid\": {\"nodes_per_axis\": 32,}\n}";
    const Run r = cli("solve --config broken.json", d);
    CHECK(r.code == 2);
    CHECK(r.out.find("line 2") != std::string::npos);
    std::ofstream(d / "unknown.json") << R"({"solver": {"tolerance": 1e-3}})";
    const Run u = cli("solve --config unknown.json", d);
    CHECK(u.code == 2);
    CHECK(u.out.find("solver.tolerance") != std::string::npos);
    CHECK(cli("simulate --config small.json --mode greedy", d).code == 2);
    CHECK(cli("frobnicate", d).code != 0);
  }

  SUBCASE("missing family") {
    const Run r = cli("table1 --config small.json --out elsewhere", d);
    CHECK(r.code == 3);
    CHECK(r.out.find("ceadapt solve") != std::string::npos);
  }
}

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

#include "ceadapt/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace ceadapt {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config field '" + path + "': " + what);
}

// Strict view of one JSON object: reads known keys and rejects the rest on finish().
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(at(key), "expected a number");
      out = v->get<double>();
    }
  }
  void get(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(at(key), "expected an integer");
      out = v->get<int>();
    }
  }
  void get(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void get(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) out = numbers(*v, at(key));
  }
  void get(const std::string& key, Eigen::VectorXd& out) {
    if (const json* v = find(key)) {
      const std::vector<double> xs = numbers(*v, at(key));
      out = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    }
  }
  template <class Enum, class Parse>
  void get_enum(const std::string& key, Enum& out, Parse parse) {
    std::string s;
    get(key, s);
    if (s.empty()) return;
    try {
      out = parse(s);
    } catch (const ContractViolation& e) {
      fail(at(key), e.what());
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown key");
    }
  }

  static std::vector<double> numbers(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> xs;
    for (const json& e : v) {
      if (!e.is_number()) fail(path, "expected an array of numbers");
      xs.push_back(e.get<double>());
    }
    return xs;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string integrator_name(SolverConfig::Integrator i) {
  return i == SolverConfig::Integrator::kEuler ? "euler" : "rk4";
}

SolverConfig::Integrator integrator_from_string(const std::string& s) {
  if (s == "euler") return SolverConfig::Integrator::kEuler;
  if (s == "rk4") return SolverConfig::Integrator::kRk4;
  throw ContractViolation("unknown integrator '" + s + "' (expected euler|rk4)");
}

std::string predictor_name(PredictorMode m) { return m == PredictorMode::kFiltered ? "filtered" : "unfiltered"; }

PredictorMode predictor_from_string(const std::string& s) {
  if (s == "filtered") return PredictorMode::kFiltered;
  if (s == "unfiltered") return PredictorMode::kUnfiltered;
  throw ContractViolation("unknown predictor '" + s + "' (expected unfiltered|filtered)");
}

void read_solver(Obj& o, SolverConfig& c) {
  o.get("dt", c.dt);
  o.get_enum("integrator", c.integrator, integrator_from_string);
  o.get("substeps", c.substeps);
  o.get("sweep_tolerance", c.sweep_tolerance);
  o.get("max_sweeps", c.max_sweeps);
  o.get("goal_slack_cells", c.goal_slack_cells);
  o.get("use_penalty", c.use_penalty);
  o.get("threads", c.threads);
  o.finish();
}

void read_smoothing(Obj& o, SmoothingConfig& c) {
  o.get_enum("theta_interp", c.theta_interp, theta_interp_from_string);
  o.get("squash_gain", c.squash_gain);
  o.finish();
}

}  // namespace

json to_json(const SolverConfig& c) {
  return {{"dt", c.dt},
          {"integrator", integrator_name(c.integrator)},
          {"substeps", c.substeps},
          {"sweep_tolerance", c.sweep_tolerance},
          {"max_sweeps", c.max_sweeps},
          {"goal_slack_cells", c.goal_slack_cells},
          {"use_penalty", c.use_penalty},
          {"threads", c.threads}};
}

json to_json(const SmoothingConfig& c) {
  return {{"theta_interp", to_string(c.theta_interp)}, {"squash_gain", c.squash_gain}};
}

json to_json(const AdaptConfig& c) {
  return {{"gamma", c.gamma},
          {"alpha", c.alpha},
          {"eta", c.eta},
          {"c1", c.c1},
          {"c2", c.c2},
          {"rho0", c.rho0},
          {"rho_min", c.rho_min},
          {"rho_max", c.rho_max},
          {"predictor", predictor_name(c.predictor)},
          {"beta", c.beta},
          {"warmup_time_constants", c.warmup_time_constants},
          {"guard_margin", c.guard_margin},
          {"potential", to_string(c.potential.kind())}};
}

SolverConfig solver_config_from_json(const json& j, const std::string& path) {
  SolverConfig c;
  Obj o(j, path);
  read_solver(o, c);
  return c;
}

SmoothingConfig smoothing_from_json(const json& j, const std::string& path) {
  SmoothingConfig c;
  Obj o(j, path);
  read_smoothing(o, c);
  return c;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.cases = {{"flat", scalar_vec(0.05), scalar_vec(0.4)}, {"steep", scalar_vec(0.4), scalar_vec(0.05)}};
  return c;
}

void ExperimentConfig::validate() const {
  auto check = [](bool ok, const std::string& path, const std::string& what) {
    if (!ok) fail(path, what);
  };
  check(environment == "mountain_car", "environment.name", "unknown environment '" + environment + "'");
  check(mountain_car.theta_min < mountain_car.theta_max, "environment.theta_min", "must be < theta_max");
  check(mountain_car.cost_sharpness > 0.0, "environment.cost_sharpness", "must be > 0");
  check(nodes_per_axis >= 2, "grid.nodes_per_axis", "must be >= 2");
  try {
    solver.validate();
  } catch (const ContractViolation& e) {
    fail("solver", e.what());
  }
  check(solver.threads >= 0, "solver.threads", "must be >= 0");
  check(theta_values.empty() ? theta_count >= 1 : true, "theta_samples.count", "must be >= 1");
  for (std::size_t i = 1; i < theta_values.size(); ++i) {
    check(theta_values[i] > theta_values[i - 1], "theta_samples.values", "must be strictly increasing");
  }
  for (double t : theta_values) {
    check(t >= mountain_car.theta_min && t <= mountain_car.theta_max, "theta_samples.values",
          "every value must lie in [theta_min, theta_max]");
  }
  check(smoothing.squash_gain > 0.0, "smoothing.squash_gain", "must be > 0");
  try {
    adapt.validate();
  } catch (const ContractViolation& e) {
    fail("adapt", e.what());
  }
  check(sim_dt > 0.0, "sim.dt", "must be > 0");
  check(horizon >= 0.0, "sim.horizon", "must be >= 0");
  check(x0.size() == 2, "sim.x0", "must have 2 entries");
  check(!modes.empty(), "experiments.modes", "must not be empty");
  check(!cases.empty(), "experiments.cases", "must not be empty");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const EnvironmentCase& c = cases[i];
    const std::string at = "experiments.cases[" + std::to_string(i) + "]";
    check(!c.label.empty(), at + ".label", "must not be empty");
    check(labels.insert(c.label).second, at + ".label", "duplicate label '" + c.label + "'");
    check(c.theta_true.size() == 1, at + ".theta_true", "must have 1 entry");
    check(c.theta_hat0.size() == 1, at + ".theta_hat0", "must have 1 entry");
    check(c.theta_true(0) >= mountain_car.theta_min && c.theta_true(0) <= mountain_car.theta_max,
          at + ".theta_true", "must lie in [theta_min, theta_max]");
    check(c.theta_hat0(0) >= mountain_car.theta_min && c.theta_hat0(0) <= mountain_car.theta_max,
          at + ".theta_hat0", "must lie in [theta_min, theta_max]");
    if (potential != BregmanPotential::Kind::kQuadratic) {
      check(c.theta_hat0(0) > mountain_car.theta_min && c.theta_hat0(0) < mountain_car.theta_max,
            at + ".theta_hat0", "must lie strictly inside the box for potential '" + to_string(potential) + "'");
    }
  }
  check(labels.count(simulate_case) == 1, "simulate.case", "no experiment case labelled '" + simulate_case + "'");
  check(!output_dir.empty(), "output_dir", "must not be empty");
  check(!family_dir.empty(), "family_dir", "must not be empty");
}

json to_json(const ExperimentConfig& c) {
  json j;
  const ConstraintPenalty& pen = c.mountain_car.penalty;
  j["environment"] = {{"name", c.environment},
                      {"goal_position", c.mountain_car.goal_position},
                      {"cost_sharpness", c.mountain_car.cost_sharpness},
                      {"control_gain", c.mountain_car.control_gain},
                      {"theta_min", c.mountain_car.theta_min},
                      {"theta_max", c.mountain_car.theta_max},
                      {"constraint_penalty", c.mountain_car.constraint_penalty},
                      {"penalty", {{"weight", pen.weight}, {"margin", pen.margin}, {"exterior_slope", pen.exterior_slope}}}};
  j["grid"] = {{"nodes_per_axis", c.nodes_per_axis}};
  j["solver"] = to_json(c.solver);
  j["theta_samples"] = {{"count", c.theta_count}, {"values", c.theta_values}};
  j["smoothing"] = to_json(c.smoothing);
  json a = to_json(c.adapt);
  a["potential"] = to_string(c.potential);
  j["adapt"] = a;
  j["sim"] = {{"dt", c.sim_dt}, {"horizon", c.horizon}, {"x0", vec_json(c.x0)}, {"enforce_bounds", c.enforce_bounds}};
  json modes = json::array();
  for (PolicyMode m : c.modes) modes.push_back(to_string(m));
  json cases = json::array();
  for (const EnvironmentCase& e : c.cases) {
    cases.push_back({{"label", e.label}, {"theta_true", vec_json(e.theta_true)}, {"theta_hat0", vec_json(e.theta_hat0)}});
  }
  j["experiments"] = {{"modes", modes}, {"cases", cases}};
  j["simulate"] = {{"mode", to_string(c.simulate_mode)}, {"case", c.simulate_case}, {"plots", c.plots}};
  j["output_dir"] = c.output_dir;
  j["family_dir"] = c.family_dir;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c = default_config();
  Obj root(j, "");
  if (const json* e = root.find("environment")) {
    Obj o(*e, "environment");
    o.get("name", c.environment);
    o.get("goal_position", c.mountain_car.goal_position);
    o.get("cost_sharpness", c.mountain_car.cost_sharpness);
    o.get("control_gain", c.mountain_car.control_gain);
    o.get("theta_min", c.mountain_car.theta_min);
    o.get("theta_max", c.mountain_car.theta_max);
    o.get("constraint_penalty", c.mountain_car.constraint_penalty);
    if (const json* p = o.find("penalty")) {
      Obj po(*p, "environment.penalty");
      po.get("weight", c.mountain_car.penalty.weight);
      po.get("margin", c.mountain_car.penalty.margin);
      po.get("exterior_slope", c.mountain_car.penalty.exterior_slope);
      po.finish();
    }
    o.finish();
  }
  if (const json* g = root.find("grid")) {
    Obj o(*g, "grid");
    o.get("nodes_per_axis", c.nodes_per_axis);
    o.finish();
  }
  if (const json* s = root.find("solver")) {
    Obj o(*s, "solver");
    read_solver(o, c.solver);
  }
  if (const json* t = root.find("theta_samples")) {
    Obj o(*t, "theta_samples");
    o.get("count", c.theta_count);
    o.get("values", c.theta_values);
    o.finish();
  }
  if (const json* s = root.find("smoothing")) {
    Obj o(*s, "smoothing");
    read_smoothing(o, c.smoothing);
  }
  if (const json* a = root.find("adapt")) {
    Obj o(*a, "adapt");
    o.get("gamma", c.adapt.gamma);
    o.get("alpha", c.adapt.alpha);
    o.get("eta", c.adapt.eta);
    o.get("c1", c.adapt.c1);
    o.get("c2", c.adapt.c2);
    o.get("rho0", c.adapt.rho0);
    o.get("rho_min", c.adapt.rho_min);
    o.get("rho_max", c.adapt.rho_max);
    o.get_enum("predictor", c.adapt.predictor, predictor_from_string);
    o.get("beta", c.adapt.beta);
    o.get("warmup_time_constants", c.adapt.warmup_time_constants);
    o.get("guard_margin", c.adapt.guard_margin);
    o.get_enum("potential", c.potential, potential_kind_from_string);
    o.finish();
  }
  if (const json* s = root.find("sim")) {
    Obj o(*s, "sim");
    o.get("dt", c.sim_dt);
    o.get("horizon", c.horizon);
    o.get("x0", c.x0);
    o.get("enforce_bounds", c.enforce_bounds);
    o.finish();
  }
  if (const json* e = root.find("experiments")) {
    Obj o(*e, "experiments");
    if (const json* m = o.find("modes")) {
      if (!m->is_array()) fail("experiments.modes", "expected an array of mode names");
      c.modes.clear();
      for (const json& name : *m) {
        if (!name.is_string()) fail("experiments.modes", "expected an array of mode names");
        try {
          c.modes.push_back(policy_mode_from_string(name.get<std::string>()));
        } catch (const ContractViolation& err) {
          fail("experiments.modes", err.what());
        }
      }
    }
    if (const json* cs = o.find("cases")) {
      if (!cs->is_array()) fail("experiments.cases", "expected an array of objects");
      c.cases.clear();
      for (std::size_t i = 0; i < cs->size(); ++i) {
        Obj co((*cs)[i], "experiments.cases[" + std::to_string(i) + "]");
        EnvironmentCase ec;
        co.get("label", ec.label);
        co.get("theta_true", ec.theta_true);
        co.get("theta_hat0", ec.theta_hat0);
        co.finish();
        c.cases.push_back(std::move(ec));
      }
    }
    o.finish();
  }
  if (const json* s = root.find("simulate")) {
    Obj o(*s, "simulate");
    o.get_enum("mode", c.simulate_mode, policy_mode_from_string);
    o.get("case", c.simulate_case);
    o.get("plots", c.plots);
    o.finish();
  }
  root.get("output_dir", c.output_dir);
  root.get("family_dir", c.family_dir);
  root.finish();
  c.validate();
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line and column.
    const std::size_t pos = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("config syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                      ": " + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

EnvironmentSpec make_environment(const ExperimentConfig& cfg) {
  if (cfg.environment != "mountain_car") fail("environment.name", "unknown environment '" + cfg.environment + "'");
  return make_mountain_car(cfg.mountain_car);
}

Grid make_grid(const ExperimentConfig& cfg, const EnvironmentSpec& env) { return Grid::over(env, cfg.nodes_per_axis); }

std::vector<ParamVec> make_theta_samples(const ExperimentConfig& cfg, const EnvironmentSpec& env) {
  if (cfg.theta_values.empty()) return uniform_theta_samples(env, cfg.theta_count);
  std::vector<ParamVec> out;
  for (double t : cfg.theta_values) out.push_back(scalar_vec(t));
  return out;
}

AdaptConfig make_adapt_config(const ExperimentConfig& cfg, const EnvironmentSpec& env) {
  AdaptConfig a = cfg.adapt;
  a.potential = BregmanPotential::make(cfg.potential, env.param_domain);
  return a;
}

SimConfig make_sim_config(const ExperimentConfig& cfg, const EnvironmentCase& c, PolicyMode mode) {
  SimConfig s;
  s.dt = cfg.sim_dt;
  s.horizon = cfg.horizon;
  s.x0 = cfg.x0;
  s.enforce_bounds = cfg.enforce_bounds;
  s.mode = mode;
  s.theta_true = c.theta_true;
  s.theta_hat0 = mode == PolicyMode::kOptimal ? c.theta_true : c.theta_hat0;
  return s;
}

const EnvironmentCase& find_case(const ExperimentConfig& cfg, const std::string& label) {
  for (const EnvironmentCase& c : cfg.cases) {
    if (c.label == label) return c;
  }
  throw ConfigError("no experiment case labelled '" + label + "'");
}

std::filesystem::path family_path(const ExperimentConfig& cfg) {
  const std::filesystem::path p(cfg.family_dir);
  return p.is_absolute() ? p : std::filesystem::path(cfg.output_dir) / p;
}

}  // namespace ceadapt

#include "gbattery/config.hpp"

#include <json.hpp>

#include <boost/math/constants/constants.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace gb {

using nlohmann::json;

namespace {

constexpr double kTwoPi = boost::math::constants::two_pi<double>();

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
    }
  }
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

double get_number(const json& obj, const std::string& path, const char* key, double def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(join(path, key), "expected a number");
  return v.get<double>();
}

int get_int(const json& obj, const std::string& path, const char* key, int def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
  return v.get<int>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(join(path, key), "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& path, const char* key,
                       const std::string& def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(join(path, key), "expected a string");
  return v.get<std::string>();
}

// list of numbers, or {"start", "stop", "count", "endpoint"}
std::vector<double> get_grid(const json& v, const std::string& path) {
  if (v.is_array()) {
    std::vector<double> out;
    for (size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }
  if (v.is_object()) {
    reject_unknown(v, path, {"start", "stop", "count", "endpoint"});
    for (const char* k : {"start", "stop", "count"}) {
      if (!v.contains(k)) fail(join(path, k), "required for a range grid");
    }
    double start = get_number(v, path, "start", 0.0);
    double stop = get_number(v, path, "stop", 0.0);
    int count = get_int(v, path, "count", 0);
    bool endpoint = get_bool(v, path, "endpoint", true);
    if (count < 1) fail(join(path, "count"), "must be >= 1");
    return linspace(start, stop, count, endpoint);
  }
  fail(path, "expected a list of numbers or a {start, stop, count} range");
}

void parse_model(const json& j, ModelSpec& m) {
  const std::string p = "model";
  reject_unknown(j, p, {"m0", "omega0", "N", "a0", "gamma", "omegaD", "beta", "bath_masses",
                        "tail_match", "frequency_map"});
  m.m0 = get_number(j, p, "m0", m.m0);
  m.omega0 = get_number(j, p, "omega0", m.omega0);
  m.N = get_int(j, p, "N", m.N);
  m.a0 = get_number(j, p, "a0", m.a0);
  m.gamma = get_number(j, p, "gamma", m.gamma);
  m.omegaD = get_number(j, p, "omegaD", m.omegaD);
  m.beta = get_number(j, p, "beta", m.beta);
  m.tail_match = get_bool(j, p, "tail_match", m.tail_match);
  std::string fmap = get_string(j, p, "frequency_map", to_string(m.frequency_map));
  try {
    m.frequency_map = frequency_map_from_string(fmap);
  } catch (const std::invalid_argument&) {
    fail("model.frequency_map", "expected \"tan\" or \"tanh\"");
  }
  if (j.contains("bath_masses")) {
    const json& v = j.at("bath_masses");
    if (v.is_number()) {
      double mk = v.get<double>();
      m.masses = (mk == 1.0) ? std::vector<double>{} : std::vector<double>(std::max(m.N, 0), mk);
    } else if (v.is_array()) {
      m.masses.clear();
      for (size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) fail("model.bath_masses[" + std::to_string(i) + "]", "expected a number");
        m.masses.push_back(v[i].get<double>());
      }
    } else {
      fail("model.bath_masses", "expected a number or a list of numbers");
    }
  }
}

}  // namespace

std::vector<double> linspace(double start, double stop, int count, bool endpoint) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = start;
    return out;
  }
  const int div = endpoint ? count - 1 : count;
  for (int i = 0; i < count; ++i) out[i] = start + (stop - start) * i / div;
  if (endpoint) out.back() = stop;
  return out;
}

std::vector<double> default_td_grid() {
  return {0.0, 0.25, 0.5, 0.75, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 2.0, 2.25, 2.5, 3.0, 3.5,
          4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0, 22.0, 24.0, 26.0, 28.0, 30.0};
}

std::vector<double> default_theta_grid() { return linspace(0.0, kTwoPi, 64, true); }

RunConfig::RunConfig() : td_grid(default_td_grid()), theta_grid(default_theta_grid()) {}

void RunConfig::validate() const {
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (exponent < 1) fail("protocol.exponent", "must be >= 1");
  if (scenarios.empty()) fail("scenarios", "must not be empty");
  if (td_grid.empty()) fail("td_grid", "must not be empty");
  for (size_t i = 0; i < td_grid.size(); ++i) {
    if (!(td_grid[i] >= 0.0) || !std::isfinite(td_grid[i])) {
      fail("td_grid[" + std::to_string(i) + "]", "must be a finite number >= 0");
    }
  }
  if (theta_grid.empty()) fail("theta_grid", "must not be empty");
  for (size_t i = 0; i < theta_grid.size(); ++i) {
    if (!(theta_grid[i] >= 0.0 && theta_grid[i] <= kTwoPi + 1e-12)) {
      fail("theta_grid[" + std::to_string(i) + "]", "must lie in [0, 2 pi]");
    }
  }
  try {
    stepper.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  try {
    cycle.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  try {
    oracle.validate(model);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (audit.N_values.empty()) fail("audit.N_values", "must not be empty");
  for (size_t i = 0; i < audit.N_values.size(); ++i) {
    if (audit.N_values[i] < 1) fail("audit.N_values[" + std::to_string(i) + "]", "must be >= 1");
  }
  if (output_dir.empty()) fail("output_dir", "must not be empty");
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = text.find_first_not_of(" \t\r\n") == std::string::npos ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("<root>: malformed JSON: ") + e.what());
  }
  RunConfig c;
  reject_unknown(j, "", {"model", "protocol", "scenarios", "td_grid", "theta_grid", "stepper", "cycle",
                         "oracle", "audit", "output_dir"});
  if (j.contains("model")) parse_model(j.at("model"), c.model);
  if (j.contains("protocol")) {
    const json& p = j.at("protocol");
    reject_unknown(p, "protocol", {"exponent"});
    c.exponent = get_int(p, "protocol", "exponent", c.exponent);
  }
  if (j.contains("scenarios")) {
    const json& s = j.at("scenarios");
    if (!s.is_array()) fail("scenarios", "expected a list");
    c.scenarios.clear();
    for (size_t i = 0; i < s.size(); ++i) {
      std::string path = "scenarios[" + std::to_string(i) + "]";
      if (!s[i].is_string()) fail(path, "expected a string");
      try {
        c.scenarios.push_back(scenario_from_string(s[i].get<std::string>()));
      } catch (const std::invalid_argument&) {
        fail(path, "expected \"tripartite\" or \"bipartite\"");
      }
    }
  }
  if (j.contains("td_grid")) c.td_grid = get_grid(j.at("td_grid"), "td_grid");
  if (j.contains("theta_grid")) c.theta_grid = get_grid(j.at("theta_grid"), "theta_grid");
  if (j.contains("stepper")) {
    const json& s = j.at("stepper");
    const std::string p = "stepper";
    reject_unknown(s, p, {"dt", "refine", "sympl_tol", "work_tol", "max_halvings"});
    c.stepper.dt = get_number(s, p, "dt", c.stepper.dt);
    c.stepper.refine = get_bool(s, p, "refine", c.stepper.refine);
    c.stepper.sympl_tol = get_number(s, p, "sympl_tol", c.stepper.sympl_tol);
    c.stepper.work_tol = get_number(s, p, "work_tol", c.stepper.work_tol);
    c.stepper.max_halvings = get_int(s, p, "max_halvings", c.stepper.max_halvings);
  }
  if (j.contains("cycle")) {
    const json& s = j.at("cycle");
    const std::string p = "cycle";
    reject_unknown(s, p, {"t_charge", "window", "sample_count"});
    c.cycle.t_charge = get_number(s, p, "t_charge", c.cycle.t_charge);
    c.cycle.window = get_number(s, p, "window", c.cycle.window);
    c.cycle.sample_count = get_int(s, p, "sample_count", c.cycle.sample_count);
  }
  if (j.contains("oracle")) {
    const json& s = j.at("oracle");
    const std::string p = "oracle";
    reject_unknown(s, p, {"omega_max", "abs_tol", "rel_tol"});
    c.oracle.omega_max = get_number(s, p, "omega_max", c.oracle.omega_max);
    c.oracle.abs_tol = get_number(s, p, "abs_tol", c.oracle.abs_tol);
    c.oracle.rel_tol = get_number(s, p, "rel_tol", c.oracle.rel_tol);
  }
  if (j.contains("audit")) {
    const json& s = j.at("audit");
    reject_unknown(s, "audit", {"N_values"});
    if (s.contains("N_values")) {
      const json& v = s.at("N_values");
      if (!v.is_array()) fail("audit.N_values", "expected a list of integers");
      c.audit.N_values.clear();
      for (size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number_integer()) fail("audit.N_values[" + std::to_string(i) + "]", "expected an integer");
        c.audit.N_values.push_back(v[i].get<int>());
      }
    }
  }
  c.output_dir = get_string(j, "", "output_dir", c.output_dir);
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const RunConfig& c) {
  json j;
  json m;
  m["m0"] = c.model.m0;
  m["omega0"] = c.model.omega0;
  m["N"] = c.model.N;
  m["a0"] = c.model.a0;
  m["gamma"] = c.model.gamma;
  m["omegaD"] = c.model.omegaD;
  m["beta"] = c.model.beta;
  if (c.model.masses.empty()) {
    m["bath_masses"] = 1.0;
  } else {
    m["bath_masses"] = c.model.masses;
  }
  m["tail_match"] = c.model.tail_match;
  m["frequency_map"] = to_string(c.model.frequency_map);
  j["model"] = m;
  j["protocol"] = {{"exponent", c.exponent}};
  json sc = json::array();
  for (Scenario s : c.scenarios) sc.push_back(to_string(s));
  j["scenarios"] = sc;
  j["td_grid"] = c.td_grid;
  j["theta_grid"] = c.theta_grid;
  j["stepper"] = {{"dt", c.stepper.dt},
                  {"refine", c.stepper.refine},
                  {"sympl_tol", c.stepper.sympl_tol},
                  {"work_tol", c.stepper.work_tol},
                  {"max_halvings", c.stepper.max_halvings}};
  j["cycle"] = {{"t_charge", c.cycle.t_charge},
                {"window", c.cycle.window},
                {"sample_count", c.cycle.sample_count}};
  j["oracle"] = {{"omega_max", c.oracle.omega_max},
                 {"abs_tol", c.oracle.abs_tol},
                 {"rel_tol", c.oracle.rel_tol}};
  j["audit"] = {{"N_values", c.audit.N_values}};
  j["output_dir"] = c.output_dir;
  return j.dump(2) + "\n";
}

}  // namespace gb

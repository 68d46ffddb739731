#include "gbattery/config.hpp"

#include <doctest.h>

#include <numbers>

using namespace gb;

namespace {
std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}
}  // namespace

TEST_CASE("empty config gives the default model") {
  RunConfig c = parse_config("");
  CHECK(c.model.m0 == 1.0);
  CHECK(c.model.omega0 == 2.0);
  CHECK(c.model.N == 150);
  CHECK(c.model.a0 == 1.03);
  CHECK(c.model.gamma == 1.0);
  CHECK(c.model.omegaD == 4.0);
  CHECK(c.model.beta == 10.0);
  CHECK(c.exponent == 11);
  CHECK(c.td_grid.front() == 0.0);
  CHECK(c.td_grid.back() == 30.0);
  CHECK(c.theta_grid.size() == 64);
  CHECK(c.theta_grid.back() == doctest::Approx(2.0 * std::numbers::pi));
  CHECK(parse_config("{}") == c);
  CHECK(c == RunConfig{});
}

TEST_CASE("defaults round-trip through the emitted text") {
  RunConfig c;
  CHECK(parse_config(emit_config(c)) == c);
  CHECK(emit_config(parse_config(emit_config(c))) == emit_config(c));
  // 3 masses for 30 modes
  CHECK(error_of(R"({"model": {"N": 30, "bath_masses": [1,2,3]}})").rfind("model.bath_masses", 0) == 0);
  RunConfig d = parse_config(R"({"model": {"N": 4, "bath_masses": 2.0, "frequency_map": "tanh"}})");
  CHECK(d.model.masses == std::vector<double>(4, 2.0));
  CHECK(d.model.frequency_map == FrequencyMap::Tanh);
  CHECK(parse_config(emit_config(d)) == d);
  RunConfig e = parse_config(R"({"model": {"N": 3, "bath_masses": [1,2,3]},
      "td_grid": {"start": 0, "stop": 2, "count": 5}, "theta_grid": [0, 1.5]})");
  CHECK(e.td_grid == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
  CHECK(parse_config(emit_config(e)) == e);
}

TEST_CASE("validation errors name the field") {
  CHECK(error_of(R"({"model": {"beta": 0}})").rfind("model.beta", 0) == 0);
  CHECK(error_of(R"({"model": {"beta": -3}})").rfind("model.beta", 0) == 0);
  CHECK(error_of(R"({"model": {"betta": 3}})").rfind("model.betta", 0) == 0);
  CHECK(error_of(R"({"sweep": 1})").rfind("sweep", 0) == 0);
  CHECK(error_of(R"({"td_grid": []})").rfind("td_grid", 0) == 0);
  CHECK(error_of(R"({"td_grid": [0, -1]})").rfind("td_grid[1]", 0) == 0);
  CHECK(error_of(R"({"stepper": {"work_tol": 0}})").rfind("stepper.work_tol", 0) == 0);
  CHECK(error_of(R"({"cycle": {"t_charge": "long"}})").rfind("cycle.t_charge", 0) == 0);
  CHECK(error_of(R"({"scenarios": ["both"]})").rfind("scenarios[0]", 0) == 0);
  CHECK(error_of(R"({"model": {"N": 2.5}})").rfind("model.N", 0) == 0);
  CHECK(error_of("{not json").rfind("<root>", 0) == 0);
  CHECK(error_of(R"({"oracle": {"rel_tol": 0}})").rfind("oracle.rel_tol", 0) == 0);
}

TEST_CASE("linspace") {
  CHECK(linspace(0, 1, 3, true) == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(linspace(0, 1, 4, false) == std::vector<double>{0.0, 0.25, 0.5, 0.75});
  CHECK(linspace(2, 5, 1, true) == std::vector<double>{2.0});
}

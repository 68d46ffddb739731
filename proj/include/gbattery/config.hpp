// Run configuration: JSON in, validated RunConfig out, and back.
#pragma once

#include "gbattery/cycles.hpp"
#include "gbattery/evolution.hpp"
#include "gbattery/model.hpp"
#include "gbattery/oracle.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace gb {

// Validation failure; what() starts with the offending field path.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AuditSettings {
  std::vector<int> N_values{50, 100, 150};
  bool operator==(const AuditSettings&) const = default;
};

struct RunConfig {
  ModelSpec model;
  int exponent = 11;
  std::vector<Scenario> scenarios{Scenario::Tripartite, Scenario::Bipartite};
  std::vector<double> td_grid;
  std::vector<double> theta_grid;
  StepperConfig stepper;
  ChargingSettings cycle;
  OracleConfig oracle;
  AuditSettings audit;
  std::string output_dir = "out";

  RunConfig();  // fills the default grids
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

std::vector<double> default_td_grid();
// 64 points on [0, 2 pi], both ends included
std::vector<double> default_theta_grid();
std::vector<double> linspace(double start, double stop, int count, bool endpoint);

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// Canonical JSON; parse_config(emit_config(c)) == c
std::string emit_config(const RunConfig& cfg);

}  // namespace gb

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "compasskit/evalcore.hpp"
#include "compasskit/planner.hpp"
#include "compasskit/searchv.hpp"
#include "compasskit/servesim.hpp"
#include "compasskit/space.hpp"

namespace compasskit {

struct PlanningSpec {
  double tau = 0.75;
  std::vector<double> slo_ms{500, 1000, 1500};
  std::optional<double> slack_buffer_ms;  // default 0.1 * L
  double cooldown_up_s = 0.0;
  double cooldown_down_s = 5.0;
  // "oracle": true accuracy of each feasible config; "estimate": acc_hat.
  std::string accuracy_source = "oracle";

  double slack_for(double slo) const { return slack_buffer_ms.value_or(0.1 * slo); }
};

struct BaselineSpec {
  std::string name;
  std::string entry;  // "fastest", "slowest", "middle" or a front index
};

struct SimulationSpec {
  std::vector<PatternKind> patterns{PatternKind::Spike, PatternKind::Bursty};
  double base_qps = 1.5;
  double duration_s = 180.0;
  std::vector<uint64_t> seeds{1, 2, 3};
  double switch_latency_ms = 10.0;
  bool count_in_service = false;
  bool single_rung = false;
  std::vector<BaselineSpec> baselines{
      {"static-fast", "fastest"}, {"static-medium", "middle"}, {"static-accurate", "slowest"}};
};

struct Scenario {
  std::string name;
  std::filesystem::path source;
  uint64_t seed = 1;
  RawSpace raw_space;
  ConfigSpace space;
  AccuracyOracle oracle = AccuracyOracle::table(ConfigSpace{}, {});
  double oracle_margin = 0.0;  // per-tau gap remap for sweeps; 0 = off
  BudgetSchedule schedule;
  std::vector<double> taus;
  SearchParams search;
  ServiceModel service;
  std::size_t profile_runs = 1000;
  PlanningSpec planning;
  SimulationSpec simulation;

  /// Oracle used when searching at `tau` (margin-remapped when configured).
  AccuracyOracle oracle_at(double tau) const;
};

/// Parses a YAML scenario file. Relative data-file paths resolve against the
/// scenario's directory. Throws ValidationError on any inconsistency.
Scenario load_scenario(const std::filesystem::path& path);

/// Configuration from a {parameter: label} assignment covering every axis.
Configuration config_from_labels(const ConfigSpace& space,
                                 const std::map<std::string, std::string>& labels);

/// Parses "a..b:n" (n evenly spaced values, inclusive) or a single value.
std::vector<double> parse_tau_spec(const std::string& spec);

/// Minimal RFC-4180 reader: header row plus records.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& path);
std::string csv_field(const std::string& s);

}  // namespace compasskit

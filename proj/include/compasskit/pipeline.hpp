#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "compasskit/scenario.hpp"

namespace compasskit {

using Json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

uint64_t search_seed(uint64_t master, double tau);

struct SearchRun {
  double tau = 0.5;
  uint64_t seed = 0;
  double feasible_fraction = 0.0;  // true fraction under the searched oracle
  SearchResult search;
  std::optional<GridResult> grid;
  std::optional<SearchMetrics> metrics;
};

SearchRun run_search(const Scenario& sc, double tau, uint64_t master, bool with_grid);

/// A feasible configuration as handed from search to planning.
struct FeasibleEntry {
  Configuration config;
  double acc_hat = 0.0;
  double accuracy = 0.0;  // oracle truth
};

std::vector<FeasibleEntry> feasible_entries(const Scenario& sc, const SearchRun& run);

std::vector<ProfiledConfig> profile_feasible(const Scenario& sc,
                                             const std::vector<FeasibleEntry>& feasible,
                                             uint64_t master);

struct PlanOptions {
  double slo_ms = 1000;
  std::optional<double> slack_buffer_ms;
  std::optional<double> cooldown_up_s;
  std::optional<double> cooldown_down_s;
};

SwitchingPolicy plan_policy(const Scenario& sc, const std::vector<FeasibleEntry>& feasible,
                            const PlanOptions& opt, uint64_t master);

/// Front index named by a baseline spec ("fastest", "middle", "slowest" or
/// an integer index).
std::size_t resolve_baseline(const std::string& entry, std::size_t front_size);

// JSON artifacts
Json config_json(const ConfigSpace& space, const Configuration& c);
Configuration config_from_json(const ConfigSpace& space, const Json& j);
Json feasible_set_json(const Scenario& sc, const SearchRun& run);
std::vector<FeasibleEntry> read_feasible_set(const Scenario& sc, const std::filesystem::path& p);
Json policy_json(const ConfigSpace& space, const SwitchingPolicy& policy);
SwitchingPolicy read_policy(const ConfigSpace& space, const std::filesystem::path& p);
Json metrics_json(const SimMetrics& m, const std::string& strategy, const LoadPattern& pattern,
                  uint64_t seed);

// CSV artifacts
std::string search_trace_csv(const ConfigSpace& space, const SearchResult& r);
std::string sim_trace_csv(const SimTrace& t);
std::string timeline_csv(const SimMetrics& m);

void write_file(const std::filesystem::path& p, const std::string& content);
Json read_json(const std::filesystem::path& p);

std::string fixed6(double v);
std::string ms_int(double v);
std::string tau_tag(double tau);

struct CompareOptions {
  std::filesystem::path out_dir;
  uint64_t master_seed = 1;
  std::size_t threads = 1;
};

/// search -> plan -> simulate over the scenario grid; writes every artifact
/// under out_dir and returns the report (also written as report.json).
Json run_compare(const Scenario& sc, const CompareOptions& opt);

/// Markdown rendering of a report.json.
std::string render_report(const Json& report);

}  // namespace compasskit

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "compasskit/planner.hpp"

namespace compasskit {

enum class PatternKind { Constant, Spike, Bursty };
const char* to_string(PatternKind k);
PatternKind pattern_kind_from_string(const std::string& s);

struct LoadPattern {
  PatternKind kind = PatternKind::Constant;
  double base_qps = 1.5;
  double duration_s = 180.0;
  // spike
  double spike_multiplier = 4.0;
  double spike_start_s = -1.0;  // negative = duration / 3
  double spike_end_s = -1.0;    // negative = 2 * duration / 3
  // bursty
  double burst_rate_per_s = 1.0 / 30.0;
  double burst_multiplier_lo = 2.0;
  double burst_multiplier_hi = 5.0;
  double burst_length_lo_s = 5.0;
  double burst_length_hi_s = 15.0;

  void validate() const;
  double spike_start() const { return spike_start_s < 0 ? duration_s / 3.0 : spike_start_s; }
  double spike_end() const { return spike_end_s < 0 ? 2.0 * duration_s / 3.0 : spike_end_s; }
};

struct Burst {
  double start_s = 0.0;
  double length_s = 0.0;
  double multiplier = 1.0;
};

/// Burst windows of a bursty pattern (empty for other kinds).
std::vector<Burst> draw_bursts(const LoadPattern& pattern, uint64_t seed);

/// Instantaneous arrival rate (requests/s) at time t_s.
double arrival_rate(const LoadPattern& pattern, const std::vector<Burst>& bursts, double t_s);

/// Sorted arrival times in milliseconds, drawn by thinning.
std::vector<double> generate_arrivals(const LoadPattern& pattern, uint64_t seed);

struct Request {
  std::size_t id = 0;
  double arrival_ms = 0.0;
  double start_ms = 0.0;
  double completion_ms = 0.0;
  std::size_t config_index = 0;  // index into the policy's front
  double accuracy = 0.0;

  double latency_ms() const { return completion_ms - arrival_ms; }
  double wait_ms() const { return start_ms - arrival_ms; }
};

struct SwitchEvent {
  double decided_ms = 0.0;
  double ready_ms = 0.0;
  std::size_t from = 0;  // front indices
  std::size_t to = 0;
  bool upscale = false;
  bool superseded = false;  // replaced by a later decision before ready
};

struct SimTrace {
  std::vector<Request> requests;  // arrival order
  std::vector<SwitchEvent> switches;
  std::size_t initial_config = 0;  // front index
  double end_ms = 0.0;
};

struct ControllerState {
  std::size_t k = 0;  // rung index into policy.entries
  double last_upscale_s = -std::numeric_limits<double>::infinity();
  double last_downscale_s = -std::numeric_limits<double>::infinity();
  std::size_t queue_depth = 0;
};

struct Decision {
  bool switch_config = false;
  std::size_t target = 0;
  bool upscale = false;
};

/// Elastico rule for one controller consultation. Records the switch time in
/// `state` and updates state.k when it decides to switch.
Decision elastico_decide(ControllerState& state, const SwitchingPolicy& policy, double now_s,
                         bool single_rung = false);

struct SimOptions {
  double switch_latency_ms = 10.0;
  bool count_in_service = false;
  bool single_rung = false;
  std::optional<std::size_t> static_entry;  // index into policy.front
  std::optional<double> slo_ms;             // metrics SLO; default policy.slo_ms
};

struct TimelineRow {
  std::size_t t_s = 0;
  std::size_t queue_depth = 0;
  std::size_t active_config = 0;
  std::size_t arrivals = 0;
};

struct SimMetrics {
  std::size_t requests = 0;
  double slo_ms = 0.0;
  double slo_compliance = 1.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double p99_ms = 0.0;
  double mean_latency_ms = 0.0;
  double mean_wait_ms = 0.0;
  double mean_accuracy = 0.0;
  std::size_t upscales = 0;
  std::size_t downscales = 0;
  std::vector<TimelineRow> timeline;
};

struct SimResult {
  SimTrace trace;
  SimMetrics metrics;
};

/// Single-server FIFO simulation over explicit arrival times (ms). Service
/// noise is drawn per request id from `seed`, so strategies sharing arrivals
/// and seed see the same random numbers.
SimResult run_simulation(const SwitchingPolicy& policy, const ServiceModel& model,
                         const std::vector<double>& arrivals_ms, const SimOptions& options,
                         uint64_t seed);

SimResult run_simulation(const SwitchingPolicy& policy, const ServiceModel& model,
                         const LoadPattern& pattern, const SimOptions& options, uint64_t seed);

SimMetrics compute_metrics(const SimTrace& trace, double slo_ms);

/// Pollaczek-Khinchine mean wait of an M/G/1 queue: lambda E[S^2] / (2 (1 - rho)).
double pk_mean_wait_ms(double lambda_per_ms, double mean_s_ms, double second_moment_ms2);

}  // namespace compasskit

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "compasskit/seeding.hpp"
#include "compasskit/space.hpp"

namespace compasskit {

/// Service-time distribution of one configuration, in milliseconds.
struct LatencyDist {
  enum class Family { Lognormal, Deterministic, Empirical };

  Family family = Family::Deterministic;
  double mu = 0.0;     // lognormal: log-scale location
  double sigma = 0.0;  // lognormal: log-scale spread
  double value = 0.0;  // deterministic
  std::vector<double> trace;  // empirical; sampled uniformly with replacement

  static LatencyDist deterministic(double ms);
  static LatencyDist lognormal_median(double median_ms, double sigma);
  /// Moment-matched lognormal with the given mean and 95th percentile.
  /// p95 == mean degenerates to a deterministic distribution.
  static LatencyDist lognormal_mean_p95(double mean_ms, double p95_ms);
  static LatencyDist empirical(std::vector<double> samples_ms);

  double sample(Rng& rng) const;
  /// Service time from pre-drawn noise: z ~ N(0,1) drives the lognormal,
  /// u ~ U[0,1) picks a trace sample.
  double draw(double z, double u) const;
  double mean() const;
};

const char* to_string(LatencyDist::Family f);
LatencyDist::Family latency_family_from_string(const std::string& s);

/// Maps configurations to service-time distributions on the target hardware.
class ServiceModel {
 public:
  ServiceModel() = default;
  explicit ServiceModel(const ConfigSpace& space);

  void set(const Configuration& c, LatencyDist dist);
  bool has(const Configuration& c) const;
  /// Throws ValidationError when the configuration has no distribution.
  const LatencyDist& dist(const Configuration& c) const;
  const ConfigSpace& space() const { return space_; }

 private:
  ConfigSpace space_;
  std::vector<std::optional<LatencyDist>> by_rank_;
};

/// Additive latency model: mean = base + sum of per-axis terms, where numeric
/// axes contribute coeff * x (x normalized) and categorical axes a per-category
/// offset. The tail is set through p95 = mean * p95_ratio.
struct LatencyFormula {
  LatencyDist::Family family = LatencyDist::Family::Lognormal;
  double base_ms = 100.0;
  std::vector<double> axis_coeff_ms;                  // per axis, numeric
  std::vector<std::vector<double>> category_offsets_ms;  // per axis, categorical
  double p95_ratio = 1.5;
};

ServiceModel build_service_model(const ConfigSpace& space, const LatencyFormula& formula);

struct LatencyProfile {
  double mean_ms = 0.0;
  double p95_ms = 0.0;
  std::size_t samples = 0;
  std::vector<double> raw;  // kept only when requested
};

/// Nearest-rank percentile of an unsorted sample; q in (0,1].
double nearest_rank(std::vector<double> values, double q);

/// Draws n_runs service times (n_runs >= 100) and records mean and
/// nearest-rank P95. Re-profiles with a doubled count if mean > P95.
LatencyProfile profile_latency(const ServiceModel& model, const Configuration& c,
                               std::size_t n_runs, uint64_t seed, bool keep_raw = false);

struct ProfiledConfig {
  Configuration config;
  double accuracy = 0.0;
  LatencyProfile profile;
};

struct ParetoEntry {
  Configuration config;
  double accuracy = 0.0;
  LatencyProfile profile;
  double slack_ms = 0.0;
  int64_t upscale_threshold = 0;
  std::optional<int64_t> downscale_threshold;  // absent on the slowest rung
};

/// Non-dominated configurations in the (accuracy up, mean latency down)
/// sense, ordered by increasing mean latency.
std::vector<ParetoEntry> pareto_front(const std::vector<ProfiledConfig>& candidates);

class SloInfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double queuing_slack(double slo_ms, double p95_ms) { return slo_ms - p95_ms; }

/// floor((L - s95) / s_mean), evaluated exactly on the binary values of the
/// inputs. Requires L - s95 > 0 and s_mean > 0.
int64_t upscale_threshold(double slo_ms, double p95_ms, double mean_ms);

/// floor((slack_next - h_s) / s_mean_next), clamped at 0.
int64_t downscale_threshold(double slack_next_ms, double buffer_ms, double mean_next_ms);

/// Same as above with slack_next = L - s95_next kept exact.
int64_t downscale_threshold(double slo_ms, double p95_next_ms, double buffer_ms,
                            double mean_next_ms);

struct SwitchingPolicy {
  std::vector<ParetoEntry> entries;  // retained rungs, fastest first
  std::vector<ParetoEntry> front;    // full front before SLO exclusion
  std::vector<ParetoEntry> excluded;  // front entries with slack <= 0
  std::vector<ParetoEntry> merged;    // rungs dropped to keep N-up strict
  double slo_ms = 0.0;
  double slack_buffer_ms = 0.0;
  double cooldown_up_s = 0.0;
  double cooldown_down_s = 5.0;
};

/// Derives per-rung thresholds for a front. Entries whose slack is <= 0 are
/// excluded; rungs whose upscale threshold does not exceed the next rung's are
/// merged into the slower rung.
SwitchingPolicy build_policy(const std::vector<ParetoEntry>& front, double slo_ms,
                             double slack_buffer_ms, double cooldown_up_s,
                             double cooldown_down_s);

}  // namespace compasskit

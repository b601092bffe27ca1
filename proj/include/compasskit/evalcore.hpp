#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "compasskit/seeding.hpp"
#include "compasskit/space.hpp"

namespace compasskit {

/// Increasing per-configuration sample counts b1 < ... < bK plus the z value
/// of the Wilson interval used for early stopping.
struct BudgetSchedule {
  std::vector<uint32_t> levels{20, 50, 100};
  double z = 1.96;

  uint32_t max_budget() const { return levels.back(); }
  void validate() const;
};

enum class Classification { Feasible, Infeasible, Uncertain };
const char* to_string(Classification c);

struct EvalRecord {
  Configuration config;
  uint32_t trials = 0;
  uint32_t successes = 0;
  double acc_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
  // Feasible/Infeasible only when the interval cleared tau; Uncertain when
  // the budget ran out first.
  Classification classification = Classification::Uncertain;
  // Decision used downstream: the confident verdict, or acc_hat >= tau for
  // uncertain records.
  bool feasible = false;
  uint32_t samples_spent = 0;
  // Index into the schedule of the level at which evaluation stopped.
  std::size_t stop_level = 0;
};

/// Saturating per-axis response: gain * (1 - e^{-k x}) / (1 - e^{-k}), or
/// gain * x when curvature is zero. Categorical axes may instead carry one
/// additive offset per category.
struct AxisEffect {
  double gain = 0.0;
  double curvature = 0.0;
  std::vector<double> category_offsets;
};

struct Interaction {
  std::size_t a = 0;
  std::size_t b = 0;
  double coeff = 0.0;
};

/// Gaussian bump along one axis; makes the cascade family non-monotone.
struct Bump {
  std::size_t axis = 0;
  double height = 0.0;
  double center = 0.5;
  double width = 0.2;
};

/// Order-preserving remap that moves every accuracy out of
/// (tau - margin, tau + margin); the feasible set at tau is unchanged.
struct TauMargin {
  double tau = 0.5;
  double margin = 0.15;
};

enum class OracleFamily { RagLike, CascadeLike, CustomTable };
const char* to_string(OracleFamily f);
OracleFamily oracle_family_from_string(const std::string& s);

/// Deterministic stand-in for a workflow's task accuracy Acc(c).
class AccuracyOracle {
 public:
  struct Coefficients {
    double base = 0.5;
    std::vector<AxisEffect> axes;  // one per parameter (missing = no effect)
    std::vector<Interaction> interactions;
    std::vector<Bump> bumps;       // cascade-like only
  };

  static AccuracyOracle parametric(const ConfigSpace& space, OracleFamily family,
                                   Coefficients coeffs);
  /// `table` pairs configurations with their accuracy.
  static AccuracyOracle table(const ConfigSpace& space,
                              const std::vector<std::pair<Configuration, double>>& rows);

  OracleFamily family() const { return family_; }
  const ConfigSpace& space() const { return space_; }
  const Coefficients& coefficients() const { return coeffs_; }

  AccuracyOracle with_margin(TauMargin m) const;
  const std::optional<TauMargin>& margin() const { return margin_; }

  /// p in [0,1]; throws ValidationError for a table without the entry.
  double true_accuracy(const Configuration& c) const;

 private:
  AccuracyOracle(const ConfigSpace& space, OracleFamily family)
      : space_(space), family_(family) {}
  double raw_accuracy(const Configuration& c) const;

  ConfigSpace space_;
  OracleFamily family_;
  Coefficients coeffs_;
  std::vector<double> table_;  // by rank; NaN = missing
  std::optional<TauMargin> margin_;
};

inline double true_accuracy(const AccuracyOracle& oracle, const Configuration& c) {
  return oracle.true_accuracy(c);
}

/// Number of successes in n Bernoulli(p) draws from `rng`.
uint32_t sample_trials(const AccuracyOracle& oracle, const Configuration& c, uint32_t n,
                       Rng& rng);

/// Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(uint32_t successes, uint32_t trials, double z);

/// Per-configuration RNG stream so a configuration's draws do not depend on
/// evaluation order. Grid search and COMPASS-V share these streams.
uint64_t eval_stream_seed(uint64_t seed, const ConfigSpace& space, const Configuration& c);

/// Evaluates `c` level by level with cumulative trials, stopping as soon as
/// the Wilson interval lies strictly above or below tau.
EvalRecord progressive_evaluate(const AccuracyOracle& oracle, const Configuration& c,
                                const BudgetSchedule& schedule, double tau, Rng& rng);

}  // namespace compasskit

#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <vector>

#include "compasskit/evalcore.hpp"
#include "compasskit/space.hpp"

namespace compasskit {

using EvaluatedMap = std::map<Configuration, EvalRecord>;

struct SearchParams {
  std::size_t n_init = 16;
  std::size_t k_neighbors = 5;
  double idw_exponent = 2.0;
  double low_gradient_quantile = 1.0;
  // Hill-climb candidates enqueued per infeasible evaluation, steepest
  // available first; 0 = all of them.
  std::size_t hill_climb_width = 1;
  double tau = 0.5;
  // Extra LHS rounds, each run only if the feasible set is still empty.
  std::size_t restart_rounds = 0;

  void validate() const;
};

/// Inverse-distance-weighted finite-difference gradient.
struct GradientEstimate {
  std::vector<double> v;                // one component per axis
  std::vector<std::size_t> axis_support;  // neighbors that moved each axis
  std::size_t support = 0;              // neighbors used
  std::vector<Configuration> nearest;   // the neighbors, nearest first

  bool is_zero() const;
};

GradientEstimate idw_gradient(const ConfigSpace& space, const Configuration& c,
                              const EvaluatedMap& evaluated, std::size_t k_neighbors,
                              double exponent);

/// Steps along each axis in the direction of its gradient component, ordered
/// by |v_i| descending; steps already evaluated or queued are dropped. Falls
/// back to every unevaluated neighbor when the gradient carries no direction.
std::vector<Configuration> hill_climb(const ConfigSpace& space, const Configuration& c,
                                      const GradientEstimate& gradient,
                                      const EvaluatedMap& evaluated,
                                      const std::set<Configuration>& queued);

/// Neighbors along the axes whose |v_i| is at or below the given quantile of
/// all axis magnitudes. quantile = 1 expands every axis.
std::vector<Configuration> lateral_expand(const ConfigSpace& space, const Configuration& c,
                                          const EvaluatedMap& evaluated,
                                          double low_gradient_quantile,
                                          const std::set<Configuration>& queued,
                                          std::size_t k_neighbors = 5,
                                          double exponent = 2.0);

struct SearchStats {
  std::size_t evaluations = 0;
  uint64_t samples = 0;
  std::size_t hill_climb_steps = 0;
  std::size_t lateral_expansions = 0;
  std::size_t lhs_seeds = 0;
  std::size_t rounds = 1;
  std::size_t max_queue = 0;
};

struct TraceRow {
  std::size_t order = 0;
  Configuration config;
  Classification classification = Classification::Uncertain;
  bool feasible = false;
  uint32_t samples = 0;
  uint64_t cumulative_samples = 0;
  std::size_t feasible_found = 0;
  std::size_t queue_size = 0;
};

struct SearchResult {
  std::vector<EvalRecord> feasible;  // discovery order
  EvaluatedMap evaluated;
  SearchStats stats;
  std::vector<TraceRow> trace;

  std::set<Configuration> feasible_configs() const;
};

SearchResult compass_v_search(const ConfigSpace& space, const AccuracyOracle& oracle,
                              const SearchParams& params, const BudgetSchedule& schedule,
                              uint64_t seed);

struct GridResult {
  std::vector<EvalRecord> records;  // B_max samples each, lexicographic order
  std::set<Configuration> feasible;  // acc_hat >= tau at B_max
  uint64_t samples = 0;              // |C| * B_max
  // The same configurations under the progressive schedule (same streams).
  std::set<Configuration> progressive_feasible;
  uint64_t progressive_samples = 0;
};

GridResult grid_search_oracle(const ConfigSpace& space, const AccuracyOracle& oracle,
                              double tau, const BudgetSchedule& schedule, uint64_t seed);

struct SearchMetrics {
  double recall = 1.0;
  double savings = 0.0;
  std::size_t found = 0;
  std::size_t truth = 0;
  std::size_t false_positives = 0;
  uint64_t compass_samples = 0;
  uint64_t grid_samples = 0;
};

SearchMetrics recall_and_savings(const std::set<Configuration>& compass_feasible,
                                 uint64_t compass_samples,
                                 const std::set<Configuration>& grid_feasible,
                                 uint64_t grid_samples);
SearchMetrics recall_and_savings(const SearchResult& compass, const GridResult& grid);

}  // namespace compasskit

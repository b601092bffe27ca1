#include "compasskit/searchv.hpp"

#include <algorithm>
#include <cmath>

#include "compasskit/seeding.hpp"

namespace compasskit {

void SearchParams::validate() const {
  if (n_init < 1) throw ValidationError("n_init must be >= 1");
  if (k_neighbors < 1) throw ValidationError("k_neighbors must be >= 1");
  if (!(idw_exponent > 0)) throw ValidationError("idw exponent must be > 0");
  if (!(low_gradient_quantile > 0 && low_gradient_quantile <= 1))
    throw ValidationError("low_gradient_quantile must be in (0,1]");
  if (!(tau > 0 && tau < 1)) throw ValidationError("tau must be in (0,1)");
}

bool GradientEstimate::is_zero() const {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

std::set<Configuration> SearchResult::feasible_configs() const {
  std::set<Configuration> out;
  for (const auto& r : feasible) out.insert(r.config);
  return out;
}

GradientEstimate idw_gradient(const ConfigSpace& space, const Configuration& c,
                              const EvaluatedMap& evaluated, std::size_t k_neighbors,
                              double exponent) {
  GradientEstimate g;
  g.v.assign(space.dims(), 0.0);
  g.axis_support.assign(space.dims(), 0);
  if (evaluated.empty()) return g;

  struct Cand {
    double d;
    std::size_t rank;
    const EvalRecord* rec;
  };
  std::vector<Cand> cands;
  cands.reserve(evaluated.size());
  for (const auto& [cfg, rec] : evaluated)
    cands.push_back({distance(space, c, cfg), space.rank(cfg), &rec});
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return a.d != b.d ? a.d < b.d : a.rank < b.rank;
  });

  // Reference accuracy: own estimate when evaluated, else the nearest point.
  const double ref = cands.front().rec->acc_hat;

  std::vector<double> num(space.dims(), 0.0), den(space.dims(), 0.0);
  for (const auto& cand : cands) {
    if (g.support == k_neighbors) break;
    if (cand.d == 0.0) continue;
    const double w = std::pow(cand.d, -exponent);
    const double dacc = cand.rec->acc_hat - ref;
    for (std::size_t i = 0; i < space.dims(); ++i) {
      const double dx = axis_delta(space, i, c, cand.rec->config);
      if (dx == 0.0) continue;
      num[i] += w * dacc / dx;
      den[i] += w;
      ++g.axis_support[i];
    }
    g.nearest.push_back(cand.rec->config);
    ++g.support;
  }
  for (std::size_t i = 0; i < space.dims(); ++i)
    if (den[i] > 0) g.v[i] = num[i] / den[i];
  return g;
}

namespace {

bool available(const ConfigSpace& space, const Configuration& c,
               const EvaluatedMap& evaluated, const std::set<Configuration>& queued) {
  return space.contains(c) && !evaluated.count(c) && !queued.count(c);
}

void push_unique(std::vector<Configuration>& out, Configuration c) {
  if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
}

}  // namespace

std::vector<Configuration> hill_climb(const ConfigSpace& space, const Configuration& c,
                                      const GradientEstimate& gradient,
                                      const EvaluatedMap& evaluated,
                                      const std::set<Configuration>& queued) {
  std::vector<Configuration> out;
  if (gradient.is_zero()) {
    for (auto& n : neighbors(space, c))
      if (available(space, n, evaluated, queued)) out.push_back(std::move(n));
    return out;
  }

  const auto ref_it = evaluated.find(c);
  std::vector<std::size_t> axes;
  for (std::size_t i = 0; i < space.dims(); ++i)
    if (space.params()[i].cardinality() > 1 && gradient.v[i] != 0.0) axes.push_back(i);
  std::stable_sort(axes.begin(), axes.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(gradient.v[a]) > std::abs(gradient.v[b]);
  });

  for (std::size_t i : axes) {
    const auto& p = space.params()[i];
    const uint32_t m = static_cast<uint32_t>(p.cardinality());
    Configuration next = c;
    if (!p.is_categorical()) {
      if (gradient.v[i] > 0 && c.idx[i] + 1 < m)
        next.idx[i] = c.idx[i] + 1;
      else if (gradient.v[i] < 0 && c.idx[i] > 0)
        next.idx[i] = c.idx[i] - 1;
      else
        continue;
      if (available(space, next, evaluated, queued)) push_unique(out, std::move(next));
      continue;
    }

    // Categorical: head for the category of the best-scoring nearby point that
    // differs on this axis when it beats the reference; otherwise the lowest
    // unevaluated category.
    const EvalRecord* best = nullptr;
    for (const auto& nc : gradient.nearest) {
      if (nc.idx[i] == c.idx[i]) continue;
      const auto& rec = evaluated.at(nc);
      if (!best || rec.acc_hat > best->acc_hat) best = &rec;
    }
    const double ref = ref_it != evaluated.end()
                           ? ref_it->second.acc_hat
                           : evaluated.at(gradient.nearest.front()).acc_hat;
    if (best && best->acc_hat > ref) {
      next.idx[i] = best->config.idx[i];
      if (available(space, next, evaluated, queued)) push_unique(out, std::move(next));
      continue;
    }
    if (gradient.v[i] < 0) continue;
    for (uint32_t v = 0; v < m; ++v) {
      if (v == c.idx[i]) continue;
      next.idx[i] = v;
      if (available(space, next, evaluated, queued)) {
        push_unique(out, next);
        break;
      }
    }
  }
  return out;
}

std::vector<Configuration> lateral_expand(const ConfigSpace& space, const Configuration& c,
                                          const EvaluatedMap& evaluated,
                                          double low_gradient_quantile,
                                          const std::set<Configuration>& queued,
                                          std::size_t k_neighbors, double exponent) {
  std::vector<std::size_t> axes;
  for (std::size_t i = 0; i < space.dims(); ++i)
    if (space.params()[i].cardinality() > 1) axes.push_back(i);
  if (axes.empty()) return {};

  std::vector<bool> low(space.dims(), true);
  if (low_gradient_quantile < 1.0) {
    const auto g = idw_gradient(space, c, evaluated, k_neighbors, exponent);
    std::vector<double> mags;
    for (std::size_t i : axes) mags.push_back(std::abs(g.v[i]));
    std::sort(mags.begin(), mags.end());
    // Nearest-rank quantile.
    auto r = static_cast<std::size_t>(
        std::ceil(low_gradient_quantile * static_cast<double>(mags.size())));
    const double threshold = mags[std::max<std::size_t>(r, 1) - 1];
    for (std::size_t i : axes) low[i] = std::abs(g.v[i]) <= threshold;
  }

  std::vector<Configuration> out;
  for (auto& n : neighbors(space, c)) {
    std::size_t axis = 0;
    while (n.idx[axis] == c.idx[axis]) ++axis;
    if (low[axis] && available(space, n, evaluated, queued)) out.push_back(std::move(n));
  }
  return out;
}

SearchResult compass_v_search(const ConfigSpace& space, const AccuracyOracle& oracle,
                              const SearchParams& params, const BudgetSchedule& schedule,
                              uint64_t seed) {
  params.validate();
  schedule.validate();

  SearchResult res;
  std::deque<Configuration> queue;
  std::set<Configuration> queued;
  auto enqueue = [&](std::vector<Configuration> cs) {
    for (auto& c : cs)
      if (!res.evaluated.count(c) && queued.insert(c).second) queue.push_back(std::move(c));
    res.stats.max_queue = std::max(res.stats.max_queue, queue.size());
  };

  auto evaluate = [&](const Configuration& c) -> const EvalRecord& {
    Rng rng = make_rng(eval_stream_seed(seed, space, c));
    EvalRecord rec = progressive_evaluate(oracle, c, schedule, params.tau, rng);
    res.stats.evaluations++;
    res.stats.samples += rec.samples_spent;
    if (rec.feasible) res.feasible.push_back(rec);
    return res.evaluated.emplace(c, std::move(rec)).first->second;
  };
  auto navigate = [&](const Configuration& c, bool feasible) {
    if (feasible) {
      ++res.stats.lateral_expansions;
      enqueue(lateral_expand(space, c, res.evaluated, params.low_gradient_quantile, queued,
                             params.k_neighbors, params.idw_exponent));
    } else {
      auto g = idw_gradient(space, c, res.evaluated, params.k_neighbors, params.idw_exponent);
      ++res.stats.hill_climb_steps;
      auto cands = hill_climb(space, c, g, res.evaluated, queued);
      if (params.hill_climb_width > 0 && !g.is_zero() && cands.size() > params.hill_climb_width)
        cands.resize(params.hill_climb_width);
      enqueue(std::move(cands));
    }
  };
  auto record = [&](const EvalRecord& rec) {
    TraceRow row;
    row.order = res.stats.evaluations;
    row.config = rec.config;
    row.classification = rec.classification;
    row.feasible = rec.feasible;
    row.samples = rec.samples_spent;
    row.cumulative_samples = res.stats.samples;
    row.feasible_found = res.feasible.size();
    row.queue_size = queue.size();
    res.trace.push_back(std::move(row));
  };

  for (std::size_t round = 0; round <= params.restart_rounds; ++round) {
    if (round > 0) {
      if (!res.feasible.empty() || res.evaluated.size() == space.size()) break;
      ++res.stats.rounds;
    }
    auto seeds = lhs_sample(space, params.n_init, derive_seed(seed, "lhs", {round}));
    std::erase_if(seeds, [&](const Configuration& c) { return res.evaluated.count(c) > 0; });
    res.stats.lhs_seeds += seeds.size();

    // The whole seed batch is evaluated before any navigation so the first
    // gradient estimates already see every seed.
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const auto& rec = evaluate(seeds[i]);
      res.stats.max_queue = std::max(res.stats.max_queue, seeds.size() - i - 1);
      record(rec);
      res.trace.back().queue_size = seeds.size() - i - 1;
    }
    for (const auto& c : seeds) navigate(c, res.evaluated.at(c).feasible);

    while (!queue.empty()) {
      Configuration c = std::move(queue.front());
      queue.pop_front();
      queued.erase(c);
      const auto& rec = evaluate(c);
      navigate(c, rec.feasible);
      record(rec);
    }
  }
  return res;
}

GridResult grid_search_oracle(const ConfigSpace& space, const AccuracyOracle& oracle,
                              double tau, const BudgetSchedule& schedule, uint64_t seed) {
  schedule.validate();
  GridResult g;
  const BudgetSchedule full{{schedule.max_budget()}, schedule.z};
  for_each_config(space, [&](const Configuration& c) {
    Rng rng = make_rng(eval_stream_seed(seed, space, c));
    EvalRecord rec = progressive_evaluate(oracle, c, full, tau, rng);
    // Grid ground truth is the point estimate at B_max.
    rec.feasible = rec.acc_hat >= tau;
    if (rec.feasible) g.feasible.insert(c);
    g.samples += rec.samples_spent;
    g.records.push_back(std::move(rec));

    Rng prng = make_rng(eval_stream_seed(seed, space, c));
    EvalRecord prog = progressive_evaluate(oracle, c, schedule, tau, prng);
    if (prog.feasible) g.progressive_feasible.insert(c);
    g.progressive_samples += prog.samples_spent;
  });
  return g;
}

SearchMetrics recall_and_savings(const std::set<Configuration>& compass_feasible,
                                 uint64_t compass_samples,
                                 const std::set<Configuration>& grid_feasible,
                                 uint64_t grid_samples) {
  SearchMetrics m;
  m.truth = grid_feasible.size();
  m.compass_samples = compass_samples;
  m.grid_samples = grid_samples;
  for (const auto& c : compass_feasible) {
    if (grid_feasible.count(c))
      ++m.found;
    else
      ++m.false_positives;
  }
  m.recall = m.truth == 0 ? 1.0 : static_cast<double>(m.found) / static_cast<double>(m.truth);
  m.savings = grid_samples == 0
                  ? 0.0
                  : 1.0 - static_cast<double>(compass_samples) / static_cast<double>(grid_samples);
  return m;
}

SearchMetrics recall_and_savings(const SearchResult& compass, const GridResult& grid) {
  return recall_and_savings(compass.feasible_configs(), compass.stats.samples, grid.feasible,
                            grid.samples);
}

}  // namespace compasskit

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "compasskit/scenario.hpp"
#include "compasskit/searchv.hpp"
#include "helpers.hpp"

using namespace compasskit;
using namespace testutil;

namespace {

EvalRecord rec(const Configuration& c, double acc) {
  EvalRecord r;
  r.config = c;
  r.acc_hat = acc;
  r.trials = 100;
  return r;
}

AccuracyOracle table_of(const ConfigSpace& s, const std::function<double(const Configuration&)>& f) {
  std::vector<std::pair<Configuration, double>> rows;
  for (const auto& c : enumerate(s)) rows.push_back({c, f(c)});
  return AccuracyOracle::table(s, rows);
}

std::set<Configuration> truth(const ConfigSpace& s, const AccuracyOracle& o, double tau) {
  std::set<Configuration> out;
  for (const auto& c : enumerate(s))
    if (o.true_accuracy(c) >= tau) out.insert(c);
  return out;
}

}  // namespace

TEST_CASE("idw gradient: single neighbor") {
  ConfigSpace s({ordinal_n("a", 5), ordinal_n("b", 5)});
  EvaluatedMap ev;
  ev[cfg({2, 2})] = rec(cfg({2, 2}), 0.5);
  ev[cfg({3, 2})] = rec(cfg({3, 2}), 0.6);
  auto g = idw_gradient(s, cfg({2, 2}), ev, 5, 2.0);
  CHECK(g.v[0] == doctest::Approx(0.4));
  CHECK(g.v[1] == 0.0);
  CHECK(g.support == 1);
}

TEST_CASE("idw gradient: symmetric neighbors cancel") {
  ConfigSpace s({ordinal_n("a", 5)});
  EvaluatedMap ev;
  ev[cfg({2})] = rec(cfg({2}), 0.5);
  ev[cfg({1})] = rec(cfg({1}), 0.6);
  ev[cfg({3})] = rec(cfg({3}), 0.6);
  auto g = idw_gradient(s, cfg({2}), ev, 5, 2.0);
  CHECK(g.v[0] == doctest::Approx(0.0));
  CHECK(g.is_zero());
}

TEST_CASE("idw gradient: inverse-square weights") {
  ConfigSpace s({ordinal_n("a", 9)});
  EvaluatedMap ev;
  ev[cfg({0})] = rec(cfg({0}), 0.2);
  ev[cfg({2})] = rec(cfg({2}), 0.3);  // d = 0.25, slope 0.4
  ev[cfg({4})] = rec(cfg({4}), 0.3);  // d = 0.5, slope 0.2
  ev[cfg({8})] = rec(cfg({8}), 0.9);  // d = 1.0, slope 0.7
  auto g = idw_gradient(s, cfg({0}), ev, 5, 2.0);
  CHECK(g.v[0] == doctest::Approx((16 * 0.4 + 4 * 0.2 + 1 * 0.7) / 21.0));
  CHECK(g.nearest == std::vector<Configuration>{cfg({2}), cfg({4}), cfg({8})});
}

TEST_CASE("idw gradient: k nearest only") {
  ConfigSpace s({ordinal_n("a", 9)});
  EvaluatedMap ev;
  ev[cfg({0})] = rec(cfg({0}), 0.2);
  ev[cfg({2})] = rec(cfg({2}), 0.3);
  ev[cfg({8})] = rec(cfg({8}), 0.0);
  auto g = idw_gradient(s, cfg({0}), ev, 1, 2.0);
  CHECK(g.support == 1);
  CHECK(g.v[0] == doctest::Approx(0.4));
}

TEST_CASE("hill climb") {
  ConfigSpace s({ordinal_n("a", 3), ordinal_n("b", 3), ordinal_n("c", 3)});
  EvaluatedMap ev;
  ev[cfg({1, 1, 1})] = rec(cfg({1, 1, 1}), 0.3);

  GradientEstimate g;
  g.v = {0.0, 0.0, 0.3};
  CHECK(hill_climb(s, cfg({1, 1, 1}), g, ev, {}) == std::vector<Configuration>{cfg({1, 1, 2})});

  g.v = {-0.1, 0.0, 0.3};
  CHECK(hill_climb(s, cfg({1, 1, 1}), g, ev, {}) ==
        std::vector<Configuration>{cfg({1, 1, 2}), cfg({0, 1, 1})});

  // upper bound on axis c: skipped
  ev[cfg({1, 1, 2})] = rec(cfg({1, 1, 2}), 0.3);
  g.v = {0.2, 0.0, 0.3};
  CHECK(hill_climb(s, cfg({1, 1, 2}), g, ev, {}) == std::vector<Configuration>{cfg({2, 1, 2})});

  // already queued: dropped
  CHECK(hill_climb(s, cfg({1, 1, 2}), g, ev, {cfg({2, 1, 2})}).empty());

  g.v = {0.0, 0.0, 0.0};
  auto all = hill_climb(s, cfg({1, 1, 1}), g, ev, {});
  CHECK(all.size() == 5);  // six neighbors, one evaluated
}

TEST_CASE("lateral expansion") {
  ConfigSpace s({ordinal_n("a", 3), ordinal_n("b", 3), ordinal_n("c", 3), ordinal_n("d", 3)});
  const auto c = cfg({1, 1, 1, 1});
  EvaluatedMap ev;
  ev[c] = rec(c, 0.5);

  CHECK(lateral_expand(s, c, ev, 1.0, {}).size() == 8);

  for (uint32_t i = 0; i < 4; ++i) {
    auto n = c;
    n.idx[i] = 2;
    ev[n] = rec(n, 0.5 + 0.1 * (i + 1));
  }
  auto half = lateral_expand(s, c, ev, 0.5, {});
  REQUIRE(half.size() == 2);
  CHECK(half[0] == cfg({0, 1, 1, 1}));
  CHECK(half[1] == cfg({1, 0, 1, 1}));

  for (uint32_t i = 0; i < 4; ++i) {
    auto n = c;
    n.idx[i] = 0;
    ev[n] = rec(n, 0.5);
  }
  CHECK(lateral_expand(s, c, ev, 1.0, {}).empty());
}

TEST_CASE("lateral expansion with equal gradients expands every axis") {
  ConfigSpace s({ordinal_n("a", 3), ordinal_n("b", 3)});
  const auto c = cfg({1, 1});
  EvaluatedMap ev;
  ev[c] = rec(c, 0.5);
  ev[cfg({2, 1})] = rec(cfg({2, 1}), 0.6);
  ev[cfg({1, 2})] = rec(cfg({1, 2}), 0.6);
  CHECK(lateral_expand(s, c, ev, 0.5, {}).size() == 2);
}

TEST_CASE("search: everything feasible") {
  ConfigSpace s({ordinal_n("a", 5), categorical("b", 3), ordinal_n("c", 4)});
  auto o = table_of(s, [](const Configuration&) { return 0.95; });
  SearchParams p;
  p.tau = 0.5;
  auto r = compass_v_search(s, o, p, BudgetSchedule{}, 3);
  CHECK(r.feasible.size() == s.size());
  CHECK(r.stats.evaluations == s.size());
}

TEST_CASE("search: nothing feasible") {
  ConfigSpace s({ordinal_n("a", 5), categorical("b", 3), ordinal_n("c", 4)});
  auto o = table_of(s, [](const Configuration&) { return 0.05; });
  SearchParams p;
  p.tau = 0.5;
  p.restart_rounds = 3;
  auto r = compass_v_search(s, o, p, BudgetSchedule{}, 3);
  CHECK(r.feasible.empty());
  CHECK(r.stats.evaluations <= s.size());
}

TEST_CASE("grid oracle sample count") {
  auto sc = load_scenario(COMPASSKIT_SOURCE_DIR "/scenarios/rag_like.scenario");
  REQUIRE(sc.space.size() == 360);
  auto g = grid_search_oracle(sc.space, sc.oracle, 0.5, sc.schedule, 1);
  CHECK(g.samples == 36000);
  CHECK(g.records.size() == 360);
}

TEST_CASE("recall and savings") {
  std::set<Configuration> a{cfg({0}), cfg({1})};
  auto m = recall_and_savings(a, 50, a, 100);
  CHECK(m.recall == 1.0);
  CHECK(m.savings == 0.5);
  auto half = recall_and_savings({cfg({0})}, 100, a, 100);
  CHECK(half.recall == 0.5);
  CHECK(half.savings == 0.0);
  CHECK(recall_and_savings({}, 10, {}, 100).recall == 1.0);
}

TEST_CASE("search on the rag-like oracle at f around one third") {
  auto sc = load_scenario(COMPASSKIT_SOURCE_DIR "/scenarios/rag_like.scenario");
  // pick the tau whose true feasible fraction is closest to 1/3
  auto all = enumerate(sc.space);
  std::vector<double> accs;
  for (const auto& c : all) accs.push_back(sc.oracle.true_accuracy(c));
  std::sort(accs.rbegin(), accs.rend());
  const double tau = accs[all.size() / 3];
  auto o = sc.oracle.with_margin({tau, 0.15});
  auto p = sc.search;
  p.tau = tau;
  auto r = compass_v_search(sc.space, o, p, sc.schedule, 99);
  auto g = grid_search_oracle(sc.space, o, tau, sc.schedule, 99);
  auto m = recall_and_savings(r, g);
  CHECK(m.recall == 1.0);
  CHECK(m.savings > 0.0);
}

TEST_CASE("property: search invariants on random connected regions") {
  ConfigSpace s({ordinal_n("a", 6), ordinal_n("b", 5), categorical("c", 3), ordinal_n("d", 4)});
  const BudgetSchedule sched;
  for (uint64_t trial = 0; trial < 60; ++trial) {
    std::mt19937_64 gen(trial);
    // grow a connected feasible blob by random neighbor accretion
    auto all = enumerate(s);
    std::set<Configuration> blob{all[gen() % all.size()]};
    const std::size_t target = 1 + gen() % (s.size() / 2);
    while (blob.size() < target) {
      auto it = blob.begin();
      std::advance(it, gen() % blob.size());
      auto n = neighbors(s, *it);
      blob.insert(n[gen() % n.size()]);
    }
    auto o = table_of(s, [&](const Configuration& c) { return blob.count(c) ? 0.8 : 0.2; });
    SearchParams p;
    p.tau = 0.5;
    p.n_init = 8;
    p.restart_rounds = 2;
    auto r = compass_v_search(s, o, p, sched, trial + 1000);
    auto again = compass_v_search(s, o, p, sched, trial + 1000);

    CHECK(r.feasible_configs() == again.feasible_configs());
    CHECK(r.stats.samples == again.stats.samples);
    CHECK(r.stats.evaluations == again.stats.evaluations);

    CHECK(r.trace.size() == r.evaluated.size());
    std::set<Configuration> seen;
    for (const auto& row : r.trace) CHECK(seen.insert(row.config).second);
    CHECK(r.stats.evaluations <= s.size());
    CHECK(r.stats.samples <= s.size() * sched.max_budget());

    if (!r.feasible.empty()) CHECK(r.feasible_configs() == blob);
  }
}

TEST_CASE("property: truth helper agrees with grid at B_max on separated oracles") {
  ConfigSpace s({ordinal_n("a", 4), ordinal_n("b", 4)});
  auto o = table_of(s, [](const Configuration& c) { return c.idx[0] + c.idx[1] >= 3 ? 0.9 : 0.1; });
  auto g = grid_search_oracle(s, o, 0.5, BudgetSchedule{}, 4);
  CHECK(g.feasible == truth(s, o, 0.5));
  CHECK(g.progressive_feasible == g.feasible);
  CHECK(g.progressive_samples < g.samples);
}

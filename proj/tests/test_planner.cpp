#include <doctest.h>

#include <cmath>
#include <random>

#include "compasskit/planner.hpp"
#include "helpers.hpp"

using namespace compasskit;
using namespace testutil;

TEST_CASE("deterministic service time") {
  ServiceModel m(line_space(1));
  m.set(cfg({0}), LatencyDist::deterministic(200));
  auto p = profile_latency(m, cfg({0}), 100, 1);
  CHECK(p.mean_ms == 200);
  CHECK(p.p95_ms == 200);
  CHECK_THROWS_AS(LatencyDist::deterministic(0), ValidationError);
}

TEST_CASE("lognormal sample mean matches the analytic mean") {
  auto d = LatencyDist::lognormal_median(180, 0.35);
  const double analytic = 180 * std::exp(0.35 * 0.35 / 2);
  CHECK(d.mean() == doctest::Approx(analytic));
  ServiceModel m(line_space(1));
  m.set(cfg({0}), d);
  auto p = profile_latency(m, cfg({0}), 10000, 7);
  CHECK(std::abs(p.mean_ms - analytic) / analytic < 0.02);
}

TEST_CASE("lognormal fit from mean and p95") {
  auto d = LatencyDist::lognormal_mean_p95(200, 320);
  CHECK(d.family == LatencyDist::Family::Lognormal);
  CHECK(d.mean() == doctest::Approx(200));
  CHECK(std::exp(d.mu + 1.6448536269514722 * d.sigma) == doctest::Approx(320));
  CHECK(LatencyDist::lognormal_mean_p95(150, 150).family == LatencyDist::Family::Deterministic);
  CHECK_THROWS_AS(LatencyDist::lognormal_mean_p95(200, 100), ValidationError);
  CHECK_THROWS_AS(LatencyDist::lognormal_mean_p95(1, 1000), ValidationError);
}

TEST_CASE("empirical traces") {
  auto d = LatencyDist::empirical({10, 20, 30});
  CHECK(d.mean() == doctest::Approx(20));
  CHECK(d.draw(0.0, 0.0) == 10);
  CHECK(d.draw(0.0, 0.999) == 30);
  CHECK_THROWS_AS(LatencyDist::empirical({}), ValidationError);
  CHECK_THROWS_AS(LatencyDist::empirical({1, -1}), ValidationError);
}

TEST_CASE("nearest-rank percentile") {
  std::vector<double> v;
  for (int i = 100; i >= 1; --i) v.push_back(i);
  CHECK(nearest_rank(v, 0.95) == 95);
  CHECK(nearest_rank(v, 0.5) == 50);
  CHECK(nearest_rank(v, 1.0) == 100);
  CHECK(nearest_rank({7}, 0.95) == 7);
}

TEST_CASE("profiling requires 100 runs and is deterministic") {
  ServiceModel m(line_space(2));
  m.set(cfg({0}), LatencyDist::lognormal_median(100, 0.3));
  CHECK_THROWS_AS(profile_latency(m, cfg({0}), 99, 1), ValidationError);
  CHECK_THROWS_AS(profile_latency(m, cfg({1}), 100, 1), ValidationError);
  auto a = profile_latency(m, cfg({0}), 500, 3, true);
  auto b = profile_latency(m, cfg({0}), 500, 3, true);
  CHECK(a.raw == b.raw);
  CHECK(a.raw.size() == 500);
  CHECK(a.mean_ms <= a.p95_ms);
}

TEST_CASE("latency formula") {
  ConfigSpace s({categorical("g", 2), ordinal_n("k", 3)});
  LatencyFormula f;
  f.family = LatencyDist::Family::Lognormal;
  f.base_ms = 10;
  f.axis_coeff_ms = {0, 40};
  f.category_offsets_ms = {{5, 50}, {}};
  f.p95_ratio = 1.5;
  auto m = build_service_model(s, f);
  CHECK(m.dist(cfg({0, 0})).mean() == doctest::Approx(15));
  CHECK(m.dist(cfg({1, 2})).mean() == doctest::Approx(100));
  CHECK(m.dist(cfg({1, 1})).mean() == doctest::Approx(80));
  f.base_ms = -100;
  CHECK_THROWS_AS(build_service_model(s, f), ValidationError);
}

namespace {

ProfiledConfig pc(uint32_t i, double acc, double mean, double p95) {
  ProfiledConfig p;
  p.config = cfg({i});
  p.accuracy = acc;
  p.profile.mean_ms = mean;
  p.profile.p95_ms = p95;
  return p;
}

bool dominates(const ProfiledConfig& a, const ProfiledConfig& b) {
  return a.accuracy >= b.accuracy && a.profile.mean_ms <= b.profile.mean_ms &&
         (a.accuracy > b.accuracy || a.profile.mean_ms < b.profile.mean_ms);
}

}  // namespace

TEST_CASE("pareto front examples") {
  auto f = pareto_front({pc(0, 0.76, 120, 200), pc(1, 0.82, 300, 450), pc(2, 0.80, 400, 600)});
  REQUIRE(f.size() == 2);
  CHECK(f[0].config == cfg({0}));
  CHECK(f[1].config == cfg({1}));
  CHECK(pareto_front({pc(0, 0.5, 10, 20)}).size() == 1);
  CHECK(pareto_front({}).empty());
  // exact ties keep one representative
  CHECK(pareto_front({pc(1, 0.5, 10, 20), pc(0, 0.5, 10, 20)}).size() == 1);
  CHECK(pareto_front({pc(1, 0.5, 10, 20), pc(0, 0.5, 10, 20)})[0].config == cfg({0}));
}

TEST_CASE("property: pareto soundness by brute force") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> acc(0.5, 0.95), lat(50, 800);
  for (int t = 0; t < 300; ++t) {
    std::vector<ProfiledConfig> cands;
    const int n = 1 + static_cast<int>(gen() % 40);
    for (int i = 0; i < n; ++i) {
      // coarse values so ties and duplicates happen
      double a = std::round(acc(gen) * 50) / 50, m = std::round(lat(gen) / 25) * 25;
      cands.push_back(pc(static_cast<uint32_t>(i), a, m, m * 1.5));
    }
    auto front = pareto_front(cands);
    std::set<Configuration> kept;
    for (const auto& e : front) kept.insert(e.config);
    for (std::size_t i = 1; i < front.size(); ++i) {
      CHECK(front[i - 1].profile.mean_ms < front[i].profile.mean_ms);
      CHECK(front[i - 1].accuracy < front[i].accuracy);
    }
    for (const auto& c : cands) {
      bool dominated = false;
      for (const auto& d : cands) dominated = dominated || dominates(d, c);
      if (kept.count(c.config)) {
        CHECK_FALSE(dominated);
      } else {
        bool covered = false;
        for (const auto& e : front) {
          ProfiledConfig k = pc(0, e.accuracy, e.profile.mean_ms, 0);
          covered = covered || dominates(k, c) ||
                    (k.accuracy == c.accuracy && k.profile.mean_ms == c.profile.mean_ms);
        }
        CHECK(covered);
      }
    }
  }
}

TEST_CASE("queuing slack") {
  CHECK(queuing_slack(1000, 700) == 300);
  CHECK(queuing_slack(500, 700) == -200);
}

TEST_CASE("upscale threshold examples") {
  CHECK(upscale_threshold(1000, 200, 120) == 6);
  CHECK(upscale_threshold(1000, 700, 500) == 0);
  CHECK(upscale_threshold(1500, 700, 500) == 1);
  CHECK(upscale_threshold(1000, 200, 200) == 4);
  CHECK_THROWS_AS(upscale_threshold(700, 700, 500), std::invalid_argument);
  CHECK_THROWS_AS(upscale_threshold(1000, 700, 0), std::invalid_argument);
}

TEST_CASE("downscale threshold examples") {
  CHECK(downscale_threshold(300.0, 100.0, 500.0) == 0);
  CHECK(downscale_threshold(550.0, 50.0, 300.0) == 1);
  CHECK(downscale_threshold(800.0, 0.0, 120.0) == upscale_threshold(1000, 200, 120));
  CHECK(downscale_threshold(300.0, 300.0, 100.0) == 0);
  CHECK(downscale_threshold(300.0, 400.0, 100.0) == 0);
  CHECK(downscale_threshold(1000.0, 450.0, 50.0, 300.0) == 1);
  CHECK(downscale_threshold(1000.0, 200.0, 0.0, 120.0) == 6);
}

TEST_CASE("policy over the three-rung ladder") {
  auto p = build_policy(ladder3(), 1000, 50, 0, 5);
  REQUIRE(p.entries.size() == 3);
  CHECK(p.entries[0].upscale_threshold == 6);
  CHECK(p.entries[1].upscale_threshold == 1);
  CHECK(p.entries[2].upscale_threshold == 0);
  CHECK(*p.entries[0].downscale_threshold == 1);
  CHECK(*p.entries[1].downscale_threshold == 0);
  CHECK_FALSE(p.entries[2].downscale_threshold.has_value());
  CHECK(p.entries[0].slack_ms == 800);
  CHECK(p.excluded.empty());
  CHECK(p.merged.empty());
  CHECK(p.front.size() == 3);
}

TEST_CASE("exclusion soundness") {
  auto p = build_policy(ladder3(), 500, 50, 0, 5);
  REQUIRE(p.entries.size() == 2);
  REQUIRE(p.excluded.size() == 1);
  for (const auto& e : p.excluded) CHECK(e.profile.p95_ms >= 500);
  for (const auto& e : p.entries) CHECK(e.profile.p95_ms < 500);

  auto edge = build_policy(ladder3(), 700, 50, 0, 5);
  CHECK(edge.excluded.size() == 1);

  CHECK_THROWS_AS(build_policy(ladder3(), 150, 15, 0, 5), SloInfeasibleError);
  CHECK_THROWS_AS(build_policy(ladder3(), 200, 15, 0, 5), SloInfeasibleError);
}

TEST_CASE("degenerate rungs are merged") {
  std::vector<ParetoEntry> f{entry(0, 0.70, 100, 150), entry(1, 0.72, 101, 152),
                             entry(2, 0.80, 300, 400)};
  auto p = build_policy(f, 1000, 0, 0, 5);
  // N-up 8 and 8: the faster of the pair is dropped
  REQUIRE(p.entries.size() == 2);
  CHECK(p.merged.size() == 1);
  CHECK(p.merged[0].config == cfg({0}));
  CHECK(p.entries[0].upscale_threshold > p.entries[1].upscale_threshold);
}

TEST_CASE("policy input validation") {
  CHECK_THROWS_AS(build_policy(ladder3(), 0, 0, 0, 5), ValidationError);
  CHECK_THROWS_AS(build_policy(ladder3(), 1000, -1, 0, 5), ValidationError);
  CHECK_THROWS_AS(build_policy(ladder3(), 1000, 0, -1, 5), ValidationError);
}

TEST_CASE("property: ladder ordering and conservatism on random fronts") {
  std::mt19937_64 gen(29);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int t = 0; t < 2000; ++t) {
    std::vector<ParetoEntry> f;
    double mean = 20 + 100 * U(gen), acc = 0.5;
    const int n = 1 + static_cast<int>(gen() % 8);
    for (int i = 0; i < n; ++i) {
      f.push_back(entry(static_cast<uint32_t>(i), acc, mean, mean * (1.0 + U(gen))));
      mean += 1 + 200 * U(gen);
      acc += 0.01 + 0.05 * U(gen);
    }
    const double L = 100 + 3000 * U(gen), h = 0.2 * L * U(gen);
    SwitchingPolicy p;
    try {
      p = build_policy(f, L, h, 0, 5);
    } catch (const SloInfeasibleError&) {
      for (const auto& e : f) CHECK(e.profile.p95_ms >= L);
      continue;
    }
    CHECK(p.entries.size() + p.excluded.size() + p.merged.size() == f.size());
    for (const auto& e : p.excluded) CHECK(e.profile.p95_ms >= L);
    for (std::size_t k = 0; k < p.entries.size(); ++k) {
      const auto& e = p.entries[k];
      CHECK(e.upscale_threshold == upscale_threshold(L, e.profile.p95_ms, e.profile.mean_ms));
      if (k + 1 < p.entries.size()) {
        const auto& nx = p.entries[k + 1];
        CHECK(e.upscale_threshold > nx.upscale_threshold);
        REQUIRE(e.downscale_threshold.has_value());
        CHECK(*e.downscale_threshold <= nx.upscale_threshold);
        CHECK(*e.downscale_threshold ==
              downscale_threshold(L, nx.profile.p95_ms, h, nx.profile.mean_ms));
      } else {
        CHECK_FALSE(e.downscale_threshold.has_value());
      }
    }
  }
}

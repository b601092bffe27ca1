#include <doctest.h>

#include <cmath>

#include "compasskit/evalcore.hpp"
#include "helpers.hpp"

using namespace compasskit;
using namespace testutil;

namespace {

// Frozen reference values of the Wilson score interval, computed offline
// with 50-digit arithmetic.
struct WilsonCase {
  uint32_t s, n;
  double z, lo, hi;
};
const WilsonCase kWilson[] = {
    {18, 20, 1.96, 0.69896179358820664, 0.97213410601584678},
    {13, 20, 1.96, 0.43285051021946466, 0.81881045213205537},
    {37, 50, 1.96, 0.60446578011000086, 0.84128620348632615},
    {75, 100, 2.576, 0.62531062386319544, 0.84357516546139296},
};

AccuracyOracle constant_oracle(double p) {
  auto s = line_space(1);
  return AccuracyOracle::table(s, {{cfg({0}), p}});
}

}  // namespace

TEST_CASE("wilson interval reference values") {
  for (const auto& w : kWilson) {
    auto [lo, hi] = wilson_interval(w.s, w.n, w.z);
    CHECK(lo == doctest::Approx(w.lo).epsilon(1e-12));
    CHECK(hi == doctest::Approx(w.hi).epsilon(1e-12));
  }
  CHECK(wilson_interval(0, 20, 1.96).first == 0.0);
  CHECK(wilson_interval(0, 20, 1.96).second == doctest::Approx(0.16113012549493322).epsilon(1e-12));
  CHECK(wilson_interval(20, 20, 1.96).second == 1.0);
  CHECK(wilson_interval(20, 20, 1.96).first == doctest::Approx(0.83886987450506678).epsilon(1e-12));
}

TEST_CASE("budget schedule validation") {
  BudgetSchedule b;
  CHECK_NOTHROW(b.validate());
  b.levels = {20, 20};
  CHECK_THROWS_AS(b.validate(), ValidationError);
  b.levels = {};
  CHECK_THROWS_AS(b.validate(), ValidationError);
  b.levels = {20, 50};
  b.z = 0;
  CHECK_THROWS_AS(b.validate(), ValidationError);
}

TEST_CASE("constant oracle") {
  ConfigSpace s({ordinal_n("a", 3), categorical("b", 2)});
  AccuracyOracle::Coefficients co;
  co.base = 0.7;
  auto o = AccuracyOracle::parametric(s, OracleFamily::RagLike, co);
  for (const auto& c : enumerate(s)) CHECK(o.true_accuracy(c) == doctest::Approx(0.7));
}

TEST_CASE("table oracle rejects missing configurations") {
  ConfigSpace s({ordinal_n("a", 2)});
  auto o = AccuracyOracle::table(s, {{cfg({0}), 0.4}});
  CHECK(o.true_accuracy(cfg({0})) == 0.4);
  CHECK_THROWS_AS(o.true_accuracy(cfg({1})), ValidationError);
}

TEST_CASE("margin remap keeps the feasible set and clears the band") {
  ConfigSpace s({ordinal_n("a", 11)});
  std::vector<std::pair<Configuration, double>> rows;
  for (uint32_t i = 0; i < 11; ++i) rows.push_back({cfg({i}), 0.05 + 0.09 * i});
  auto o = AccuracyOracle::table(s, rows);
  const double tau = 0.5;
  auto m = o.with_margin({tau, 0.15});
  double prev = -1;
  for (uint32_t i = 0; i < 11; ++i) {
    double raw = o.true_accuracy(cfg({i}));
    double p = m.true_accuracy(cfg({i}));
    CHECK((raw >= tau) == (p >= tau));
    CHECK((p <= tau - 0.15 || p >= tau + 0.15));
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(p > prev);
    prev = p;
  }
}

TEST_CASE("sample_trials extremes and concentration") {
  auto one = constant_oracle(1.0);
  auto zero = constant_oracle(0.0);
  Rng rng(1);
  CHECK(sample_trials(one, cfg({0}), 100, rng) == 100);
  CHECK(sample_trials(zero, cfg({0}), 100, rng) == 0);

  auto half = constant_oracle(0.5);
  int within = 0;
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    Rng r(seed);
    double frac = sample_trials(half, cfg({0}), 10000, r) / 10000.0;
    if (std::abs(frac - 0.5) <= 0.02) ++within;
  }
  CHECK(within >= 990);
}

TEST_CASE("progressive evaluation stops early on clear cases") {
  BudgetSchedule sched;
  auto o = constant_oracle(0.95);
  int early = 0;
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    Rng r(seed);
    auto rec = progressive_evaluate(o, cfg({0}), sched, 0.5, r);
    if (rec.samples_spent == 20 && rec.classification == Classification::Feasible) ++early;
  }
  CHECK(early > 990);

  Rng r(3);
  auto rec = progressive_evaluate(constant_oracle(0.0), cfg({0}), sched, 0.5, r);
  CHECK(rec.classification == Classification::Infeasible);
  CHECK(rec.samples_spent == 20);
  CHECK(rec.stop_level == 0);
  CHECK(rec.ci_hi < 0.5);
}

TEST_CASE("progressive evaluation at p == tau usually exhausts") {
  BudgetSchedule sched;
  auto o = constant_oracle(0.75);
  int exhausted = 0;
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    Rng r(seed);
    auto rec = progressive_evaluate(o, cfg({0}), sched, 0.75, r);
    if (rec.samples_spent == 100) {
      ++exhausted;
      if (rec.classification == Classification::Uncertain)
        CHECK(rec.feasible == (rec.acc_hat >= 0.75));
    }
  }
  CHECK(exhausted > 500);
}

TEST_CASE("property: early-stop soundness, budget bounds, determinism") {
  BudgetSchedule sched;
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 3000; ++i) {
    double p = U(gen), tau = 0.05 + 0.9 * U(gen);
    auto o = constant_oracle(p);
    Rng r1(i), r2(i);
    auto rec = progressive_evaluate(o, cfg({0}), sched, tau, r1);
    auto again = progressive_evaluate(o, cfg({0}), sched, tau, r2);
    CHECK(rec.successes == again.successes);
    CHECK(rec.trials == again.trials);
    CHECK(rec.classification == again.classification);

    CHECK(rec.samples_spent == rec.trials);
    CHECK(rec.samples_spent <= sched.max_budget());
    CHECK(std::find(sched.levels.begin(), sched.levels.end(), rec.samples_spent) !=
          sched.levels.end());
    auto [lo, hi] = wilson_interval(rec.successes, rec.trials, sched.z);
    if (rec.classification == Classification::Feasible) {
      CHECK(lo > tau);
      CHECK(rec.feasible);
    }
    if (rec.classification == Classification::Infeasible) {
      CHECK(hi < tau);
      CHECK_FALSE(rec.feasible);
    }
    if (rec.classification == Classification::Uncertain) CHECK(rec.trials == 100);
  }
}

TEST_CASE("property: wilson coverage") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> U(0.02, 0.98);
  for (uint32_t n : {20u, 50u, 100u}) {
    int covered = 0;
    for (int i = 0; i < 10000; ++i) {
      double p = U(gen);
      std::binomial_distribution<uint32_t> B(n, p);
      auto [lo, hi] = wilson_interval(B(gen), n, 1.96);
      if (lo <= p && p <= hi) ++covered;
    }
    CHECK(covered >= 9300);
  }
}

TEST_CASE("property: misclassification beyond a 0.15 gap is rare") {
  BudgetSchedule sched;
  for (double gap : {-0.15, 0.15}) {
    for (double tau : {0.3, 0.5, 0.75}) {
      auto o = constant_oracle(tau + gap);
      int wrong = 0;
      for (uint64_t seed = 0; seed < 2000; ++seed) {
        Rng r(seed * 7919 + 1);
        auto rec = progressive_evaluate(o, cfg({0}), sched, tau, r);
        if (rec.feasible != (gap > 0)) ++wrong;
      }
      CHECK(wrong < 20);
    }
  }
}

TEST_CASE("per-configuration streams are independent of order") {
  ConfigSpace s({ordinal_n("a", 4)});
  CHECK(eval_stream_seed(1, s, cfg({0})) != eval_stream_seed(1, s, cfg({1})));
  CHECK(eval_stream_seed(1, s, cfg({2})) == eval_stream_seed(1, s, cfg({2})));
  CHECK(eval_stream_seed(1, s, cfg({2})) != eval_stream_seed(2, s, cfg({2})));
}

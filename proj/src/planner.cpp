#include "compasskit/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "compasskit/log.hpp"

namespace compasskit {

namespace {

constexpr double kZ95 = 1.6448536269514722;

}  // namespace

LatencyDist LatencyDist::deterministic(double ms) {
  if (!(ms > 0) || !std::isfinite(ms))
    throw ValidationError("deterministic service time must be > 0");
  LatencyDist d;
  d.family = Family::Deterministic;
  d.value = ms;
  return d;
}

LatencyDist LatencyDist::lognormal_median(double median_ms, double sigma) {
  if (!(median_ms > 0) || !(sigma >= 0))
    throw ValidationError("lognormal needs median > 0 and sigma >= 0");
  LatencyDist d;
  d.family = Family::Lognormal;
  d.mu = std::log(median_ms);
  d.sigma = sigma;
  return d;
}

LatencyDist LatencyDist::lognormal_mean_p95(double mean_ms, double p95_ms) {
  if (!(mean_ms > 0) || !(p95_ms >= mean_ms))
    throw ValidationError("lognormal fit needs 0 < mean <= p95");
  const double r = std::log(p95_ms / mean_ms);
  if (r == 0.0) return deterministic(mean_ms);
  // ln(p95/mean) = z*sigma - sigma^2/2; take the smaller root.
  const double disc = kZ95 * kZ95 - 2.0 * r;
  if (disc < 0) throw ValidationError("p95/mean ratio too large for a lognormal fit");
  const double sigma = kZ95 - std::sqrt(disc);
  LatencyDist d;
  d.family = Family::Lognormal;
  d.sigma = sigma;
  d.mu = std::log(mean_ms) - sigma * sigma / 2.0;
  return d;
}

LatencyDist LatencyDist::empirical(std::vector<double> samples_ms) {
  if (samples_ms.empty()) throw ValidationError("empirical latency trace is empty");
  for (double v : samples_ms)
    if (!(v > 0) || !std::isfinite(v))
      throw ValidationError("empirical latency trace has a non-positive sample");
  LatencyDist d;
  d.family = Family::Empirical;
  d.trace = std::move(samples_ms);
  return d;
}

double LatencyDist::sample(Rng& rng) const {
  std::normal_distribution<double> n(0.0, 1.0);
  const double z = family == Family::Lognormal ? n(rng) : 0.0;
  const double u = family == Family::Empirical ? uniform01(rng) : 0.0;
  return draw(z, u);
}

double LatencyDist::draw(double z, double u) const {
  switch (family) {
    case Family::Deterministic:
      return value;
    case Family::Lognormal:
      return std::exp(mu + sigma * z);
    case Family::Empirical: {
      auto i = static_cast<std::size_t>(u * static_cast<double>(trace.size()));
      return trace[std::min(i, trace.size() - 1)];
    }
  }
  return value;
}

double LatencyDist::mean() const {
  switch (family) {
    case Family::Deterministic:
      return value;
    case Family::Lognormal:
      return std::exp(mu + sigma * sigma / 2.0);
    case Family::Empirical:
      return std::accumulate(trace.begin(), trace.end(), 0.0) /
             static_cast<double>(trace.size());
  }
  return value;
}

const char* to_string(LatencyDist::Family f) {
  switch (f) {
    case LatencyDist::Family::Lognormal:
      return "lognormal";
    case LatencyDist::Family::Deterministic:
      return "deterministic";
    case LatencyDist::Family::Empirical:
      return "empirical-trace";
  }
  return "?";
}

LatencyDist::Family latency_family_from_string(const std::string& s) {
  if (s == "lognormal") return LatencyDist::Family::Lognormal;
  if (s == "deterministic") return LatencyDist::Family::Deterministic;
  if (s == "empirical-trace" || s == "empirical") return LatencyDist::Family::Empirical;
  throw ValidationError("unknown service model family '" + s + "'");
}

ServiceModel::ServiceModel(const ConfigSpace& space)
    : space_(space), by_rank_(space.lattice_size()) {}

void ServiceModel::set(const Configuration& c, LatencyDist dist) {
  if (!space_.contains(c))
    throw ValidationError("service model entry " + to_string(c) + " is not in the space");
  by_rank_[space_.rank(c)] = std::move(dist);
}

bool ServiceModel::has(const Configuration& c) const {
  return space_.contains(c) && by_rank_[space_.rank(c)].has_value();
}

const LatencyDist& ServiceModel::dist(const Configuration& c) const {
  if (!has(c))
    throw ValidationError("service model has no latency for " + to_string(c));
  return *by_rank_[space_.rank(c)];
}

ServiceModel build_service_model(const ConfigSpace& space, const LatencyFormula& f) {
  if (f.family == LatencyDist::Family::Empirical)
    throw ValidationError("latency formulas cannot produce empirical traces");
  ServiceModel model(space);
  for_each_config(space, [&](const Configuration& c) {
    double mean = f.base_ms;
    for (std::size_t i = 0; i < space.dims(); ++i) {
      if (i < f.category_offsets_ms.size() && !f.category_offsets_ms[i].empty()) {
        if (f.category_offsets_ms[i].size() != space.params()[i].cardinality())
          throw ValidationError("latency offsets for '" + space.params()[i].name +
                                "' must list one value per category");
        mean += f.category_offsets_ms[i][c.idx[i]];
      } else if (i < f.axis_coeff_ms.size()) {
        mean += f.axis_coeff_ms[i] * axis_coord(c.idx[i], space.params()[i].cardinality());
      }
    }
    if (!(mean > 0))
      throw ValidationError("latency formula gives non-positive mean for " + to_string(c));
    if (f.family == LatencyDist::Family::Deterministic)
      model.set(c, LatencyDist::deterministic(mean));
    else
      model.set(c, LatencyDist::lognormal_mean_p95(mean, mean * f.p95_ratio));
  });
  return model;
}

double nearest_rank(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("nearest_rank of empty sample");
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   values.end());
  return values[rank - 1];
}

LatencyProfile profile_latency(const ServiceModel& model, const Configuration& c,
                               std::size_t n_runs, uint64_t seed, bool keep_raw) {
  if (n_runs < 100) throw ValidationError("profiling needs at least 100 runs");
  const LatencyDist& dist = model.dist(c);
  Rng rng = make_rng(derive_seed(seed, "profile", {model.space().rank(c)}));
  std::vector<double> xs;
  for (int attempt = 0; attempt < 8; ++attempt) {
    while (xs.size() < n_runs) {
      double v = dist.sample(rng);
      if (!(v > 0) || !std::isfinite(v))
        throw std::logic_error("service model produced a non-positive sample");
      xs.push_back(v);
    }
    LatencyProfile p;
    p.samples = xs.size();
    p.mean_ms = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    p.p95_ms = nearest_rank(xs, 0.95);
    if (p.mean_ms <= p.p95_ms) {
      if (keep_raw) p.raw = std::move(xs);
      return p;
    }
    n_runs *= 2;
  }
  throw std::runtime_error("profile of " + to_string(c) + " keeps giving mean > P95");
}

std::vector<ParetoEntry> pareto_front(const std::vector<ProfiledConfig>& candidates) {
  auto dominates = [](const ProfiledConfig& a, const ProfiledConfig& b) {
    const bool no_worse =
        a.accuracy >= b.accuracy && a.profile.mean_ms <= b.profile.mean_ms;
    const bool better =
        a.accuracy > b.accuracy || a.profile.mean_ms < b.profile.mean_ms;
    return no_worse && better;
  };
  std::vector<const ProfiledConfig*> kept;
  for (const auto& c : candidates) {
    bool dominated = false;
    for (const auto& o : candidates) {
      if (&o == &c) continue;
      if (dominates(o, c)) {
        dominated = true;
        break;
      }
      // Exact ties keep the lexicographically smallest configuration.
      if (o.accuracy == c.accuracy && o.profile.mean_ms == c.profile.mean_ms &&
          o.config < c.config) {
        dominated = true;
        break;
      }
    }
    if (!dominated) kept.push_back(&c);
  }
  std::sort(kept.begin(), kept.end(), [](const ProfiledConfig* a, const ProfiledConfig* b) {
    return a->profile.mean_ms < b->profile.mean_ms;
  });
  std::vector<ParetoEntry> front;
  for (const auto* c : kept) {
    ParetoEntry e;
    e.config = c->config;
    e.accuracy = c->accuracy;
    e.profile = c->profile;
    e.profile.raw.clear();
    front.push_back(std::move(e));
  }
  return front;
}

namespace {

using i128 = __int128;

// x * 2^64 as an exact integer. Every double in [2^-11, 2^62) with at most
// 53 significant bits is representable this way.
i128 to_fixed(double x, const char* what) {
  if (!std::isfinite(x) || std::abs(x) >= 0x1.0p62)
    throw std::domain_error(std::string(what) + " out of range for threshold arithmetic");
  const double hi = std::trunc(x);
  const double lo_scaled = std::ldexp(x - hi, 64);  // exact: x - hi has < 53 bits
  if (lo_scaled != std::trunc(lo_scaled))
    throw std::domain_error(std::string(what) + " has precision below 2^-64 ms");
  return static_cast<i128>(static_cast<int64_t>(hi)) * (static_cast<i128>(1) << 64) +
         static_cast<i128>(lo_scaled);
}

int64_t floor_div(i128 num, i128 den) {
  i128 q = num / den;
  if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
  if (q > std::numeric_limits<int64_t>::max() || q < std::numeric_limits<int64_t>::min())
    throw std::overflow_error("threshold does not fit in 64 bits");
  return static_cast<int64_t>(q);
}

}  // namespace

int64_t upscale_threshold(double slo_ms, double p95_ms, double mean_ms) {
  const i128 slack = to_fixed(slo_ms, "slo") - to_fixed(p95_ms, "p95");
  const i128 mean = to_fixed(mean_ms, "mean");
  if (slack <= 0) throw std::invalid_argument("upscale threshold needs L - s95 > 0");
  if (mean <= 0) throw std::invalid_argument("upscale threshold needs mean > 0");
  return floor_div(slack, mean);
}

int64_t downscale_threshold(double slack_next_ms, double buffer_ms, double mean_next_ms) {
  const i128 mean = to_fixed(mean_next_ms, "mean");
  const i128 buffer = to_fixed(buffer_ms, "slack buffer");
  if (mean <= 0) throw std::invalid_argument("downscale threshold needs mean > 0");
  if (buffer < 0) throw std::invalid_argument("downscale threshold needs h_s >= 0");
  return std::max<int64_t>(0, floor_div(to_fixed(slack_next_ms, "slack") - buffer, mean));
}

int64_t downscale_threshold(double slo_ms, double p95_next_ms, double buffer_ms,
                            double mean_next_ms) {
  const i128 mean = to_fixed(mean_next_ms, "mean");
  const i128 buffer = to_fixed(buffer_ms, "slack buffer");
  if (mean <= 0) throw std::invalid_argument("downscale threshold needs mean > 0");
  if (buffer < 0) throw std::invalid_argument("downscale threshold needs h_s >= 0");
  const i128 num = to_fixed(slo_ms, "slo") - to_fixed(p95_next_ms, "p95") - buffer;
  return std::max<int64_t>(0, floor_div(num, mean));
}

SwitchingPolicy build_policy(const std::vector<ParetoEntry>& front, double slo_ms,
                             double slack_buffer_ms, double cooldown_up_s,
                             double cooldown_down_s) {
  if (!(slo_ms > 0)) throw ValidationError("SLO must be > 0");
  if (!(slack_buffer_ms >= 0)) throw ValidationError("slack buffer must be >= 0");
  if (!(cooldown_up_s >= 0) || !(cooldown_down_s >= 0))
    throw ValidationError("cooldowns must be >= 0");

  SwitchingPolicy policy;
  policy.slo_ms = slo_ms;
  policy.slack_buffer_ms = slack_buffer_ms;
  policy.cooldown_up_s = cooldown_up_s;
  policy.cooldown_down_s = cooldown_down_s;
  policy.front = front;

  for (const auto& e : front) {
    ParetoEntry r = e;
    r.slack_ms = queuing_slack(slo_ms, e.profile.p95_ms);
    r.downscale_threshold.reset();
    if (r.slack_ms <= 0) {
      policy.excluded.push_back(std::move(r));
      continue;
    }
    r.upscale_threshold = upscale_threshold(slo_ms, e.profile.p95_ms, e.profile.mean_ms);
    policy.entries.push_back(std::move(r));
  }
  if (policy.entries.empty())
    throw SloInfeasibleError("SLO infeasible on this hardware: every configuration has P95 >= " +
                             std::to_string(slo_ms) + " ms");

  // Keep N-up strictly decreasing along the ladder.
  auto& es = policy.entries;
  for (std::size_t k = es.size() - 1; k-- > 0;) {
    if (es[k].upscale_threshold <= es[k + 1].upscale_threshold) {
      policy.merged.push_back(es[k]);
      es.erase(es.begin() + static_cast<std::ptrdiff_t>(k));
    }
  }
  if (!policy.merged.empty())
    log_warn("SLO " + std::to_string(static_cast<long long>(slo_ms)) + " ms: merged " +
             std::to_string(policy.merged.size()) +
             " rung(s) whose upscale threshold did not exceed the next rung's");

  for (std::size_t k = 0; k + 1 < es.size(); ++k) {
    const auto& next = es[k + 1];
    es[k].downscale_threshold = downscale_threshold(slo_ms, next.profile.p95_ms,
                                                    slack_buffer_ms, next.profile.mean_ms);
    if (*es[k].downscale_threshold > next.upscale_threshold)
      throw std::logic_error("downscale threshold exceeds next rung's upscale threshold");
  }
  return policy;
}

}  // namespace compasskit

#include "compasskit/servesim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

namespace compasskit {

const char* to_string(PatternKind k) {
  switch (k) {
    case PatternKind::Constant:
      return "constant";
    case PatternKind::Spike:
      return "spike";
    case PatternKind::Bursty:
      return "bursty";
  }
  return "?";
}

PatternKind pattern_kind_from_string(const std::string& s) {
  if (s == "constant") return PatternKind::Constant;
  if (s == "spike") return PatternKind::Spike;
  if (s == "bursty") return PatternKind::Bursty;
  throw ValidationError("unknown load pattern '" + s + "'");
}

void LoadPattern::validate() const {
  if (!(base_qps > 0) || !std::isfinite(base_qps)) throw ValidationError("base QPS must be > 0");
  if (!(duration_s >= 0) || !std::isfinite(duration_s))
    throw ValidationError("duration must be >= 0");
  if (kind == PatternKind::Spike) {
    if (!(spike_multiplier > 0)) throw ValidationError("spike multiplier must be > 0");
    if (!(spike_start() >= 0 && spike_start() <= spike_end() && spike_end() <= duration_s))
      throw ValidationError("spike window must lie within [0, duration]");
  }
  if (kind == PatternKind::Bursty) {
    if (!(burst_rate_per_s > 0)) throw ValidationError("burst rate must be > 0");
    if (!(burst_multiplier_lo > 0 && burst_multiplier_lo <= burst_multiplier_hi))
      throw ValidationError("burst multiplier range is invalid");
    if (!(burst_length_lo_s > 0 && burst_length_lo_s <= burst_length_hi_s))
      throw ValidationError("burst length range is invalid");
  }
}

std::vector<Burst> draw_bursts(const LoadPattern& p, uint64_t seed) {
  std::vector<Burst> out;
  if (p.kind != PatternKind::Bursty || p.duration_s <= 0) return out;
  Rng rng = make_rng(seed);
  double t = 0.0;
  while (true) {
    t += -std::log1p(-uniform01(rng)) / p.burst_rate_per_s;
    if (t >= p.duration_s) break;
    Burst b;
    b.start_s = t;
    b.length_s = p.burst_length_lo_s + uniform01(rng) * (p.burst_length_hi_s - p.burst_length_lo_s);
    b.multiplier =
        p.burst_multiplier_lo + uniform01(rng) * (p.burst_multiplier_hi - p.burst_multiplier_lo);
    b.length_s = std::min(b.length_s, p.duration_s - b.start_s);
    out.push_back(b);
  }
  return out;
}

double arrival_rate(const LoadPattern& p, const std::vector<Burst>& bursts, double t) {
  switch (p.kind) {
    case PatternKind::Constant:
      return p.base_qps;
    case PatternKind::Spike:
      return (t >= p.spike_start() && t < p.spike_end()) ? p.base_qps * p.spike_multiplier
                                                         : p.base_qps;
    case PatternKind::Bursty: {
      double m = 1.0;
      for (const auto& b : bursts)
        if (t >= b.start_s && t < b.start_s + b.length_s) m = std::max(m, b.multiplier);
      return p.base_qps * m;
    }
  }
  return p.base_qps;
}

std::vector<double> generate_arrivals(const LoadPattern& p, uint64_t seed) {
  p.validate();
  std::vector<double> out;
  if (p.duration_s <= 0) return out;
  const auto bursts = draw_bursts(p, derive_seed(seed, "bursts"));
  double lmax = p.base_qps;
  if (p.kind == PatternKind::Spike) lmax *= std::max(1.0, p.spike_multiplier);
  for (const auto& b : bursts) lmax = std::max(lmax, p.base_qps * b.multiplier);

  Rng rng = make_rng(derive_seed(seed, "arrivals"));
  double t = 0.0;
  while (true) {
    t += -std::log1p(-uniform01(rng)) / lmax;
    if (t >= p.duration_s) break;
    if (uniform01(rng) * lmax < arrival_rate(p, bursts, t)) out.push_back(t * 1000.0);
  }
  return out;
}

Decision elastico_decide(ControllerState& st, const SwitchingPolicy& policy, double now_s,
                         bool single_rung) {
  const auto& es = policy.entries;
  Decision d;
  if (es.empty()) return d;
  const std::size_t n = es.size() - 1;
  const auto N = static_cast<int64_t>(st.queue_depth);

  if (st.k > 0 && N > es[st.k].upscale_threshold &&
      now_s - st.last_upscale_s >= policy.cooldown_up_s) {
    std::size_t j = 0;
    if (single_rung) {
      j = st.k - 1;
    } else {
      for (std::size_t i = st.k; i-- > 0;)
        if (N <= es[i].upscale_threshold) {
          j = i;
          break;
        }
    }
    st.k = j;
    st.last_upscale_s = now_s;
    d = {true, j, true};
    return d;
  }
  if (st.k < n && es[st.k].downscale_threshold && N < *es[st.k].downscale_threshold &&
      now_s - st.last_downscale_s >= policy.cooldown_down_s &&
      now_s - st.last_upscale_s >= policy.cooldown_down_s) {
    st.k += 1;
    st.last_downscale_s = now_s;
    d = {true, st.k, false};
  }
  return d;
}

double pk_mean_wait_ms(double lambda_per_ms, double mean_s_ms, double second_moment_ms2) {
  const double rho = lambda_per_ms * mean_s_ms;
  if (!(rho < 1.0)) throw std::invalid_argument("P-K formula needs rho < 1");
  return lambda_per_ms * second_moment_ms2 / (2.0 * (1.0 - rho));
}

SimResult run_simulation(const SwitchingPolicy& policy, const ServiceModel& model,
                         const std::vector<double>& arrivals, const SimOptions& opt,
                         uint64_t seed) {
  const auto& front = policy.front.empty() ? policy.entries : policy.front;
  if (front.empty() || (policy.entries.empty() && !opt.static_entry))
    throw ValidationError("simulation needs a non-empty policy");
  if (opt.static_entry && *opt.static_entry >= front.size())
    throw ValidationError("static entry " + std::to_string(*opt.static_entry) +
                          " is out of range (front has " + std::to_string(front.size()) +
                          " entries)");
  if (!(opt.switch_latency_ms >= 0)) throw ValidationError("switch latency must be >= 0");
  if (!std::is_sorted(arrivals.begin(), arrivals.end()))
    throw ValidationError("arrival times must be sorted");

  std::vector<std::size_t> rung_to_front(policy.entries.size());
  for (std::size_t r = 0; r < policy.entries.size(); ++r) {
    auto it = std::find_if(front.begin(), front.end(), [&](const ParetoEntry& e) {
      return e.config == policy.entries[r].config;
    });
    if (it == front.end()) throw ValidationError("policy rung is missing from its front");
    rung_to_front[r] = static_cast<std::size_t>(it - front.begin());
  }
  std::vector<const LatencyDist*> dists;
  for (const auto& e : front) dists.push_back(&model.dist(e.config));

  SimResult res;
  SimTrace& tr = res.trace;
  const std::size_t n_req = arrivals.size();
  tr.requests.resize(n_req);

  // Per-request noise, drawn in id order.
  std::vector<std::pair<double, double>> noise(n_req);
  {
    Rng rng = make_rng(derive_seed(seed, "service"));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& [z, u] : noise) {
      z = normal(rng);
      u = uniform01(rng);
    }
  }

  ControllerState ctl;
  const bool elastico = !opt.static_entry.has_value();
  std::size_t serving = 0;
  if (elastico) {
    ctl.k = policy.entries.size() - 1;
    serving = rung_to_front[ctl.k];
  } else {
    serving = *opt.static_entry;
  }
  tr.initial_config = serving;
  std::size_t decided = serving;
  std::optional<std::size_t> pending_event;  // index into tr.switches

  auto active_at = [&](double t) {
    if (pending_event && tr.switches[*pending_event].ready_ms <= t) {
      serving = tr.switches[*pending_event].to;
      pending_event.reset();
    }
    return serving;
  };

  std::deque<std::size_t> queue;
  std::size_t next_arr = 0;
  bool busy = false;
  double busy_until = 0.0;
  std::size_t in_service = 0;

  auto dispatch = [&](double t) {
    if (busy || queue.empty()) return;
    const std::size_t id = queue.front();
    queue.pop_front();
    const std::size_t cfg = active_at(t);
    const double s = dists[cfg]->draw(noise[id].first, noise[id].second);
    if (!(s > 0)) throw std::logic_error("service model produced a non-positive service time");
    auto& r = tr.requests[id];
    r.start_ms = t;
    r.completion_ms = t + s;
    r.config_index = cfg;
    r.accuracy = front[cfg].accuracy;
    busy = true;
    busy_until = r.completion_ms;
    in_service = id;
  };

  while (next_arr < n_req || busy) {
    const bool completion = busy && (next_arr == n_req || busy_until <= arrivals[next_arr]);
    const double t = completion ? busy_until : arrivals[next_arr];
    if (completion) {
      busy = false;
      tr.end_ms = std::max(tr.end_ms, tr.requests[in_service].completion_ms);
    } else {
      auto& r = tr.requests[next_arr];
      r.id = next_arr;
      r.arrival_ms = t;
      queue.push_back(next_arr++);
    }
    dispatch(t);
    if (!elastico) continue;
    active_at(t);
    ctl.queue_depth = queue.size() + ((opt.count_in_service && busy) ? 1 : 0);
    const Decision d = elastico_decide(ctl, policy, t / 1000.0, opt.single_rung);
    if (d.switch_config) {
      SwitchEvent ev;
      ev.decided_ms = t;
      ev.ready_ms = t + opt.switch_latency_ms;
      ev.from = decided;
      ev.to = rung_to_front[d.target];
      ev.upscale = d.upscale;
      decided = ev.to;
      if (pending_event) tr.switches[*pending_event].superseded = true;
      tr.switches.push_back(ev);
      pending_event = tr.switches.size() - 1;
      if (opt.switch_latency_ms == 0) active_at(t);
    }
  }
  if (n_req > 0) tr.end_ms = std::max(tr.end_ms, arrivals.back());

  res.metrics = compute_metrics(tr, opt.slo_ms.value_or(policy.slo_ms));
  return res;
}

SimResult run_simulation(const SwitchingPolicy& policy, const ServiceModel& model,
                         const LoadPattern& pattern, const SimOptions& options, uint64_t seed) {
  return run_simulation(policy, model, generate_arrivals(pattern, derive_seed(seed, "load")),
                        options, seed);
}

SimMetrics compute_metrics(const SimTrace& tr, double slo_ms) {
  SimMetrics m;
  m.slo_ms = slo_ms;
  m.requests = tr.requests.size();
  for (const auto& s : tr.switches) (s.upscale ? m.upscales : m.downscales)++;
  if (!tr.requests.empty()) {
    std::vector<double> lat;
    lat.reserve(tr.requests.size());
    std::size_t ok = 0;
    double acc = 0.0, wait = 0.0;
    for (const auto& r : tr.requests) {
      lat.push_back(r.latency_ms());
      if (r.latency_ms() <= slo_ms) ++ok;
      acc += r.accuracy;
      wait += r.wait_ms();
    }
    const auto n = static_cast<double>(tr.requests.size());
    m.slo_compliance = ok / n;
    m.mean_accuracy = acc / n;
    m.mean_wait_ms = wait / n;
    double total = 0.0;
    for (double v : lat) total += v;
    m.mean_latency_ms = total / n;
    std::sort(lat.begin(), lat.end());
    auto pick = [&](double q) {
      auto rank = static_cast<std::size_t>(std::ceil(q * n));
      return lat[std::clamp<std::size_t>(rank, 1, lat.size()) - 1];
    };
    m.p50_ms = pick(0.50);
    m.p95_ms = pick(0.95);
    m.p99_ms = pick(0.99);
  }

  const auto seconds = static_cast<std::size_t>(std::ceil(tr.end_ms / 1000.0));
  std::vector<SwitchEvent> applied;
  for (const auto& s : tr.switches)
    if (!s.superseded) applied.push_back(s);
  std::size_t ai = 0, si = 0, sw = 0;
  std::size_t active = tr.initial_config;
  const auto& rq = tr.requests;
  auto first_after = [&](double v) {
    return std::lower_bound(rq.begin(), rq.end(), v,
                            [](const Request& r, double x) { return r.arrival_ms < x; });
  };
  for (std::size_t s = 0; s < seconds; ++s) {
    const double ts = static_cast<double>(s) * 1000.0;
    while (ai < rq.size() && rq[ai].arrival_ms <= ts) ++ai;
    while (si < rq.size() && rq[si].start_ms <= ts) ++si;
    while (sw < applied.size() && applied[sw].ready_ms <= ts) active = applied[sw++].to;
    TimelineRow row;
    row.t_s = s;
    row.queue_depth = ai - std::min(ai, si);
    row.active_config = active;
    row.arrivals = static_cast<std::size_t>(first_after(ts + 1000.0) - first_after(ts));
    m.timeline.push_back(row);
  }
  return m;
}

}  // namespace compasskit

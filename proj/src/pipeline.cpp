#include "compasskit/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

namespace compasskit {

namespace fs = std::filesystem;

uint64_t search_seed(uint64_t master, double tau) {
  return derive_seed(master, "search", {static_cast<uint64_t>(std::llround(tau * 1e6))});
}

SearchRun run_search(const Scenario& sc, double tau, uint64_t master, bool with_grid) {
  if (!(tau > 0 && tau < 1)) throw ValidationError("tau must lie in (0,1)");
  SearchRun run;
  run.tau = tau;
  run.seed = search_seed(master, tau);
  const auto oracle = sc.oracle_at(tau);
  SearchParams params = sc.search;
  params.tau = tau;
  run.search = compass_v_search(sc.space, oracle, params, sc.schedule, run.seed);
  std::size_t feasible = 0;
  for_each_config(sc.space, [&](const Configuration& c) {
    if (oracle.true_accuracy(c) >= tau) ++feasible;
  });
  run.feasible_fraction = static_cast<double>(feasible) / static_cast<double>(sc.space.size());
  if (with_grid) {
    run.grid = grid_search_oracle(sc.space, oracle, tau, sc.schedule, run.seed);
    run.metrics = recall_and_savings(run.search, *run.grid);
  }
  return run;
}

std::vector<FeasibleEntry> feasible_entries(const Scenario& sc, const SearchRun& run) {
  std::vector<FeasibleEntry> out;
  for (const auto& r : run.search.feasible)
    out.push_back({r.config, r.acc_hat, sc.oracle.true_accuracy(r.config)});
  return out;
}

std::vector<ProfiledConfig> profile_feasible(const Scenario& sc,
                                             const std::vector<FeasibleEntry>& feasible,
                                             uint64_t master) {
  const uint64_t seed = derive_seed(master, "profile");
  const bool use_oracle = sc.planning.accuracy_source == "oracle";
  std::vector<ProfiledConfig> out;
  for (const auto& f : feasible)
    out.push_back({f.config, use_oracle ? f.accuracy : f.acc_hat,
                   profile_latency(sc.service, f.config, sc.profile_runs, seed)});
  return out;
}

SwitchingPolicy plan_policy(const Scenario& sc, const std::vector<FeasibleEntry>& feasible,
                            const PlanOptions& opt, uint64_t master) {
  if (feasible.empty()) throw ValidationError("feasible set is empty; nothing to plan");
  const auto front = pareto_front(profile_feasible(sc, feasible, master));
  return build_policy(front, opt.slo_ms,
                      opt.slack_buffer_ms.value_or(sc.planning.slack_for(opt.slo_ms)),
                      opt.cooldown_up_s.value_or(sc.planning.cooldown_up_s),
                      opt.cooldown_down_s.value_or(sc.planning.cooldown_down_s));
}

std::size_t resolve_baseline(const std::string& entry, std::size_t n) {
  if (n == 0) throw ValidationError("front is empty");
  if (entry == "fastest") return 0;
  if (entry == "slowest") return n - 1;
  if (entry == "middle") return (n - 1) / 2;
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(entry, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != entry.size())
    throw ValidationError("baseline entry must be fastest, middle, slowest or an index");
  if (v >= n)
    throw ValidationError("baseline entry " + entry + " is out of range (front has " +
                          std::to_string(n) + " entries)");
  return v;
}

Json config_json(const ConfigSpace& space, const Configuration& c) {
  Json j = Json::object();
  for (std::size_t i = 0; i < space.dims(); ++i) j[space.params()[i].name] = space.label(c, i);
  return j;
}

Configuration config_from_json(const ConfigSpace& space, const Json& j) {
  if (!j.is_object()) throw ValidationError("configuration must be a JSON object");
  std::map<std::string, std::string> labels;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) throw ValidationError("configuration value for '" + k + "' must be a string");
    labels[k] = v.get<std::string>();
  }
  return config_from_labels(space, labels);
}

namespace {

Json stats_json(const SearchStats& s) {
  return Json{{"evaluations", s.evaluations},
              {"samples", s.samples},
              {"hill_climb_steps", s.hill_climb_steps},
              {"lateral_expansions", s.lateral_expansions},
              {"lhs_seeds", s.lhs_seeds},
              {"rounds", s.rounds},
              {"max_queue", s.max_queue}};
}

Json metrics_of(const SearchMetrics& m) {
  return Json{{"recall", m.recall},
              {"savings", m.savings},
              {"found", m.found},
              {"truth", m.truth},
              {"false_positives", m.false_positives},
              {"compass_samples", m.compass_samples},
              {"grid_samples", m.grid_samples}};
}

Json entry_json(const ConfigSpace& space, const ParetoEntry& e, bool thresholds) {
  Json j{{"config", config_json(space, e.config)},
         {"accuracy", e.accuracy},
         {"mean_ms", e.profile.mean_ms},
         {"p95_ms", e.profile.p95_ms}};
  if (thresholds) {
    j["slack_ms"] = e.slack_ms;
    j["upscale_threshold"] = e.upscale_threshold;
    j["downscale_threshold"] =
        e.downscale_threshold ? Json(*e.downscale_threshold) : Json(nullptr);
  }
  return j;
}

template <class T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("JSON is missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ValidationError(std::string("JSON field '") + key + "' has the wrong type");
  }
}

ParetoEntry entry_from_json(const ConfigSpace& space, const Json& j, bool thresholds) {
  ParetoEntry e;
  e.config = config_from_json(space, j.at("config"));
  e.accuracy = field<double>(j, "accuracy");
  e.profile.mean_ms = field<double>(j, "mean_ms");
  e.profile.p95_ms = field<double>(j, "p95_ms");
  if (thresholds) {
    e.slack_ms = field<double>(j, "slack_ms");
    e.upscale_threshold = field<int64_t>(j, "upscale_threshold");
    if (!j.contains("downscale_threshold"))
      throw ValidationError("JSON is missing 'downscale_threshold'");
    if (!j["downscale_threshold"].is_null())
      e.downscale_threshold = field<int64_t>(j, "downscale_threshold");
  }
  return e;
}

}  // namespace

Json feasible_set_json(const Scenario& sc, const SearchRun& run) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "feasible_set";
  j["scenario"] = sc.name;
  j["tau"] = run.tau;
  j["seed"] = run.seed;
  j["space_size"] = sc.space.size();
  Json names = Json::array();
  for (const auto& p : sc.space.params()) names.push_back(p.name);
  j["parameters"] = names;
  j["feasible_fraction"] = run.feasible_fraction;
  Json fs_ = Json::array();
  for (const auto& r : run.search.feasible) {
    fs_.push_back(Json{{"config", config_json(sc.space, r.config)},
                       {"acc_hat", r.acc_hat},
                       {"ci_lo", r.ci_lo},
                       {"ci_hi", r.ci_hi},
                       {"trials", r.trials},
                       {"classification", to_string(r.classification)},
                       {"accuracy", sc.oracle.true_accuracy(r.config)}});
  }
  j["feasible"] = fs_;
  j["stats"] = stats_json(run.search.stats);
  if (run.metrics) j["metrics"] = metrics_of(*run.metrics);
  return j;
}

std::vector<FeasibleEntry> read_feasible_set(const Scenario& sc, const fs::path& p) {
  const Json j = read_json(p);
  if (field<std::string>(j, "kind") != "feasible_set")
    throw ValidationError(p.string() + " is not a feasible set");
  std::vector<FeasibleEntry> out;
  for (const auto& e : j.at("feasible")) {
    FeasibleEntry f;
    f.config = config_from_json(sc.space, e.at("config"));
    f.acc_hat = field<double>(e, "acc_hat");
    f.accuracy = sc.oracle.true_accuracy(f.config);
    out.push_back(f);
  }
  return out;
}

Json policy_json(const ConfigSpace& space, const SwitchingPolicy& p) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "switching_policy";
  j["slo_ms"] = p.slo_ms;
  j["slack_buffer_ms"] = p.slack_buffer_ms;
  j["cooldown_up_s"] = p.cooldown_up_s;
  j["cooldown_down_s"] = p.cooldown_down_s;
  Json es = Json::array(), fr = Json::array(), ex = Json::array(), mg = Json::array();
  for (const auto& e : p.entries) es.push_back(entry_json(space, e, true));
  for (const auto& e : p.front) fr.push_back(entry_json(space, e, false));
  for (const auto& e : p.excluded) ex.push_back(entry_json(space, e, false));
  for (const auto& e : p.merged) mg.push_back(entry_json(space, e, false));
  j["entries"] = es;
  j["front"] = fr;
  j["excluded"] = ex;
  j["merged"] = mg;
  return j;
}

SwitchingPolicy read_policy(const ConfigSpace& space, const fs::path& path) {
  const Json j = read_json(path);
  if (field<std::string>(j, "kind") != "switching_policy")
    throw ValidationError(path.string() + " is not a switching policy");
  if (field<int>(j, "schema_version") != kSchemaVersion)
    throw ValidationError(path.string() + " has an unsupported schema_version");
  SwitchingPolicy p;
  p.slo_ms = field<double>(j, "slo_ms");
  p.slack_buffer_ms = field<double>(j, "slack_buffer_ms");
  p.cooldown_up_s = field<double>(j, "cooldown_up_s");
  p.cooldown_down_s = field<double>(j, "cooldown_down_s");
  for (const auto& e : j.at("entries")) p.entries.push_back(entry_from_json(space, e, true));
  for (const auto& e : j.at("front")) p.front.push_back(entry_from_json(space, e, false));
  if (j.contains("excluded"))
    for (const auto& e : j["excluded"]) p.excluded.push_back(entry_from_json(space, e, false));
  if (j.contains("merged"))
    for (const auto& e : j["merged"]) p.merged.push_back(entry_from_json(space, e, false));
  if (p.entries.empty()) throw ValidationError(path.string() + " has no entries");
  for (std::size_t k = 0; k + 1 < p.entries.size(); ++k)
    if (p.entries[k].upscale_threshold <= p.entries[k + 1].upscale_threshold)
      throw ValidationError(path.string() + ": upscale thresholds are not strictly decreasing");
  return p;
}

Json metrics_json(const SimMetrics& m, const std::string& strategy, const LoadPattern& pattern,
                  uint64_t seed) {
  return Json{{"schema_version", kSchemaVersion},
              {"kind", "sim_metrics"},
              {"strategy", strategy},
              {"pattern", to_string(pattern.kind)},
              {"base_qps", pattern.base_qps},
              {"duration_s", pattern.duration_s},
              {"seed", seed},
              {"requests", m.requests},
              {"slo_ms", m.slo_ms},
              {"slo_compliance", m.slo_compliance},
              {"p50_ms", m.p50_ms},
              {"p95_ms", m.p95_ms},
              {"p99_ms", m.p99_ms},
              {"mean_latency_ms", m.mean_latency_ms},
              {"mean_wait_ms", m.mean_wait_ms},
              {"mean_accuracy", m.mean_accuracy},
              {"upscales", m.upscales},
              {"downscales", m.downscales}};
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string ms_int(double v) { return std::to_string(std::llround(v)); }

std::string tau_tag(double tau) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", tau);
  return buf;
}

std::string search_trace_csv(const ConfigSpace& space, const SearchResult& r) {
  std::ostringstream os;
  os << "order";
  for (const auto& p : space.params()) os << ',' << csv_field(p.name);
  os << ",classification,feasible,samples,cumulative_samples,feasible_found,queue_size\n";
  for (const auto& t : r.trace) {
    os << t.order;
    for (std::size_t i = 0; i < space.dims(); ++i) os << ',' << csv_field(space.label(t.config, i));
    os << ',' << to_string(t.classification) << ',' << (t.feasible ? 1 : 0) << ',' << t.samples
       << ',' << t.cumulative_samples << ',' << t.feasible_found << ',' << t.queue_size << '\n';
  }
  return os.str();
}

std::string sim_trace_csv(const SimTrace& t) {
  std::ostringstream os;
  os << "id,arrival_ms,start_ms,completion_ms,config_index\n";
  for (const auto& r : t.requests)
    os << r.id << ',' << ms_int(r.arrival_ms) << ',' << ms_int(r.start_ms) << ','
       << ms_int(r.completion_ms) << ',' << r.config_index << '\n';
  return os.str();
}

std::string timeline_csv(const SimMetrics& m) {
  std::ostringstream os;
  os << "t_s,queue_depth,active_config,arrivals\n";
  for (const auto& r : m.timeline)
    os << r.t_s << ',' << r.queue_depth << ',' << r.active_config << ',' << r.arrivals << '\n';
  return os.str();
}

void write_file(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

Json read_json(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + p.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("cannot parse " + p.string() + ": " + e.what());
  }
}

namespace {

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::string rel(const fs::path& p) { return p.generic_string(); }

struct SimCell {
  double slo_ms = 0;
  PatternKind pattern = PatternKind::Spike;
  std::string strategy;
  std::optional<std::size_t> static_entry;
  std::size_t policy_index = 0;
};

}  // namespace

Json run_compare(const Scenario& sc, const CompareOptions& opt) {
  const fs::path& out = opt.out_dir;
  const uint64_t master = opt.master_seed;

  // Tau sweep.
  std::vector<SearchRun> sweep(sc.taus.size());
  parallel_for(sc.taus.size(), opt.threads, [&](std::size_t i) {
    sweep[i] = run_search(sc, sc.taus[i], master, true);
    const fs::path dir = out / "search" / ("tau_" + tau_tag(sc.taus[i]));
    write_file(dir / "feasible_set.json", feasible_set_json(sc, sweep[i]).dump(2) + "\n");
    write_file(dir / "search_trace.csv", search_trace_csv(sc.space, sweep[i].search));
  });

  // Planning search and policies.
  const SearchRun plan_run = run_search(sc, sc.planning.tau, master, true);
  write_file(out / "plan" / "feasible_set.json", feasible_set_json(sc, plan_run).dump(2) + "\n");
  write_file(out / "plan" / "search_trace.csv", search_trace_csv(sc.space, plan_run.search));
  const auto feasible = feasible_entries(sc, plan_run);

  std::vector<SwitchingPolicy> policies;
  Json plan_rows = Json::array();
  for (double slo : sc.planning.slo_ms) {
    PlanOptions po;
    po.slo_ms = slo;
    try {
      policies.push_back(plan_policy(sc, feasible, po, master));
    } catch (const SloInfeasibleError& e) {
      throw SloInfeasibleError("planning for SLO " + ms_int(slo) + " ms: " + e.what());
    }
    const fs::path p = fs::path("plan") / ("slo_" + ms_int(slo)) / "policy.json";
    write_file(out / p, policy_json(sc.space, policies.back()).dump(2) + "\n");
    plan_rows.push_back(Json{{"slo_ms", slo},
                             {"rungs", policies.back().entries.size()},
                             {"front_size", policies.back().front.size()},
                             {"excluded", policies.back().excluded.size()},
                             {"merged", policies.back().merged.size()},
                             {"policy", rel(p)}});
  }

  // Simulation grid.
  std::vector<SimCell> cells;
  for (std::size_t pi = 0; pi < policies.size(); ++pi) {
    for (auto pat : sc.simulation.patterns) {
      cells.push_back({sc.planning.slo_ms[pi], pat, "elastico", std::nullopt, pi});
      for (const auto& b : sc.simulation.baselines)
        cells.push_back({sc.planning.slo_ms[pi], pat, b.name,
                         resolve_baseline(b.entry, policies[pi].front.size()), pi});
    }
  }
  const std::size_t n_seeds = sc.simulation.seeds.size();
  std::vector<SimMetrics> results(cells.size() * n_seeds);
  std::vector<std::string> paths(cells.size() * n_seeds);
  parallel_for(results.size(), opt.threads, [&](std::size_t t) {
    const auto& cell = cells[t / n_seeds];
    const uint64_t s = sc.simulation.seeds[t % n_seeds];
    LoadPattern pat;
    pat.kind = cell.pattern;
    pat.base_qps = sc.simulation.base_qps;
    pat.duration_s = sc.simulation.duration_s;
    SimOptions so;
    so.switch_latency_ms = sc.simulation.switch_latency_ms;
    so.count_in_service = sc.simulation.count_in_service;
    so.single_rung = sc.simulation.single_rung;
    so.static_entry = cell.static_entry;
    const uint64_t seed = derive_seed(master, "simulate", {s});
    const auto r = run_simulation(policies[cell.policy_index], sc.service, pat, so, seed);
    const fs::path dir = fs::path("sim") / ("slo_" + ms_int(cell.slo_ms)) / to_string(cell.pattern) /
                         cell.strategy / ("seed_" + std::to_string(s));
    write_file(out / dir / "trace.csv", sim_trace_csv(r.trace));
    write_file(out / dir / "timeline.csv", timeline_csv(r.metrics));
    write_file(out / dir / "metrics.json",
               metrics_json(r.metrics, cell.strategy, pat, seed).dump(2) + "\n");
    results[t] = r.metrics;
    paths[t] = rel(dir / "metrics.json");
  });

  Json report;
  report["schema_version"] = kSchemaVersion;
  report["kind"] = "comparison_report";
  report["scenario"] = sc.name;
  report["seed"] = master;

  Json search_rows = Json::array();
  std::string search_csv =
      "tau,feasible_fraction,truth,found,recall,savings,evaluations,compass_samples,grid_samples,"
      "artifact\n";
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const auto& r = sweep[i];
    const auto& m = *r.metrics;
    const std::string art =
        rel(fs::path("search") / ("tau_" + tau_tag(r.tau)) / "feasible_set.json");
    search_rows.push_back(Json{{"tau", r.tau},
                               {"feasible_fraction", r.feasible_fraction},
                               {"truth", m.truth},
                               {"found", m.found},
                               {"recall", m.recall},
                               {"savings", m.savings},
                               {"evaluations", r.search.stats.evaluations},
                               {"compass_samples", m.compass_samples},
                               {"grid_samples", m.grid_samples},
                               {"artifact", art}});
    search_csv += tau_tag(r.tau) + "," + fixed6(r.feasible_fraction) + "," +
                  std::to_string(m.truth) + "," + std::to_string(m.found) + "," +
                  fixed6(m.recall) + "," + fixed6(m.savings) + "," +
                  std::to_string(r.search.stats.evaluations) + "," +
                  std::to_string(m.compass_samples) + "," + std::to_string(m.grid_samples) + "," +
                  csv_field(art) + "\n";
  }
  report["search"] = search_rows;

  Json planning;
  planning["tau"] = sc.planning.tau;
  planning["accuracy_source"] = sc.planning.accuracy_source;
  planning["feasible_set"] = "plan/feasible_set.json";
  planning["recall"] = plan_run.metrics->recall;
  planning["savings"] = plan_run.metrics->savings;
  planning["feasible"] = feasible.size();
  planning["policies"] = plan_rows;
  report["planning"] = planning;

  Json sim_rows = Json::array();
  std::string sim_csv =
      "slo_ms,pattern,strategy,entry,seeds,slo_compliance,mean_accuracy,p50_ms,p95_ms,p99_ms,"
      "upscales,downscales\n";
  for (std::size_t c = 0; c < cells.size(); ++c) {
    SimMetrics avg;
    avg.slo_compliance = 0.0;
    Json arts = Json::array();
    double ups = 0, downs = 0;
    for (std::size_t k = 0; k < n_seeds; ++k) {
      const auto& m = results[c * n_seeds + k];
      avg.slo_compliance += m.slo_compliance;
      avg.mean_accuracy += m.mean_accuracy;
      avg.p50_ms += m.p50_ms;
      avg.p95_ms += m.p95_ms;
      avg.p99_ms += m.p99_ms;
      ups += static_cast<double>(m.upscales);
      downs += static_cast<double>(m.downscales);
      arts.push_back(paths[c * n_seeds + k]);
    }
    const auto n = static_cast<double>(n_seeds);
    avg.slo_compliance /= n;
    avg.mean_accuracy /= n;
    avg.p50_ms /= n;
    avg.p95_ms /= n;
    avg.p99_ms /= n;
    ups /= n;
    downs /= n;
    const auto& cell = cells[c];
    sim_rows.push_back(Json{{"slo_ms", cell.slo_ms},
                            {"pattern", to_string(cell.pattern)},
                            {"strategy", cell.strategy},
                            {"entry", cell.static_entry ? Json(*cell.static_entry) : Json(nullptr)},
                            {"seeds", n_seeds},
                            {"slo_compliance", avg.slo_compliance},
                            {"mean_accuracy", avg.mean_accuracy},
                            {"p50_ms", avg.p50_ms},
                            {"p95_ms", avg.p95_ms},
                            {"p99_ms", avg.p99_ms},
                            {"upscales", ups},
                            {"downscales", downs},
                            {"artifacts", arts}});
    sim_csv += ms_int(cell.slo_ms) + "," + to_string(cell.pattern) + "," +
               csv_field(cell.strategy) + "," +
               (cell.static_entry ? std::to_string(*cell.static_entry) : std::string()) + "," +
               std::to_string(n_seeds) + "," + fixed6(avg.slo_compliance) + "," +
               fixed6(avg.mean_accuracy) + "," + ms_int(avg.p50_ms) + "," + ms_int(avg.p95_ms) +
               "," + ms_int(avg.p99_ms) + "," + fixed6(ups) + "," + fixed6(downs) + "\n";
  }
  report["simulation"] = sim_rows;

  write_file(out / "report.json", report.dump(2) + "\n");
  write_file(out / "report_search.csv", search_csv);
  write_file(out / "report_sim.csv", sim_csv);
  return report;
}

std::string render_report(const Json& report) {
  std::ostringstream os;
  os << "# " << report.value("scenario", std::string("scenario")) << "\n\n";
  os << "## Search\n\n| tau | f | recall | savings | evaluations |\n|---|---|---|---|---|\n";
  for (const auto& r : report.at("search"))
    os << "| " << tau_tag(r.at("tau").get<double>()) << " | "
       << fixed6(r.at("feasible_fraction").get<double>()) << " | "
       << fixed6(r.at("recall").get<double>()) << " | " << fixed6(r.at("savings").get<double>())
       << " | " << r.at("evaluations").get<std::size_t>() << " |\n";
  const auto& pl = report.at("planning");
  os << "\n## Planning\n\ntau " << tau_tag(pl.at("tau").get<double>()) << ", "
     << pl.at("feasible").get<std::size_t>() << " feasible, recall "
     << fixed6(pl.at("recall").get<double>()) << "\n\n| SLO ms | rungs | front | excluded |\n"
     << "|---|---|---|---|\n";
  for (const auto& p : pl.at("policies"))
    os << "| " << ms_int(p.at("slo_ms").get<double>()) << " | " << p.at("rungs").get<std::size_t>()
       << " | " << p.at("front_size").get<std::size_t>() << " | "
       << p.at("excluded").get<std::size_t>() << " |\n";
  os << "\n## Simulation\n\n| SLO ms | pattern | strategy | compliance | accuracy | P95 ms | "
        "switches |\n|---|---|---|---|---|---|---|\n";
  for (const auto& r : report.at("simulation"))
    os << "| " << ms_int(r.at("slo_ms").get<double>()) << " | "
       << r.at("pattern").get<std::string>() << " | " << r.at("strategy").get<std::string>()
       << " | " << fixed6(r.at("slo_compliance").get<double>()) << " | "
       << fixed6(r.at("mean_accuracy").get<double>()) << " | "
       << ms_int(r.at("p95_ms").get<double>()) << " | "
       << fixed6(r.at("upscales").get<double>() + r.at("downscales").get<double>()) << " |\n";
  return os.str();
}

}  // namespace compasskit

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "compasskit/log.hpp"
#include "compasskit/pipeline.hpp"

namespace fs = std::filesystem;
using namespace compasskit;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;

struct Globals {
  std::string scenario;
  std::string out = "out";
  std::optional<uint64_t> seed;
  std::size_t threads = 1;
  bool quiet = false;
};

fs::path out_dir(const Globals& g) {
  if (const char* env = std::getenv("COMPASSKIT_OUT"); env && *env) return env;
  return g.out;
}

Scenario need_scenario(const Globals& g) {
  if (g.scenario.empty()) throw ValidationError("--scenario is required");
  return load_scenario(g.scenario);
}

uint64_t master_seed(const Globals& g, const Scenario& sc) { return g.seed.value_or(sc.seed); }

std::vector<uint64_t> parse_seed_list(const std::string& s) {
  std::vector<uint64_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    uint64_t v = 0;
    try {
      v = std::stoull(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size()) throw ValidationError("bad seed list '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError("empty seed list");
  return out;
}

void cmd_search(const Globals& g, const std::string& tau_spec, bool grid) {
  const Scenario sc = need_scenario(g);
  std::vector<double> taus;
  if (!tau_spec.empty())
    taus = parse_tau_spec(tau_spec);
  else if (!sc.taus.empty())
    taus = sc.taus;
  else
    taus = {sc.planning.tau};
  const uint64_t master = master_seed(g, sc);
  const fs::path out = out_dir(g);

  if (taus.size() == 1) {
    const auto run = run_search(sc, taus[0], master, grid);
    write_file(out / "feasible_set.json", feasible_set_json(sc, run).dump(2) + "\n");
    write_file(out / "search_trace.csv", search_trace_csv(sc.space, run.search));
    if (!g.quiet) {
      std::cout << "tau " << tau_tag(run.tau) << ": " << run.search.feasible.size()
                << " feasible, " << run.search.stats.evaluations << " evaluations, "
                << run.search.stats.samples << " samples";
      if (run.metrics)
        std::cout << ", recall " << fixed6(run.metrics->recall) << ", savings "
                  << fixed6(run.metrics->savings);
      std::cout << "\n";
    }
    return;
  }

  std::string csv = "tau,feasible_fraction,found,recall,savings,evaluations,samples\n";
  for (double tau : taus) {
    const auto run = run_search(sc, tau, master, true);
    const fs::path dir = out / ("tau_" + tau_tag(tau));
    write_file(dir / "feasible_set.json", feasible_set_json(sc, run).dump(2) + "\n");
    write_file(dir / "search_trace.csv", search_trace_csv(sc.space, run.search));
    csv += tau_tag(tau) + "," + fixed6(run.feasible_fraction) + "," +
           std::to_string(run.search.feasible.size()) + "," + fixed6(run.metrics->recall) + "," +
           fixed6(run.metrics->savings) + "," + std::to_string(run.search.stats.evaluations) +
           "," + std::to_string(run.search.stats.samples) + "\n";
  }
  write_file(out / "sweep.csv", csv);
  if (!g.quiet) std::cout << csv;
}

void cmd_plan(const Globals& g, const std::string& feasible_path, std::optional<double> slo,
              std::optional<double> slack, std::optional<double> cd_up,
              std::optional<double> cd_down) {
  const Scenario sc = need_scenario(g);
  const fs::path out = out_dir(g);
  const fs::path fpath = feasible_path.empty() ? out / "feasible_set.json" : fs::path(feasible_path);
  const auto feasible = read_feasible_set(sc, fpath);
  PlanOptions po;
  po.slo_ms = slo.value_or(sc.planning.slo_ms.front());
  po.slack_buffer_ms = slack;
  po.cooldown_up_s = cd_up;
  po.cooldown_down_s = cd_down;
  if (!(po.slo_ms > 0)) throw ValidationError("--slo-ms must be > 0");
  const auto policy = plan_policy(sc, feasible, po, master_seed(g, sc));
  write_file(out / "policy.json", policy_json(sc.space, policy).dump(2) + "\n");
  if (!g.quiet) {
    std::cout << "SLO " << ms_int(policy.slo_ms) << " ms, " << policy.entries.size()
              << " rungs (front " << policy.front.size() << ", excluded "
              << policy.excluded.size() << ")\n";
    for (const auto& e : policy.entries)
      std::cout << "  " << to_string(e.config) << " acc " << fixed6(e.accuracy) << " mean "
                << ms_int(e.profile.mean_ms) << " p95 " << ms_int(e.profile.p95_ms) << " up "
                << e.upscale_threshold << " down "
                << (e.downscale_threshold ? std::to_string(*e.downscale_threshold) : "-") << "\n";
  }
}

struct SimFlags {
  std::string policy;
  std::string pattern = "spike";
  std::optional<double> base_qps;
  std::optional<double> duration_s;
  std::optional<double> slo_ms;
  std::string seeds;
  std::optional<std::size_t> static_entry;
  std::optional<double> switch_latency_ms;
  bool count_in_service = false;
  bool single_rung = false;
};

void cmd_simulate(const Globals& g, const SimFlags& f) {
  const Scenario sc = need_scenario(g);
  const fs::path out = out_dir(g);
  const auto policy = read_policy(sc.space, f.policy.empty() ? out / "policy.json" : fs::path(f.policy));
  LoadPattern pat;
  pat.kind = pattern_kind_from_string(f.pattern);
  pat.base_qps = f.base_qps.value_or(sc.simulation.base_qps);
  pat.duration_s = f.duration_s.value_or(sc.simulation.duration_s);
  pat.validate();
  SimOptions so;
  so.switch_latency_ms = f.switch_latency_ms.value_or(sc.simulation.switch_latency_ms);
  so.count_in_service = f.count_in_service || sc.simulation.count_in_service;
  so.single_rung = f.single_rung || sc.simulation.single_rung;
  so.static_entry = f.static_entry;
  so.slo_ms = f.slo_ms;
  const std::string strategy =
      f.static_entry ? "static-" + std::to_string(*f.static_entry) : std::string("elastico");

  std::vector<uint64_t> seeds;
  if (!f.seeds.empty())
    seeds = parse_seed_list(f.seeds);
  else
    seeds = {master_seed(g, sc)};
  for (uint64_t s : seeds) {
    const uint64_t seed = derive_seed(s, "simulate");
    const auto r = run_simulation(policy, sc.service, pat, so, seed);
    const fs::path dir = seeds.size() == 1 ? out : out / ("seed_" + std::to_string(s));
    write_file(dir / "trace.csv", sim_trace_csv(r.trace));
    write_file(dir / "timeline.csv", timeline_csv(r.metrics));
    write_file(dir / "metrics.json", metrics_json(r.metrics, strategy, pat, seed).dump(2) + "\n");
    if (!g.quiet)
      std::cout << "seed " << s << ": " << r.metrics.requests << " requests, compliance "
                << fixed6(r.metrics.slo_compliance) << ", accuracy "
                << fixed6(r.metrics.mean_accuracy) << ", p95 " << ms_int(r.metrics.p95_ms)
                << " ms, switches " << r.metrics.upscales << " up / " << r.metrics.downscales
                << " down\n";
  }
}

void cmd_compare(const Globals& g) {
  const Scenario sc = need_scenario(g);
  CompareOptions co;
  co.out_dir = out_dir(g);
  co.master_seed = master_seed(g, sc);
  co.threads = g.threads;
  const Json report = run_compare(sc, co);
  if (!g.quiet) std::cout << render_report(report);
}

void cmd_report(const Globals& g, const std::string& path) {
  const fs::path out = out_dir(g);
  const fs::path p = path.empty() ? out / "report.json" : fs::path(path);
  const Json report = read_json(p);
  if (report.value("kind", std::string()) != "comparison_report")
    throw ValidationError(p.string() + " is not a comparison report");
  const std::string md = render_report(report);
  write_file(p.parent_path() / "report.md", md);
  if (!g.quiet) std::cout << md;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compasskit: configuration search, switching-policy planning and serving simulation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--scenario", g.scenario, "Scenario file (YAML)");
  app.add_option("--out", g.out, "Output directory (COMPASSKIT_OUT overrides)");
  app.add_option("--seed", g.seed, "Master seed (default: scenario seed)");
  app.add_option("--threads", g.threads, "Worker threads for compare")->check(CLI::PositiveNumber);
  app.add_flag("-q,--quiet", g.quiet, "Suppress summaries and warnings");

  auto* search = app.add_subcommand("search", "Find feasible configurations");
  std::string tau_spec;
  bool grid = false;
  search->add_option("--tau", tau_spec, "Threshold or sweep a..b:n (default: scenario list)");
  search->add_flag("--grid", grid, "Also run the exhaustive grid and report recall/savings");

  auto* plan = app.add_subcommand("plan", "Derive a switching policy from a feasible set");
  std::string feasible_path;
  std::optional<double> slo, slack, cd_up, cd_down;
  plan->add_option("--feasible", feasible_path, "feasible_set.json (default: <out>/feasible_set.json)");
  plan->add_option("--slo-ms", slo, "Latency SLO in ms (default: first scenario SLO)");
  plan->add_option("--slack-ms", slack, "Slack buffer h_s in ms (default: 0.1 * SLO)");
  plan->add_option("--cooldown-up-s", cd_up, "Upscale cooldown in seconds");
  plan->add_option("--cooldown-down-s", cd_down, "Downscale cooldown in seconds");

  auto* simulate = app.add_subcommand("simulate", "Replay a load pattern against a policy");
  SimFlags sf;
  simulate->add_option("--policy", sf.policy, "policy.json (default: <out>/policy.json)");
  simulate->add_option("--pattern", sf.pattern, "constant, spike or bursty")
      ->check(CLI::IsMember({"constant", "spike", "bursty"}));
  simulate->add_option("--base-qps", sf.base_qps, "Base arrival rate (requests/s)");
  simulate->add_option("--duration-s", sf.duration_s, "Arrival window in seconds");
  simulate->add_option("--slo-ms", sf.slo_ms, "SLO for metrics (default: policy SLO)");
  simulate->add_option("--seeds", sf.seeds, "Comma-separated seeds; one run each");
  simulate->add_option("--static", sf.static_entry, "Serve a fixed front entry instead of Elastico");
  simulate->add_option("--switch-latency-ms", sf.switch_latency_ms, "Configuration switch latency");
  simulate->add_flag("--count-in-service", sf.count_in_service,
                     "Count the in-service request in the queue depth");
  simulate->add_flag("--single-rung", sf.single_rung, "Upscale one rung at a time");

  auto* compare = app.add_subcommand("compare", "Run search, plan and simulate over the scenario grid");

  auto* report = app.add_subcommand("report", "Render report.json as Markdown");
  std::string report_path;
  report->add_option("--report", report_path, "report.json (default: <out>/report.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }
  if (g.quiet) warnings_enabled() = false;

  try {
    if (*search) cmd_search(g, tau_spec, grid);
    if (*plan) cmd_plan(g, feasible_path, slo, slack, cd_up, cd_down);
    if (*simulate) cmd_simulate(g, sf);
    if (*compare) cmd_compare(g);
    if (*report) cmd_report(g, report_path);
  } catch (const SloInfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include "compasskit/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace compasskit {

namespace fs = std::filesystem;

namespace {

std::string where(const YAML::Node& n) {
  const auto m = n.Mark();
  if (m.is_null()) return "";
  return " (line " + std::to_string(m.line + 1) + ")";
}

void check_keys(const YAML::Node& n, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!n) return;
  if (!n.IsMap()) throw ValidationError("'" + section + "' must be a mapping" + where(n));
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!ok.count(key))
      throw ValidationError("unknown key '" + key + "' in '" + section + "'" + where(kv.first));
  }
}

template <class T>
T get(const YAML::Node& n, const char* key, T fallback) {
  if (!n || !n[key]) return fallback;
  try {
    return n[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ValidationError(std::string("bad value for '") + key + "'" + where(n[key]));
  }
}

template <class T>
std::vector<T> get_list(const YAML::Node& n, const char* key, std::vector<T> fallback) {
  if (!n || !n[key]) return fallback;
  const auto& v = n[key];
  if (!v.IsSequence()) throw ValidationError(std::string("'") + key + "' must be a list" + where(v));
  std::vector<T> out;
  try {
    for (const auto& x : v) out.push_back(x.as<T>());
  } catch (const YAML::Exception&) {
    throw ValidationError(std::string("bad entry in '") + key + "'" + where(v));
  }
  return out;
}

std::size_t axis_of(const ConfigSpace& space, const std::string& name) {
  auto i = space.param_index(name);
  if (!i) throw ValidationError("unknown parameter '" + name + "'");
  return *i;
}

RawSpace parse_space(const YAML::Node& n) {
  if (!n) throw ValidationError("scenario has no 'space' section");
  check_keys(n, "space", {"parameters", "exclude", "size"});
  RawSpace raw;
  const auto& ps = n["parameters"];
  if (!ps || !ps.IsSequence()) throw ValidationError("'space.parameters' must be a list");
  for (const auto& p : ps) {
    check_keys(p, "space.parameters[]", {"name", "kind", "values"});
    RawParameter rp;
    rp.name = get<std::string>(p, "name", "");
    rp.kind = get<std::string>(p, "kind", "categorical");
    rp.values = get_list<std::string>(p, "values", {});
    raw.params.push_back(std::move(rp));
  }
  if (n["exclude"]) {
    if (!n["exclude"].IsSequence()) throw ValidationError("'space.exclude' must be a list");
    for (const auto& e : n["exclude"]) {
      if (!e.IsMap()) throw ValidationError("exclusion must be a mapping" + where(e));
      std::map<std::string, std::string> m;
      for (const auto& kv : e) m[kv.first.as<std::string>()] = kv.second.as<std::string>();
      raw.exclude.push_back(std::move(m));
    }
  }
  if (n["size"]) raw.declared_size = n["size"].as<std::size_t>();
  return raw;
}

fs::path resolve(const fs::path& base_dir, const std::string& file) {
  fs::path p(file);
  return p.is_absolute() ? p : base_dir / p;
}

std::map<std::string, std::string> labels_of(const CsvTable& t, const ConfigSpace& space,
                                             const std::vector<std::string>& row) {
  std::map<std::string, std::string> m;
  for (const auto& p : space.params()) m[p.name] = row[t.column(p.name)];
  return m;
}

AccuracyOracle parse_oracle(const YAML::Node& n, const ConfigSpace& space, const fs::path& dir,
                            double& margin) {
  if (!n) throw ValidationError("scenario has no 'oracle' section");
  check_keys(n, "oracle", {"family", "base", "margin", "axes", "interactions", "bumps", "table"});
  const auto family = oracle_family_from_string(get<std::string>(n, "family", "rag-like"));
  margin = get<double>(n, "margin", 0.0);
  if (!(margin >= 0 && margin < 0.5)) throw ValidationError("oracle margin must be in [0, 0.5)");

  if (family == OracleFamily::CustomTable) {
    const auto file = get<std::string>(n, "table", "");
    if (file.empty()) throw ValidationError("custom-table oracle needs 'table'");
    const auto t = read_csv(resolve(dir, file));
    const auto acc_col = t.column("accuracy");
    std::vector<std::pair<Configuration, double>> rows;
    for (const auto& r : t.rows) {
      double p = 0;
      try {
        p = std::stod(r[acc_col]);
      } catch (const std::exception&) {
        throw ValidationError("accuracy table has a non-numeric accuracy '" + r[acc_col] + "'");
      }
      rows.emplace_back(config_from_labels(space, labels_of(t, space, r)), p);
    }
    return AccuracyOracle::table(space, rows);
  }

  AccuracyOracle::Coefficients co;
  co.base = get<double>(n, "base", 0.5);
  co.axes.resize(space.dims());
  if (const auto& axes = n["axes"]; axes) {
    if (!axes.IsMap()) throw ValidationError("'oracle.axes' must be a mapping");
    for (const auto& kv : axes) {
      const auto name = kv.first.as<std::string>();
      const auto i = axis_of(space, name);
      check_keys(kv.second, "oracle.axes." + name, {"gain", "curvature", "offsets"});
      co.axes[i].gain = get<double>(kv.second, "gain", 0.0);
      co.axes[i].curvature = get<double>(kv.second, "curvature", 0.0);
      co.axes[i].category_offsets = get_list<double>(kv.second, "offsets", {});
    }
  }
  if (const auto& in = n["interactions"]; in) {
    for (const auto& x : in) {
      check_keys(x, "oracle.interactions[]", {"a", "b", "coeff"});
      co.interactions.push_back({axis_of(space, get<std::string>(x, "a", "")),
                                 axis_of(space, get<std::string>(x, "b", "")),
                                 get<double>(x, "coeff", 0.0)});
    }
  }
  if (const auto& bs = n["bumps"]; bs) {
    for (const auto& x : bs) {
      check_keys(x, "oracle.bumps[]", {"axis", "height", "center", "width"});
      co.bumps.push_back({axis_of(space, get<std::string>(x, "axis", "")),
                          get<double>(x, "height", 0.0), get<double>(x, "center", 0.5),
                          get<double>(x, "width", 0.2)});
    }
  }
  return AccuracyOracle::parametric(space, family, std::move(co));
}

ServiceModel parse_service(const YAML::Node& n, const ConfigSpace& space, const fs::path& dir,
                           std::size_t& profile_runs) {
  if (!n) throw ValidationError("scenario has no 'service_model' section");
  check_keys(n, "service_model",
             {"family", "profile_runs", "base_ms", "axes", "p95_ratio", "trace"});
  profile_runs = get<std::size_t>(n, "profile_runs", 1000);
  if (profile_runs < 100) throw ValidationError("profile_runs must be >= 100");
  const auto family = latency_family_from_string(get<std::string>(n, "family", "lognormal"));

  if (family == LatencyDist::Family::Empirical) {
    const auto file = get<std::string>(n, "trace", "");
    if (file.empty()) throw ValidationError("empirical-trace service model needs 'trace'");
    const auto t = read_csv(resolve(dir, file));
    const auto col = t.column("sample_ms");
    std::map<Configuration, std::vector<double>> samples;
    for (const auto& r : t.rows) {
      double v = 0;
      try {
        v = std::stod(r[col]);
      } catch (const std::exception&) {
        throw ValidationError("latency trace has a non-numeric sample '" + r[col] + "'");
      }
      samples[config_from_labels(space, labels_of(t, space, r))].push_back(v);
    }
    ServiceModel model(space);
    for (auto& [c, xs] : samples) model.set(c, LatencyDist::empirical(std::move(xs)));
    for_each_config(space, [&](const Configuration& c) {
      if (!model.has(c))
        throw ValidationError("latency trace has no samples for " + to_string(c));
    });
    return model;
  }

  LatencyFormula f;
  f.family = family;
  f.base_ms = get<double>(n, "base_ms", 100.0);
  f.p95_ratio = get<double>(n, "p95_ratio", 1.5);
  f.axis_coeff_ms.assign(space.dims(), 0.0);
  f.category_offsets_ms.assign(space.dims(), {});
  if (const auto& axes = n["axes"]; axes) {
    if (!axes.IsMap()) throw ValidationError("'service_model.axes' must be a mapping");
    for (const auto& kv : axes) {
      const auto name = kv.first.as<std::string>();
      const auto i = axis_of(space, name);
      check_keys(kv.second, "service_model.axes." + name, {"coeff_ms", "offsets_ms"});
      f.axis_coeff_ms[i] = get<double>(kv.second, "coeff_ms", 0.0);
      f.category_offsets_ms[i] = get_list<double>(kv.second, "offsets_ms", {});
    }
  }
  return build_service_model(space, f);
}

std::vector<double> parse_taus(const YAML::Node& n) {
  if (!n) return {};
  if (n.IsScalar()) return parse_tau_spec(n.as<std::string>());
  std::vector<double> out;
  for (const auto& x : n) out.push_back(x.as<double>());
  return out;
}

}  // namespace

AccuracyOracle Scenario::oracle_at(double tau) const {
  if (oracle_margin > 0) return oracle.with_margin({tau, oracle_margin});
  return oracle;
}

Scenario load_scenario(const fs::path& path) {
  if (!fs::exists(path)) throw ValidationError("scenario file not found: " + path.string());
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ValidationError("cannot parse scenario " + path.string() + ": " + e.what());
  }
  try {
    check_keys(root, "scenario",
               {"name", "seed", "space", "oracle", "evaluation", "search", "service_model",
                "planning", "simulation"});
    Scenario sc;
    sc.source = path;
    const auto dir = path.parent_path();
    sc.name = get<std::string>(root, "name", path.stem().string());
    sc.seed = get<uint64_t>(root, "seed", 1);
    sc.raw_space = parse_space(root["space"]);
    sc.space = validate_space(sc.raw_space);
    sc.oracle = parse_oracle(root["oracle"], sc.space, dir, sc.oracle_margin);

    const auto& ev = root["evaluation"];
    check_keys(ev, "evaluation", {"budgets", "z", "tau"});
    sc.schedule.levels = get_list<uint32_t>(ev, "budgets", sc.schedule.levels);
    sc.schedule.z = get<double>(ev, "z", sc.schedule.z);
    sc.schedule.validate();
    sc.taus = parse_taus(ev ? ev["tau"] : YAML::Node());
    for (double t : sc.taus)
      if (!(t > 0 && t < 1)) throw ValidationError("tau values must lie in (0,1)");

    const auto& se = root["search"];
    check_keys(se, "search",
               {"n_init", "k_neighbors", "idw_exponent", "low_gradient_quantile",
                "hill_climb_width", "restart_rounds"});
    sc.search.n_init = get<std::size_t>(se, "n_init", sc.search.n_init);
    sc.search.k_neighbors = get<std::size_t>(se, "k_neighbors", sc.search.k_neighbors);
    sc.search.idw_exponent = get<double>(se, "idw_exponent", sc.search.idw_exponent);
    sc.search.low_gradient_quantile =
        get<double>(se, "low_gradient_quantile", sc.search.low_gradient_quantile);
    sc.search.hill_climb_width = get<std::size_t>(se, "hill_climb_width", sc.search.hill_climb_width);
    sc.search.restart_rounds = get<std::size_t>(se, "restart_rounds", sc.search.restart_rounds);

    sc.service = parse_service(root["service_model"], sc.space, dir, sc.profile_runs);

    const auto& pl = root["planning"];
    check_keys(pl, "planning",
               {"tau", "slo_ms", "slack_buffer_ms", "cooldown_up_s", "cooldown_down_s",
                "accuracy_source"});
    sc.planning.tau = get<double>(pl, "tau", sc.planning.tau);
    sc.planning.slo_ms = get_list<double>(pl, "slo_ms", sc.planning.slo_ms);
    if (pl && pl["slack_buffer_ms"]) sc.planning.slack_buffer_ms = pl["slack_buffer_ms"].as<double>();
    sc.planning.cooldown_up_s = get<double>(pl, "cooldown_up_s", sc.planning.cooldown_up_s);
    sc.planning.cooldown_down_s = get<double>(pl, "cooldown_down_s", sc.planning.cooldown_down_s);
    sc.planning.accuracy_source = get<std::string>(pl, "accuracy_source", "oracle");
    if (!(sc.planning.tau > 0 && sc.planning.tau < 1))
      throw ValidationError("planning tau must lie in (0,1)");
    if (sc.planning.slo_ms.empty()) throw ValidationError("planning needs at least one SLO");
    for (double l : sc.planning.slo_ms)
      if (!(l > 0)) throw ValidationError("SLOs must be > 0");
    if (sc.planning.slack_buffer_ms && !(*sc.planning.slack_buffer_ms >= 0))
      throw ValidationError("slack buffer must be >= 0");
    if (sc.planning.accuracy_source != "oracle" && sc.planning.accuracy_source != "estimate")
      throw ValidationError("accuracy_source must be 'oracle' or 'estimate'");

    const auto& sm = root["simulation"];
    check_keys(sm, "simulation",
               {"patterns", "base_qps", "duration_s", "seeds", "switch_latency_ms",
                "count_in_service", "single_rung", "baselines"});
    if (sm && sm["patterns"]) {
      sc.simulation.patterns.clear();
      for (const auto& s : get_list<std::string>(sm, "patterns", {}))
        sc.simulation.patterns.push_back(pattern_kind_from_string(s));
    }
    sc.simulation.base_qps = get<double>(sm, "base_qps", sc.simulation.base_qps);
    sc.simulation.duration_s = get<double>(sm, "duration_s", sc.simulation.duration_s);
    sc.simulation.seeds = get_list<uint64_t>(sm, "seeds", sc.simulation.seeds);
    sc.simulation.switch_latency_ms =
        get<double>(sm, "switch_latency_ms", sc.simulation.switch_latency_ms);
    sc.simulation.count_in_service = get<bool>(sm, "count_in_service", false);
    sc.simulation.single_rung = get<bool>(sm, "single_rung", false);
    if (sm && sm["baselines"]) {
      sc.simulation.baselines.clear();
      for (const auto& b : sm["baselines"]) {
        check_keys(b, "simulation.baselines[]", {"name", "entry"});
        sc.simulation.baselines.push_back(
            {get<std::string>(b, "name", ""), get<std::string>(b, "entry", "")});
      }
    }
    if (sc.simulation.seeds.empty()) throw ValidationError("simulation needs at least one seed");
    LoadPattern probe;
    probe.base_qps = sc.simulation.base_qps;
    probe.duration_s = sc.simulation.duration_s;
    probe.validate();
    return sc;
  } catch (const YAML::Exception& e) {
    throw ValidationError("invalid scenario " + path.string() + ": " + e.what());
  }
}

Configuration config_from_labels(const ConfigSpace& space,
                                 const std::map<std::string, std::string>& labels) {
  Configuration c;
  c.idx.resize(space.dims());
  for (std::size_t i = 0; i < space.dims(); ++i) {
    const auto& p = space.params()[i];
    auto it = labels.find(p.name);
    if (it == labels.end()) throw ValidationError("configuration is missing '" + p.name + "'");
    auto pos = std::find(p.labels.begin(), p.labels.end(), it->second);
    if (pos == p.labels.end()) {
      // Numeric axes accept any spelling of the same number.
      if (p.kind != ParamKind::Categorical) {
        try {
          const double v = std::stod(it->second);
          auto npos = std::find(p.numbers.begin(), p.numbers.end(), v);
          if (npos != p.numbers.end()) {
            c.idx[i] = static_cast<uint32_t>(npos - p.numbers.begin());
            continue;
          }
        } catch (const std::exception&) {
        }
      }
      throw ValidationError("unknown value '" + it->second + "' for '" + p.name + "'");
    }
    c.idx[i] = static_cast<uint32_t>(pos - p.labels.begin());
  }
  if (labels.size() != space.dims())
    throw ValidationError("configuration names parameters outside the space");
  if (!space.contains(c)) throw ValidationError("configuration " + to_string(c) + " is excluded");
  return c;
}

std::vector<double> parse_tau_spec(const std::string& spec) {
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw ValidationError("bad tau specification '" + spec + "'");
    return v;
  };
  std::vector<double> out;
  const auto dots = spec.find("..");
  if (dots == std::string::npos) {
    out.push_back(num(spec));
  } else {
    const auto colon = spec.find(':', dots);
    if (colon == std::string::npos) throw ValidationError("tau range needs ':count' ('" + spec + "')");
    const double a = num(spec.substr(0, dots));
    const double b = num(spec.substr(dots + 2, colon - dots - 2));
    const double cnt = num(spec.substr(colon + 1));
    if (cnt < 1 || cnt != std::floor(cnt)) throw ValidationError("tau count must be a positive integer");
    const auto n = static_cast<std::size_t>(cnt);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
      out.push_back(std::round(t * 1e9) / 1e9);
    }
  }
  for (double t : out)
    if (!(t > 0 && t < 1)) throw ValidationError("tau values must lie in (0,1)");
  return out;
}

std::size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ValidationError("CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        rec.push_back(std::move(field));
        records.push_back(std::move(rec));
      }
      rec.clear();
      field.clear();
      any = false;
    } else {
      field += ch;
      any = true;
    }
  }
  if (quoted) throw ValidationError("unterminated quote in " + path.string());
  if (any || !field.empty()) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw ValidationError("empty CSV file " + path.string());

  CsvTable t;
  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size())
      throw ValidationError(path.string() + ": row " + std::to_string(r + 1) + " has " +
                            std::to_string(records[r].size()) + " fields, expected " +
                            std::to_string(t.header.size()));
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace compasskit

#include "reclab/scenarios.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

using namespace reclab;

namespace {

enum Exit : int { kExitPass = 0, kExitFail = 1, kExitInconclusive = 2, kExitUsage = 3, kExitRuntime = 4 };

int exit_for(const std::string& verdict) {
  if (verdict == kPass) return kExitPass;
  if (verdict == kInconclusive) return kExitInconclusive;
  return kExitFail;
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

std::string render(const ScenarioReport& r, const std::string& format) {
  return format == "csv" ? emit_csv(r) : emit_report(r);
}

unsigned default_workers() {
  if (const char* e = std::getenv("RECLAB_WORKERS")) {
    const auto v = to_int(e, "RECLAB_WORKERS");
    if (v < 1 || v > 1024) throw ConfigError("RECLAB_WORKERS must lie in [1, 1024]");
    return unsigned(v);
  }
  return 1;
}

std::pair<std::string, std::string> split_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got " + s);
  return {trim(s.substr(0, eq)), trim(s.substr(eq + 1))};
}

// Top-level keys: scenario, seed, workers; scenario parameters live in [params].
void apply_scenario_config(const json& cfg, ScenarioConfig& sc) {
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    const std::string& k = it.key();
    if (k == "params") {
      if (!it->is_object()) throw ConfigError("config: params must be a section");
      for (auto p = it->begin(); p != it->end(); ++p) {
        if (!p->is_string()) throw ConfigError("config: params." + p.key() + " must be a scalar");
        sc.params[p.key()] = p->get<std::string>();
      }
    } else if (k == "scenario") {
      if (it->get<std::string>() != sc.name)
        throw ConfigError("config names scenario " + it->get<std::string>() + " but " + sc.name + " was requested");
    } else if (k == "seed") {
      const auto v = parse_bigint(it->get<std::string>());
      if (v < 0 || v > BigInt(std::numeric_limits<std::uint64_t>::max())) throw ConfigError("config: seed out of range");
      sc.seed = static_cast<std::uint64_t>(v);
    } else if (k == "workers") {
      sc.workers = unsigned(std::max<std::int64_t>(1, to_int(it->get<std::string>(), "workers")));
    } else {
      throw ConfigError("config: unknown key " + k);
    }
  }
}

void print_catalog() {
  for (const auto& e : scenario_catalog()) {
    std::cout << e.name << "\n  " << e.summary << "\n";
    for (const auto& p : e.params)
      std::cout << "    " << p.key << " (" << kind_name(p.kind) << ", default " << p.dflt << "): " << p.help << "\n";
  }
  std::cout << "probes:";
  for (const auto& p : probe_names()) std::cout << " " << p;
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reclab: recurrence experiments for linear operators"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "json";
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> horizon, eps;
  bool timing = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out_path, "output path (default stdout)");
    sub->add_option("--workers", workers, "scan threads (default $RECLAB_WORKERS or 1)")->check(CLI::Range(1u, 1024u));
  };

  auto* catalog_cmd = app.add_subcommand("catalog", "list scenarios, their parameters and probes");

  std::string scenario_name;
  auto* scenario_cmd = app.add_subcommand("scenario", "run a catalog scenario");
  scenario_cmd->add_option("name", scenario_name, "scenario name")->required();
  scenario_cmd->add_option("--config", config_path, "config file (key/value or JSON)");
  scenario_cmd->add_option("--set", sets, "parameter override key=value (repeatable)");
  scenario_cmd->add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));
  scenario_cmd->add_option("--seed", seed, "random seed");
  scenario_cmd->add_option("--horizon", horizon, "shorthand for --set horizon=N");
  scenario_cmd->add_option("--eps", eps, "shorthand for --set eps=X");
  scenario_cmd->add_flag("--timing", timing, "record wall-clock runtime_ms (breaks byte-reproducibility)");
  common(scenario_cmd);

  std::string phases;
  std::string rt_eps = "0.01", rt_horizon = "1000000";
  std::size_t count = 10;
  auto* rt_cmd = app.add_subcommand("return-times", "common return times of unimodular phases");
  rt_cmd->add_option("--phases", phases, "comma-separated phases in turns: p/q or decimal")->required();
  rt_cmd->add_option("--eps", rt_eps, "tolerance on max |lambda^n - 1|");
  rt_cmd->add_option("--horizon", rt_horizon, "largest n");
  rt_cmd->add_option("--count", count, "times to report")->check(CLI::Range(std::size_t(1), std::size_t(1) << 20));
  common(rt_cmd);

  std::string probe_name;
  auto* probe_cmd = app.add_subcommand("probe", "run one probe on an operator given by a config file");
  probe_cmd->add_option("name", probe_name, "probe name")->required();
  probe_cmd->add_option("--config", config_path, "config with [operator] and [probe] sections")->required();
  probe_cmd->add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));
  common(probe_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    const unsigned w = workers ? *workers : default_workers();
    if (*catalog_cmd) {
      print_catalog();
      return kExitPass;
    }
    if (*scenario_cmd) {
      ScenarioConfig sc;
      sc.name = scenario_name;
      find_scenario(sc.name);
      if (!config_path.empty()) apply_scenario_config(read_config_file(config_path), sc);
      for (const auto& s : sets) {
        auto [k, v] = split_assignment(s);
        sc.params[k] = v;
      }
      if (horizon) sc.params["horizon"] = *horizon;
      if (eps) sc.params["eps"] = *eps;
      if (seed) sc.seed = seed;
      if (workers || std::getenv("RECLAB_WORKERS")) sc.workers = w;
      sc.timing = timing;
      const auto r = run_scenario(sc);
      write_output(render(r, format), out_path);
      return exit_for(r.verdict);
    }
    if (*rt_cmd) {
      const auto ph = parse_phase_list(phases, "phases");
      const auto res = find_return_times(ph, to_real(rt_eps, "eps"), parse_bigint(rt_horizon), count, w);
      std::string out = "time,error\n";
      for (std::size_t i = 0; i < res.times.size(); ++i) out += res.times[i].str() + "," + format_double(res.errors[i]) + "\n";
      if (!res.found()) {
        out += "# no return below the horizon; best near miss\n";
        if (res.near_miss) out += res.near_miss->time.str() + "," + format_double(res.near_miss->error) + "\n";
      }
      write_output(out, out_path);
      return res.found() ? kExitPass : kExitInconclusive;
    }
    if (*probe_cmd) {
      const auto r = run_probe(probe_name, read_config_file(config_path), w);
      write_output(render(r, format), out_path);
      return exit_for(r.verdict);
    }
  } catch (const UnknownScenario& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

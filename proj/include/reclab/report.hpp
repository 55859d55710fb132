#pragma once

#include "reclab/recurrence.hpp"

#include <cstdio>
#include <sstream>

namespace reclab {

struct Check {
  std::string name;
  std::string verdict;  // pass | fail | inconclusive-at-horizon
  std::string horizon;  // decimal integer, or "structured" when only structured times were used
  double tolerance = 0.0;
  json data = json::object();
  bool operator==(const Check&) const = default;
};

struct ScenarioReport {
  std::string scenario;
  json params = json::object();
  std::uint64_t seed = 0;
  bool seed_defaulted = false;
  std::vector<Check> checks;
  std::string verdict;
  double runtime_ms = 0.0;
  bool operator==(const ScenarioReport&) const = default;
};

// ---------------------------------------------------------------------------
// canonical JSON: sorted keys, %.17g floats, non-finite floats as strings

inline std::string format_double(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

// Replaces non-finite floats with their string spellings so emit/parse is lossless.
inline json canonical(const json& j) {
  if (j.is_object()) {
    json out = json::object();
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = canonical(it.value());
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(canonical(v));
    return out;
  }
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  }
  return j;
}

namespace detail {

inline void emit_into(const json& j, std::string& out, int indent) {
  const std::string pad(std::size_t(indent + 2), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += pad + json(it.key()).dump() + ": ";
      emit_into(it.value(), out, indent + 2);
    }
    out += "\n" + std::string(std::size_t(indent), ' ') + "}";
  } else if (j.is_array()) {
    if (j.empty()) {
      out += "[]";
      return;
    }
    bool scalar = true;
    for (const auto& v : j) scalar = scalar && !v.is_structured();
    if (scalar) {
      out += "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ", ";
        emit_into(j[i], out, indent);
      }
      out += "]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) out += ",\n";
      out += pad;
      emit_into(j[i], out, indent + 2);
    }
    out += "\n" + std::string(std::size_t(indent), ' ') + "]";
  } else if (j.is_number_float()) {
    out += format_double(j.get<double>());
  } else {
    out += j.dump();
  }
}

}  // namespace detail

inline std::string emit_canonical(const json& j) {
  std::string out;
  detail::emit_into(j, out, 0);
  out += "\n";
  return out;
}

// ---------------------------------------------------------------------------
// probe reports

inline json trajectory_json(const std::vector<TrajPoint>& tr) {
  json a = json::array();
  for (const auto& p : tr) a.push_back({{"time", p.time.str()}, {"error", p.error}, {"tail_bound", p.tail}});
  return a;
}

inline json times_json(const std::vector<BigInt>& t) {
  json a = json::array();
  for (const auto& v : t) a.push_back(v.str());
  return a;
}

inline json recurrence_json(const RecurrenceReport& r) {
  json j = {{"probe", r.probe},
            {"verdict", verdict_name(r.verdict)},
            {"horizon", r.horizon.str()},
            {"tolerance", r.tolerance},
            {"tail_bound", r.tail_bound},
            {"trajectory", trajectory_json(r.trajectory)},
            {"data", r.data}};
  if (r.times) j["times"] = {{"provenance", provenance_name(r.times->provenance)}, {"values", times_json(r.times->times)}};
  if (r.near_miss) j["near_miss"] = {{"time", r.near_miss->time.str()}, {"error", r.near_miss->error}};
  return canonical(j);
}

// ---------------------------------------------------------------------------
// scenario reports

inline json to_json(const ScenarioReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back(
        {{"name", c.name}, {"verdict", c.verdict}, {"horizon", c.horizon}, {"tolerance", c.tolerance}, {"data", c.data}});
  return canonical({{"scenario", r.scenario},
                    {"params", r.params},
                    {"seed", r.seed},
                    {"seed_defaulted", r.seed_defaulted},
                    {"checks", checks},
                    {"verdict", r.verdict},
                    {"runtime_ms", r.runtime_ms}});
}

inline double json_double(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::nan("");
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    throw ConfigError("report: expected a number, got string " + s);
  }
  return j.get<double>();
}

inline ScenarioReport report_from_json(const json& j) {
  static const char* keys[] = {"scenario", "params", "seed", "seed_defaulted", "checks", "verdict", "runtime_ms"};
  for (const char* k : keys)
    if (!j.contains(k)) throw ConfigError(std::string("report: missing key ") + k);
  ScenarioReport r;
  r.scenario = j["scenario"].get<std::string>();
  r.params = j["params"];
  r.seed = j["seed"].get<std::uint64_t>();
  r.seed_defaulted = j["seed_defaulted"].get<bool>();
  r.verdict = j["verdict"].get<std::string>();
  r.runtime_ms = json_double(j["runtime_ms"]);
  for (const auto& c : j["checks"]) {
    for (const char* k : {"name", "verdict", "horizon", "tolerance", "data"})
      if (!c.contains(k)) throw ConfigError(std::string("report: check missing key ") + k);
    r.checks.push_back({c["name"].get<std::string>(), c["verdict"].get<std::string>(), c["horizon"].get<std::string>(),
                        json_double(c["tolerance"]), c["data"]});
  }
  return r;
}

inline std::string emit_report(const ScenarioReport& r) { return emit_canonical(to_json(r)); }

inline ScenarioReport parse_report(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("report: ") + e.what());
  }
  return report_from_json(j);
}

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_header() { return "time,error,tail_bound\n"; }

inline std::string csv_rows(const json& trajectory) {
  std::string out;
  for (const auto& p : trajectory) {
    out += p["time"].get<std::string>() + ",";
    out += format_double(json_double(p["error"])) + ",";
    out += format_double(json_double(p["tail_bound"])) + "\n";
  }
  return out;
}

inline std::string trajectory_csv(const std::vector<TrajPoint>& tr) { return csv_header() + csv_rows(trajectory_json(tr)); }

// One block per check carrying a trajectory, each introduced by "# check <name>".
inline std::string emit_csv(const ScenarioReport& r) {
  std::string out;
  for (const auto& c : r.checks) {
    std::vector<std::pair<std::string, const json*>> blocks;
    if (c.data.contains("trajectory")) blocks.emplace_back(c.name, &c.data["trajectory"]);
    if (c.data.contains("probes"))
      for (auto it = c.data["probes"].begin(); it != c.data["probes"].end(); ++it)
        if (it.value().is_object() && it.value().contains("trajectory"))
          blocks.emplace_back(c.name + "/" + it.key(), &it.value()["trajectory"]);
    for (const auto& [name, tr] : blocks) {
      if (tr->empty()) continue;
      out += "# check " + name + "\n" + csv_header() + csv_rows(*tr);
    }
  }
  return out;
}

}  // namespace reclab

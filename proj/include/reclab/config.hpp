#pragma once

#include "reclab/report.hpp"

#include <fstream>

namespace reclab {

// ---------------------------------------------------------------------------
// key/value format
//
//   # comment
//   key = value
//   [section]          keys below land in json["section"]
//   [section.sub]      nested sections
//
// Values stay strings; consumers coerce them.

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto at = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, at - pos)));
    if (at == std::string::npos) break;
    pos = at + 1;
  }
  return out;
}

inline json parse_kv(const std::string& text) {
  json root = json::object();
  json* cur = &root;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::string where = "config line " + std::to_string(lineno) + ": ";
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + "unterminated section header");
      const std::string name = trim(t.substr(1, t.size() - 2));
      if (name.empty()) throw ConfigError(where + "empty section name");
      cur = &root;
      for (const auto& part : split(name, '.')) {
        if (part.empty()) throw ConfigError(where + "empty section component");
        json& next = (*cur)[part];
        if (next.is_null()) next = json::object();
        if (!next.is_object()) throw ConfigError(where + "section " + part + " clashes with a key");
        cur = &next;
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (cur->contains(key)) throw ConfigError(where + "duplicate key " + key);
    (*cur)[key] = trim(t.substr(eq + 1));
  }
  return root;
}

inline std::string emit_kv(const json& j) {
  std::string flat, nested;
  std::function<void(const json&, const std::string&)> walk = [&](const json& obj, const std::string& prefix) {
    std::string here;
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!it.value().is_object()) here += it.key() + " = " + it.value().get<std::string>() + "\n";
    if (prefix.empty()) flat += here;
    else if (!here.empty()) nested += "\n[" + prefix + "]\n" + here;
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (it.value().is_object()) walk(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key());
  };
  walk(j, "");
  return flat + nested;
}

// JSON when the text starts with '{', key/value otherwise. JSON scalars are turned into strings.
inline json parse_config_text(const std::string& text) {
  const auto b = text.find_first_not_of(" \t\r\n");
  if (b != std::string::npos && text[b] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    std::function<json(const json&)> stringify = [&](const json& v) -> json {
      if (v.is_object()) {
        json o = json::object();
        for (auto it = v.begin(); it != v.end(); ++it) o[it.key()] = stringify(it.value());
        return o;
      }
      if (v.is_string()) return v;
      if (v.is_number_float()) {
        std::string s = format_double(v.get<double>());
        if (s.front() == '"') s = s.substr(1, s.size() - 2);
        return s;
      }
      return v.dump();
    };
    return stringify(j);
  }
  return parse_kv(text);
}

inline json read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------
// scalar coercion

inline std::int64_t to_int(const std::string& s, const std::string& key) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("parameter " + key + ": expected an integer, got '" + s + "'");
  }
  if (used != s.size()) {
    // allow 1e6 style for integral values
    double d = 0;
    try {
      d = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || d != std::floor(d) || std::abs(d) > 9e18)
      throw ConfigError("parameter " + key + ": expected an integer, got '" + s + "'");
    return static_cast<std::int64_t>(d);
  }
  return v;
}

inline double to_real(const std::string& s, const std::string& key) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("parameter " + key + ": expected a number, got '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw ConfigError("parameter " + key + ": expected a number, got '" + s + "'");
  return v;
}

inline bool to_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("parameter " + key + ": expected true or false, got '" + s + "'");
}

inline std::string real_str(double v) {
  std::string s = format_double(v);
  return s.front() == '"' ? s.substr(1, s.size() - 2) : s;
}

// "re" or "(re,im)"
inline cplx parse_complex(const std::string& s_in, const std::string& key = "value") {
  const std::string s = trim(s_in);
  if (!s.empty() && s.front() == '(') {
    if (s.back() != ')') throw ConfigError(key + ": unterminated complex literal '" + s + "'");
    const auto parts = split(s.substr(1, s.size() - 2), ',');
    if (parts.size() != 2) throw ConfigError(key + ": complex literal needs (re,im), got '" + s + "'");
    return {to_real(parts[0], key), to_real(parts[1], key)};
  }
  return {to_real(s, key), 0.0};
}

inline std::string complex_str(cplx z) {
  if (z.imag() == 0.0) return real_str(z.real());
  return "(" + real_str(z.real()) + "," + real_str(z.imag()) + ")";
}

// Entries separated by ';' so complex literals may contain commas.
inline std::vector<cplx> parse_complex_list(const std::string& s, const std::string& key) {
  std::vector<cplx> out;
  for (const auto& part : split(s, ';'))
    if (!part.empty()) out.push_back(parse_complex(part, key));
  if (out.empty()) throw ConfigError(key + ": empty vector");
  return out;
}

inline std::vector<double> parse_real_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  for (const auto& part : split(s, ','))
    if (!part.empty()) out.push_back(to_real(part, key));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

inline std::vector<PhaseAngle> parse_phase_list(const std::string& s, const std::string& key) {
  std::vector<PhaseAngle> out;
  for (const auto& part : split(s, ','))
    if (!part.empty()) out.push_back(parse_phase(part));
  if (out.empty()) throw ConfigError(key + ": empty phase list");
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& v, const char* sep, F&& f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + f(v[i]);
  return s;
}

// ---------------------------------------------------------------------------
// operator specs

inline std::string m_list(const MSequence& m) {
  return "list:" + join(m.m, ",", [](const BigInt& v) { return v.str(); });
}

namespace detail {

inline const std::string& need(const json& sec, const std::string& key) {
  if (!sec.contains(key)) throw ConfigError("missing key " + key);
  return sec[key].get_ref<const std::string&>();
}

inline void only_keys(const json& sec, std::initializer_list<const char*> allowed) {
  for (auto it = sec.begin(); it != sec.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("operator: unknown key " + it.key());
  }
}

inline std::string opt(const json& sec, const std::string& key, const std::string& dflt) {
  return sec.contains(key) ? sec[key].get<std::string>() : dflt;
}

inline MSequence m_from(const std::string& text, int first, int count) {
  const MSchedule s = MSchedule::parse(text);
  MSequence m;
  m.first = first;
  const int n = s.kind == MSchedule::Kind::list ? int(s.values.size()) : count;
  for (int j = 1; j <= n; ++j) m.m.push_back(s.term(j));
  return m;
}

inline bool same_directions(const std::vector<Direction>& a, const std::vector<Direction>& b) { return a == b; }

}  // namespace detail

inline json operator_to_kv(const OperatorSpec& op) {
  json s = json::object();
  s["family"] = family_name(op);
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, DiagonalUnitary>) {
          s["phases"] = join(o.phases, ",", [](const PhaseAngle& p) { return p.to_string(); });
          s["offset"] = std::to_string(o.offset);
        } else if constexpr (std::is_same_v<T, AugeTapia>) {
          const auto regen = build_g_sequence(o.d, int(o.g.directions.size()), o.g.seed, o.g.order);
          if (!detail::same_directions(regen.directions, o.g.directions) || !o.g.scales.empty())
            throw ConfigError("operator: g-sequence is not reproducible from its seed and cannot be serialized");
          s["d"] = std::to_string(o.d);
          s["K"] = std::to_string(o.K);
          s["m"] = m_list(o.m);
          s["g_seed"] = std::to_string(o.g.seed);
          s["g_count"] = std::to_string(o.g.directions.size());
        } else if constexpr (std::is_same_v<T, QRNH>) {
          s["D"] = std::to_string(o.D);
          s["K"] = std::to_string(o.K);
          s["m"] = m_list(o.m);
          // omegas serialize compactly when they match the default enumeration, otherwise explicitly
          if (o.omegas == build_qrnh_omegas(o.D, int(o.omegas.size()), 0)) {
            s["omega_seed"] = "0";
            s["omega_count"] = std::to_string(o.omegas.size());
          } else {
            json w = json::object();
            for (std::size_t k = 0; k < o.omegas.size(); ++k)
              w[std::to_string(k)] = join(o.omegas[k], ";", [](cplx z) { return complex_str(z); });
            s["omegas"] = w;
          }
        } else if constexpr (std::is_same_v<T, MultiplicationAtomic>) {
          s["weights"] = join(o.weights, ",", real_str);
          s["phases"] = join(o.phases, ",", [](const PhaseAngle& p) { return p.to_string(); });
          s["moduli"] = join(o.moduli, ",", real_str);
          s["p"] = real_str(o.p);
        } else if constexpr (std::is_same_v<T, AffineComposition>) {
          if (o.a_phase) s["a_phase"] = o.a_phase->to_string();
          else s["a"] = complex_str(o.a);
          s["b"] = complex_str(o.b);
          s["model"] = model_name(o.model);
          s["size"] = std::to_string(o.size);
        } else if constexpr (std::is_same_v<T, DirichletComposition>) {
          s["t"] = real_str(o.t);
          s["N"] = std::to_string(o.N);
        } else {
          s["periods"] = join(o.periods, ",", [](std::int64_t v) { return std::to_string(v); });
          s["first_scale"] = real_str(o.scales.front());
        }
      },
      op);
  return s;
}

inline OperatorSpec operator_from_kv(const json& s) {
  using detail::need;
  using detail::only_keys;
  using detail::opt;
  const std::string fam = need(s, "family");
  auto geti = [&](const std::string& k, const std::string& d) { return to_int(opt(s, k, d), k); };
  if (fam == "diagonal-unitary") {
    only_keys(s, {"family", "phases", "offset"});
    return make_diagonal(parse_phase_list(need(s, "phases"), "phases"), geti("offset", "1"));
  }
  if (fam == "auge-tapia") {
    only_keys(s, {"family", "d", "K", "m", "g_seed", "g_count", "schedule", "seed"});
    const int d = int(geti("d", "2")), K = int(geti("K", "32"));
    if (d < 1 || d > 64 || K < 1 || K > 100000) throw ConfigError("operator: d or K out of range");
    if (!s.contains("m") && !s.contains("g_count"))
      return make_auge_tapia(d, K, MSchedule::parse(opt(s, "schedule", "triangular")),
                             std::uint64_t(geti("seed", "0")));
    const MSequence m = detail::m_from(opt(s, "m", opt(s, "schedule", "triangular")), 1, d + K + kTailExtra);
    const int gc = int(geti("g_count", std::to_string(revisit_count_for(std::size_t(K + kTailExtra)))));
    return make_auge_tapia(d, K, m, build_g_sequence(d, gc, std::uint64_t(geti("g_seed", opt(s, "seed", "0")))));
  }
  if (fam == "qrnh") {
    only_keys(s, {"family", "D", "K", "m", "omega_seed", "omega_count", "omegas", "seed"});
    const int D = int(geti("D", "16")), K = int(geti("K", "16"));
    if (D < 1 || D > 100000 || K < 1 || K > 100000) throw ConfigError("operator: D or K out of range");
    if (!s.contains("m") && !s.contains("omegas") && !s.contains("omega_count"))
      return make_qrnh(D, K, std::uint64_t(geti("seed", "0")));
    MSequence m;
    m.first = 0;
    if (s.contains("m")) {
      m = detail::m_from(need(s, "m"), 0, K + kTailExtra);
    } else {
      for (int j = 1; j <= K + kTailExtra; ++j) m.m.push_back(MSchedule{}.term(j));
    }
    std::vector<Direction> omegas;
    if (s.contains("omegas")) {
      const json& w = s["omegas"];
      for (std::size_t k = 0; w.contains(std::to_string(k)); ++k)
        omegas.push_back(parse_complex_list(w[std::to_string(k)].get<std::string>(), "omegas." + std::to_string(k)));
    } else {
      omegas = build_qrnh_omegas(D, int(geti("omega_count", std::to_string(K + kTailExtra))),
                                 std::uint64_t(geti("omega_seed", opt(s, "seed", "0"))));
    }
    return make_qrnh(D, K, m, std::move(omegas));
  }
  if (fam == "multiplication-atomic") {
    only_keys(s, {"family", "weights", "phases", "moduli", "p"});
    const auto phases = parse_phase_list(need(s, "phases"), "phases");
    const auto weights = s.contains("weights") ? parse_real_list(need(s, "weights"), "weights")
                                               : std::vector<double>(phases.size(), 1.0);
    const auto moduli = s.contains("moduli") ? parse_real_list(need(s, "moduli"), "moduli")
                                             : std::vector<double>(phases.size(), 1.0);
    return make_multiplication(weights, phases, moduli, to_real(opt(s, "p", "2"), "p"));
  }
  if (fam == "affine-composition") {
    only_keys(s, {"family", "a", "a_phase", "b", "model", "size"});
    std::optional<PhaseAngle> ap;
    if (s.contains("a_phase")) ap = parse_phase(need(s, "a_phase"));
    const cplx a = parse_complex(opt(s, "a", "1"), "a");
    const auto size = geti("size", "8");
    if (size < 1 || size > 4096) throw ConfigError("operator: size out of range");
    return make_affine(a, parse_complex(opt(s, "b", "0"), "b"), parse_model(opt(s, "model", "H(C)")), std::size_t(size), ap);
  }
  if (fam == "dirichlet-composition") {
    only_keys(s, {"family", "t", "N"});
    return make_dirichlet(to_real(opt(s, "t", "0"), "t"), int(geti("N", "8")));
  }
  if (fam == "periodic-cascade") {
    only_keys(s, {"family", "periods", "first_scale"});
    std::vector<std::int64_t> periods;
    for (const auto& p : split(need(s, "periods"), ','))
      if (!p.empty()) periods.push_back(to_int(p, "periods"));
    return make_cascade(periods, to_real(opt(s, "first_scale", "1"), "first_scale"));
  }
  throw ConfigError("operator: unknown family " + fam);
}

// Vector "x" on the operator window: entries separated by ';', optional x_offset.
inline CoeffVec vector_from_kv(const json& s, const std::string& key, const OperatorSpec& op) {
  if (!s.contains(key)) throw ConfigError("missing key " + key);
  const auto coeffs = parse_complex_list(s[key].get<std::string>(), key);
  const std::string okey = key + "_offset";
  const std::int64_t off = s.contains(okey) ? to_int(s[okey].get<std::string>(), okey) : window(op).offset;
  return fit_window(op, CoeffVec(off, coeffs));
}

inline std::string vector_to_kv(const CoeffVec& v) {
  return join(v.coeffs(), ";", [](cplx z) { return complex_str(z); });
}

}  // namespace reclab

#pragma once

#include "reclab/config.hpp"
#include "reclab/dstar.hpp"

#include <chrono>
#include <functional>
#include <numeric>

namespace reclab {

// ---------------------------------------------------------------------------
// configuration

struct ScenarioConfig {
  std::string name;
  std::map<std::string, std::string> params;  // overrides as text; every key has a default
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  bool timing = false;  // record wall-clock; otherwise runtime_ms is 0 so reports stay byte-stable
};

struct UnknownScenario : ConfigError {
  using ConfigError::ConfigError;
};

struct ParamDef {
  enum class Kind { integer, real, boolean, text };
  std::string key;
  Kind kind = Kind::integer;
  std::string dflt;
  double lo = -HUGE_VAL;
  double hi = HUGE_VAL;
  std::string help;
};

inline std::string kind_name(ParamDef::Kind k) {
  switch (k) {
    case ParamDef::Kind::integer: return "int";
    case ParamDef::Kind::real: return "real";
    case ParamDef::Kind::boolean: return "bool";
    case ParamDef::Kind::text: return "text";
  }
  return {};
}

class Params {
 public:
  Params(const std::string& scenario, const std::vector<ParamDef>& defs, const std::map<std::string, std::string>& over) {
    for (const auto& [k, v] : over) {
      const bool known = std::any_of(defs.begin(), defs.end(), [&](const ParamDef& d) { return d.key == k; });
      if (!known) throw ConfigError("scenario " + scenario + ": unknown parameter " + k);
    }
    for (const auto& d : defs) {
      const auto it = over.find(d.key);
      const std::string text = it == over.end() ? d.dflt : it->second;
      auto range = [&](double v) {
        if (v < d.lo || v > d.hi)
          throw ConfigError("scenario " + scenario + ": parameter " + d.key + " = " + text + " out of range [" +
                            real_str(d.lo) + ", " + real_str(d.hi) + "]");
      };
      switch (d.kind) {
        case ParamDef::Kind::integer: {
          const auto v = to_int(text, d.key);
          range(double(v));
          values_[d.key] = v;
          break;
        }
        case ParamDef::Kind::real: {
          const double v = to_real(text, d.key);
          range(v);
          values_[d.key] = v;
          break;
        }
        case ParamDef::Kind::boolean: values_[d.key] = to_bool(text, d.key); break;
        case ParamDef::Kind::text: values_[d.key] = text; break;
      }
    }
  }

  std::int64_t i(const std::string& k) const { return values_.at(k).get<std::int64_t>(); }
  double r(const std::string& k) const { return values_.at(k).get<double>(); }
  bool b(const std::string& k) const { return values_.at(k).get<bool>(); }
  std::string s(const std::string& k) const { return values_.at(k).get<std::string>(); }
  const json& effective() const { return values_; }

 private:
  json values_ = json::object();
};

// Portable draws from mt19937_64; the standard distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  double uniform() { return double(g_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::uint64_t below(std::uint64_t n) { return g_() % n; }
  double normal() {
    double u = 0.0;
    while (u <= 0.0) u = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * kPi * uniform());
  }
  cplx cnormal() { return cplx{normal(), normal()} / std::sqrt(2.0); }

 private:
  std::mt19937_64 g_;
};

inline const std::string kPass = "pass";
inline const std::string kFail = "fail";
inline const std::string kInconclusive = "inconclusive-at-horizon";

inline const std::string& pass_fail(bool ok) { return ok ? kPass : kFail; }

// Probe verdicts folded onto the three check verdicts.
inline const std::string& check_verdict(Verdict v) {
  switch (v) {
    case Verdict::pass:
    case Verdict::consistent:
    case Verdict::stationary_consistent: return kPass;
    case Verdict::inconclusive: return kInconclusive;
    default: return kFail;
  }
}

struct ScenarioContext {
  Params params;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  Rng rng;
  std::vector<Check> checks;

  ProbeOptions opt() const { return {workers, seed}; }
  void add(const std::string& name, const std::string& verdict, const std::string& horizon, double tolerance, json data) {
    checks.push_back({name, verdict, horizon, tolerance, std::move(data)});
  }
};

struct ScenarioEntry {
  std::string name;
  std::string summary;
  std::vector<ParamDef> params;
  std::function<void(ScenarioContext&)> run;
};

inline std::string overall_verdict(const std::vector<Check>& checks) {
  bool inconclusive = false;
  for (const auto& c : checks) {
    if (c.verdict == kFail) return kFail;
    inconclusive = inconclusive || c.verdict == kInconclusive;
  }
  return inconclusive ? kInconclusive : kPass;
}

// ---------------------------------------------------------------------------
// shared helpers

namespace scn {

using K = ParamDef::Kind;

inline CoeffVec normalized(const CoeffVec& x) {
  const double n = l2_of(x);
  return n > 0.0 ? cplx(1.0 / n, 0.0) * x : x;
}

inline std::vector<CoeffVec> standard_basis(const OperatorSpec& op) {
  const Window w = window(op);
  std::vector<CoeffVec> out;
  for (std::size_t i = 0; i < w.size; ++i) out.push_back(CoeffVec::unit(w.offset + std::int64_t(i), w.offset, w.size));
  return out;
}

inline json near_miss_json(std::uint64_t t, double e) { return {{"time", std::to_string(t)}, {"error", e}}; }

inline json times_of(const ReturnSequence& s) { return times_json(s.times); }

inline std::uint64_t scan_horizon(const Params& p, const std::string& key) {
  return std::uint64_t(std::min<std::int64_t>(p.i(key), std::int64_t(kScanCap)));
}

// ---------------------------------------------------------------------------
// Auge-Tapia setup shared by the recurrent and non-recurrent scenarios

inline std::vector<ParamDef> tapia_params(const std::string& horizon) {
  return {{"d", K::integer, "2", 2, 4, "dimension of the driving block"},
          {"K", K::integer, "64", 8, 256, "perturbed coordinates d+1..d+K"},
          {"schedule", K::text, "triangular", -HUGE_VAL, HUGE_VAL, "m-schedule"},
          {"g_seed", K::integer, "0", 0, 9e18, "seed of the g-enumeration"},
          {"noise", K::real, "1e-3", 0, 1, "size of the generic coordinates"},
          {"noise_depth", K::integer, "8", 0, 64, "generic coordinates d+1..d+noise_depth"},
          {"eps", K::real, "0.01", 1e-12, 1, "return tolerance"},
          {"depth", K::integer, "6", 1, 32, "structured return times checked per vector"},
          {"horizon", K::integer, horizon, 1, 1e7, "scan horizon"},
          {"obstruction_n", K::integer, "1000", 1, 1e6, "identity checked for n = 1..obstruction_n"}};
}

// A unit vector v with sum_i dir_i v_i = 0.
inline Direction orthogonal_direction(const Direction& dir) {
  std::vector<std::size_t> nz;
  for (std::size_t i = 0; i < dir.size(); ++i)
    if (dir[i] != cplx{}) nz.push_back(i);
  Direction v(dir.size());
  if (nz.size() >= 2) {
    v[nz[0]] = dir[nz[1]];
    v[nz[1]] = -dir[nz[0]];
    const double n = std::sqrt(std::norm(v[nz[0]]) + std::norm(v[nz[1]]));
    v[nz[0]] /= n;
    v[nz[1]] /= n;
  } else if (nz.size() == 1) {
    v[(nz[0] + 1) % dir.size()] = 1.0;
  } else {
    v[0] = 1.0;
  }
  return v;
}

// Visits theta > after of base direction b, each giving the time 2 m_{theta-1}.
inline ReturnSequence tapia_visit_times(const AugeTapia& op, std::size_t b, int after, std::size_t depth) {
  std::vector<BigInt> t;
  for (auto j : op.g.visits(b, std::size_t(op.K))) {
    const int theta = int(j) + op.d + 1;
    if (theta > after && t.size() < depth) t.push_back(2 * op.m.at(theta - 1));
  }
  if (t.size() < depth)
    throw ConfigError("only " + std::to_string(t.size()) + " visits of direction " + std::to_string(b) +
                      " beyond index " + std::to_string(after) + "; raise K or lower depth");
  return {std::move(t), Provenance::structured_mk};
}

struct TapiaSetup {
  AugeTapia op;
  std::vector<CoeffVec> ys;
  std::vector<ReturnSequence> single;
};

// y_i: P y_i orthogonal to direction i, plus generic coordinates on d+1..d+noise_depth.
inline TapiaSetup tapia_setup(ScenarioContext& c) {
  const auto& p = c.params;
  const int d = int(p.i("d")), Kk = int(p.i("K"));
  const int nd = int(p.i("noise_depth"));
  TapiaSetup t{make_auge_tapia(d, Kk, MSchedule::parse(p.s("schedule")), std::uint64_t(p.i("g_seed"))), {}, {}};
  for (int b = 0; b < d; ++b) {
    CoeffVec y = CoeffVec::zeros(1, std::size_t(d + Kk));
    const Direction v = orthogonal_direction(t.op.g.directions.at(std::size_t(b)));
    for (int i = 0; i < d; ++i) y.set(i + 1, v[std::size_t(i)]);
    for (int k = d + 1; k <= std::min(d + nd, d + Kk); ++k) y.set(k, p.r("noise") * c.rng.cnormal());
    t.ys.push_back(y);
    t.single.push_back(tapia_visit_times(t.op, std::size_t(b), d + nd, std::size_t(p.i("depth"))));
  }
  return t;
}

inline void add_single_returns(ScenarioContext& c, const TapiaSetup& t, const std::string& name) {
  const int depth = int(c.params.i("depth"));
  const double eps = c.params.r("eps");
  const auto sched = ToleranceSchedule::harmonic(depth, eps * depth);
  json per = json::object();
  bool ok = true;
  for (std::size_t i = 0; i < t.ys.size(); ++i) {
    const auto r = in_L_omega(t.op, t.ys[i], t.single[i], sched);
    ok = ok && r.verdict == Verdict::pass;
    per["y" + std::to_string(i)] = recurrence_json(r);
  }
  c.add(name, pass_fail(ok), "structured", eps, {{"probes", per}, {"schedule", "harmonic"}});
}

inline void add_obstruction_identity(ScenarioContext& c, const TapiaSetup& t, const std::vector<BigInt>& extra) {
  const auto n_max = std::uint64_t(c.params.i("obstruction_n"));
  constexpr double tol = 1e-10;
  double worst = 0.0;
  json at = json::object();
  std::vector<BigInt> ns;
  for (std::uint64_t n = 1; n <= n_max; ++n) ns.emplace_back(n);
  ns.insert(ns.end(), extra.begin(), extra.end());
  for (const auto& n : ns)
    for (std::size_t i = 0; i < t.ys.size(); ++i) {
      const auto row = tapia_obstruction_row(t.op, t.ys[i], n);
      for (std::size_t j = 0; j < row.size(); ++j)
        if (row[j].relative_gap() > worst || at.empty()) {
          worst = row[j].relative_gap();
          at = {{"time", n.str()}, {"k", int(j) + t.op.d + 1}, {"vector", i}};
        }
    }
  c.add("obstruction-identity", pass_fail(worst < tol), std::to_string(n_max), tol,
        {{"worst_relative_gap", worst}, {"at", at}, {"times_checked", ns.size()}});
}

// ---------------------------------------------------------------------------
// auge-tapia-recurrent-not-quasi-rigid

inline void at_recurrent_not_quasi_rigid(ScenarioContext& c) {
  const auto t = tapia_setup(c);
  add_single_returns(c, t, "single-vector-recurrence");
  const int d = t.op.d;
  const double qe = c.params.r("qr_eps");
  const auto sched = ToleranceSchedule::harmonic(d, qe * d);
  const auto h = scan_horizon(c.params, "horizon");
  const auto qr = quasi_rigidity_probe(t.op, t.ys, sched, BigInt(h), c.opt());
  const int failed_k = qr.data.value("failed_k", 0);
  // Passing requires the failure to sit on a tuple: the first vector alone must have returned.
  const std::string v = qr.verdict == Verdict::pass ? kFail : failed_k >= 2 ? kPass : kInconclusive;
  c.add("quasi-rigidity-fails", v, std::to_string(h), sched.final_eps(), {{"probes", {{"quasi_rigidity", recurrence_json(qr)}}}});
  std::vector<BigInt> extra;
  if (qr.near_miss && qr.near_miss->time > 0) extra.push_back(qr.near_miss->time);
  add_obstruction_identity(c, t, extra);
}

// ---------------------------------------------------------------------------
// td-not-recurrent

inline void td_not_recurrent(ScenarioContext& c) {
  const auto t = tapia_setup(c);
  const double eps = c.params.r("eps");
  const auto h = scan_horizon(c.params, "horizon");
  const OperatorSpec spec = t.op;
  const ReturnErrors errs(spec, t.ys);
  const auto s = scan_range(1, h, eps, 1, c.workers, [&](std::uint64_t n, double cut) { return errs.max_error(n, cut); });
  json data = {{"eps", eps}, {"scanned_to", std::to_string(s.scanned_to)}};
  if (s.times.empty()) data["near_miss"] = near_miss_json(s.best_time, s.best_error);
  else data["first_return"] = near_miss_json(s.times[0], s.errors[0]);
  c.add("common-return-absent", pass_fail(s.times.empty()), std::to_string(h), eps, data);

  // With no return below eps, some coordinate of the near miss carries at least error / sqrt(K).
  std::vector<BigInt> extra;
  if (s.times.empty() && s.best_time > 0) {
    const BigInt n(s.best_time);
    extra.push_back(n);
    double best = -1.0;
    json where;
    for (std::size_t i = 0; i < t.ys.size(); ++i) {
      const auto row = tapia_obstruction_row(t.op, t.ys[i], n);
      for (std::size_t j = 0; j < row.size(); ++j)
        if (std::abs(row[j].rhs) > best) {
          best = std::abs(row[j].rhs);
          where = {{"vector", i}, {"k", int(j) + t.op.d + 1}, {"lhs", cplx_json(row[j].lhs)}, {"rhs", cplx_json(row[j].rhs)}};
        }
    }
    const double bound = s.best_error / std::sqrt(double(t.op.K));
    where["magnitude"] = best;
    c.add("obstruction-bound", pass_fail(best >= bound * (1.0 - 1e-12)), std::to_string(h), bound,
          {{"time", n.str()}, {"bound", bound}, {"obstruction", where}});
  } else {
    c.add("obstruction-bound", kFail, std::to_string(h), 0.0, {{"reason", "a common return exists below the horizon"}});
  }
  add_obstruction_identity(c, t, extra);
  add_single_returns(c, t, "single-returns-co-occur");
}

// ---------------------------------------------------------------------------
// qrnh-rigid-eta-infinite

inline CoeffVec qrnh_random(const QRNH& op, Rng& rng, int support) {
  CoeffVec x = CoeffVec::zeros(-op.D, std::size_t(op.D + op.K));
  for (int j = 1; j <= support; ++j) x.set(-j, rng.cnormal());
  for (int k = 0; k < op.K; ++k) x.set(k, rng.cnormal());
  return normalized(x);
}

inline void qrnh_rigid_eta_infinite(ScenarioContext& c) {
  const auto& p = c.params;
  const int D = int(p.i("D")), Kk = int(p.i("K"));
  const QRNH op = make_qrnh(D, Kk, std::uint64_t(p.i("omega_seed")));
  const OperatorSpec spec = op;
  const int level = int(p.i("level"));
  if (level > D || 2 * level - 2 > Kk - 1)
    throw ConfigError("scenario qrnh-rigid-eta-infinite: level needs level <= D and 2 level - 2 < K");

  // Rigidity along m_{k_l}, k_l = 2l - 3: slot k_l + 1 carries e_{-l}.
  std::vector<BigInt> times;
  std::vector<int> ks;
  for (int l = 2; l <= level; ++l) {
    ks.push_back(2 * l - 3);
    times.push_back(op.m.at(2 * l - 3));
  }
  const double rtol = p.r("rigidity_tol");
  double worst = 0.0, tail = 0.0;
  json finals = json::array();
  json traj0;
  const int samples = int(p.i("samples"));
  for (int s = 0; s < samples; ++s) {
    const CoeffVec x = qrnh_random(op, c.rng, int(p.i("support")));
    const auto tr = trajectory_of(spec, x, times);
    worst = std::max(worst, tr.back().error);
    tail = std::max(tail, max_tail(tr));
    finals.push_back(tr.back().error);
    if (s == 0) traj0 = trajectory_json(tr);
  }
  c.add("rigidity", pass_fail(worst < rtol), "structured", rtol,
        {{"k_sequence", ks}, {"final_errors", finals}, {"max_final_error", worst}, {"tail_bound", tail}, {"trajectory", traj0}});

  // Eta witnesses: for each tuple, slots whose omega is orthogonal to the tuple and shares one direction u.
  const int depth = int(p.i("witness_depth")), skip = int(p.i("witness_skip"));
  const auto sched = ToleranceSchedule::harmonic(depth, p.r("witness_eps") * depth);
  auto spanning_tail = standard_basis(spec);
  json per = json::array();
  bool all_ok = true;
  for (int tix = 0; tix < int(p.i("tuples")); ++tix) {
    std::vector<CoeffVec> xs;
    for (int i = 0; i < int(p.i("tuple_size")); ++i) xs.push_back(qrnh_random(op, c.rng, int(p.i("tuple_support"))));
    std::vector<std::vector<cplx>> pxs;
    for (const auto& x : xs) pxs.push_back(detail::block(x, -D, D));
    std::vector<std::vector<int>> groups;  // slots sharing a direction, in slot order
    for (int sl = 1; sl < Kk; ++sl) {
      double worst_inner = 0.0;
      for (const auto& px : pxs) worst_inner = std::max(worst_inner, std::abs(detail::inner(op.omegas[std::size_t(sl)], px)));
      if (worst_inner > 1e-12) continue;
      bool placed = false;
      for (auto& g : groups)
        if (op.omegas[std::size_t(g[0])] == op.omegas[std::size_t(sl)]) {
          g.push_back(sl);
          placed = true;
          break;
        }
      if (!placed) groups.push_back({sl});
    }
    const std::vector<int>* best = nullptr;
    for (const auto& g : groups)
      if (!best || g.size() > best->size()) best = &g;
    if (!best || int(best->size()) < skip + depth) {
      all_ok = false;
      per.push_back({{"tuple", tix}, {"reason", "no orthogonal direction revisited often enough"}});
      continue;
    }
    std::vector<int> slots(best->begin() + skip, best->begin() + skip + depth);
    std::vector<BigInt> t;
    for (int sl : slots) t.push_back(op.m.at(sl - 1));
    const ReturnSequence omega(t, Provenance::structured_mk);
    const Direction& u = op.omegas[std::size_t(slots[0])];
    CoeffVec w = CoeffVec::zeros(-D, std::size_t(D + Kk));
    for (int j = 0; j < D; ++j) w.set(-D + j, u[std::size_t(j)]);
    bool tuple_pass = true;
    for (const auto& x : xs) tuple_pass = tuple_pass && in_L_omega(spec, x, omega, sched).verdict == Verdict::pass;
    std::vector<CoeffVec> spanning{w};
    spanning.insert(spanning.end(), spanning_tail.begin(), spanning_tail.end());
    const auto hr = hyper_recurrence_probe(spec, xs[0], spanning, sched, BigInt(p.i("witness_horizon")), 1, c.opt(), {omega});
    const bool ok = tuple_pass && hr.verdict == Verdict::witness_against && hr.data.value("witness_index", -1) == 0 &&
                    hr.times && *hr.times == omega;
    all_ok = all_ok && ok;
    std::vector<int> ks_used;
    for (int sl : slots) ks_used.push_back(sl - 1);
    per.push_back({{"tuple", tix}, {"k_sequence", ks_used}, {"tuple_returns", tuple_pass},
                   {"witness_direction", join(u, ";", [](cplx z) { return complex_str(z); })},
                   {"hyper_recurrence", recurrence_json(hr)}});
  }
  c.add("eta-witness", pass_fail(all_ok), "structured", sched.final_eps(), {{"tuples", per}});

  // Limit formula on fully supported vectors.
  const double ltol = p.r("limit_tol");
  double gap = 0.0;
  json rows = json::array();
  for (int s = 0; s < samples; ++s) {
    const auto lf = qrnh_limit_formula(op, qrnh_random(op, c.rng, D), level);
    gap = std::max(gap, lf.gap());
    rows.push_back({{"error_norm", lf.error_norm}, {"predicted", lf.predicted}, {"tail", lf.tail}});
  }
  c.add("limit-formula", pass_fail(gap < ltol), "structured", ltol, {{"level", level}, {"max_gap", gap}, {"rows", rows}});
}

// ---------------------------------------------------------------------------
// hr-sta-d2

inline void hr_sta_d2(ScenarioContext& c) {
  const auto& p = c.params;
  const int d = 2, Kk = int(p.i("K"));
  const AugeTapia op = make_auge_tapia(d, Kk, MSchedule::parse(p.s("schedule")), std::uint64_t(p.i("g_seed")));
  const OperatorSpec spec = op;
  const auto b = std::size_t(p.i("direction"));
  if (b >= op.g.directions.size()) throw ConfigError("scenario hr-sta-d2: direction beyond the g-enumeration");
  const Direction& dir = op.g.directions[b];
  const int nd = int(p.i("noise_depth")), depth = int(p.i("depth"));
  const ReturnSequence omega = tapia_visit_times(op, b, d + nd, std::size_t(depth));
  const double eps = p.r("eps");
  const auto sched = ToleranceSchedule::harmonic(depth, eps * depth);
  const std::size_t n = std::size_t(d + Kk);

  CoeffVec q = CoeffVec::zeros(1, n);
  const Direction v = orthogonal_direction(dir);
  q.set(1, v[0]);
  q.set(2, v[1]);
  for (int k = d + 1; k <= std::min(d + nd, d + Kk); ++k) q.set(k, p.r("noise") * c.rng.cnormal());
  CoeffVec comp = CoeffVec::zeros(1, n);
  const double dn = std::sqrt(std::norm(dir[0]) + std::norm(dir[1]));
  comp.set(1, std::conj(dir[0]) / dn);
  comp.set(2, std::conj(dir[1]) / dn);

  const auto rq = in_L_omega(spec, q, omega, sched);
  c.add("member-returns", check_verdict(rq.verdict), "structured", eps, {{"probes", {{"q", recurrence_json(rq)}}}});

  std::vector<CoeffVec> passing{q};
  json failing = json::array();
  for (int k = d + 1; k <= d + Kk; ++k) {
    const CoeffVec e = CoeffVec::unit(k, 1, n);
    if (in_L_omega(spec, e, omega, sched).verdict == Verdict::pass) passing.push_back(e);
    else failing.push_back(k);
  }
  c.add("perturbed-coordinates-return", pass_fail(failing.empty()), "structured", eps,
        {{"checked", Kk}, {"failing_indices", failing}});

  const auto rc = in_L_omega(spec, comp, omega, sched);
  c.add("complement-fails", pass_fail(rc.verdict == Verdict::fail), "structured", eps,
        {{"probes", {{"complement", recurrence_json(rc)}}}});

  const int rank_in = numerical_rank(passing, 1, n);
  std::vector<CoeffVec> all = passing;
  all.push_back(comp);
  const int rank_all = numerical_rank(all, 1, n);
  const int codim = int(n) - rank_in;
  c.add("codimension-one", pass_fail(codim == 1 && rank_all == int(n)), "structured", 1e-9,
        {{"window", n}, {"rank_returning", rank_in}, {"rank_with_complement", rank_all}, {"codimension", codim}});

  const auto st = stationarity_probe(spec, omega, {q, comp, CoeffVec::unit(d + 1, 1, n), CoeffVec::unit(d + Kk, 1, n)},
                                     sched, c.seed);
  c.add("stationarity", check_verdict(st.verdict), "structured", eps, {{"probes", {{"stationarity", recurrence_json(st)}}}});
}

// ---------------------------------------------------------------------------
// multiplication-lp

struct AtomModel {
  std::vector<double> weights;
  std::vector<PhaseAngle> phases;
  std::vector<double> moduli;
};

// Rational denominators <= 12 with lcm <= 990, at most one irrational phase, moduli away from 1.
inline AtomModel random_atom_model(Rng& rng, int max_atoms) {
  for (;;) {
    AtomModel m;
    const int n = 1 + int(rng.below(std::uint64_t(max_atoms)));
    bool irrational = false;
    std::int64_t L = 1;
    for (int j = 0; j < n; ++j) {
      m.weights.push_back(rng.uniform(0.2, 1.0));
      const double u = rng.uniform();
      const std::int64_t q = 1 + std::int64_t(rng.below(12));
      const PhaseAngle rational = PhaseAngle::exact(std::int64_t(rng.below(std::uint64_t(q))), q);
      if (u < 0.45 || (u < 0.6 && irrational)) {
        m.phases.push_back(rational);
        m.moduli.push_back(1.0);
        L = std::lcm(L, static_cast<std::int64_t>(rational.den()));
      } else if (u < 0.6) {
        irrational = true;
        m.phases.push_back(PhaseAngle::approx(rng.uniform()));
        m.moduli.push_back(1.0);
      } else {
        m.phases.push_back(rational);
        m.moduli.push_back(rng.uniform() < 0.5 ? rng.uniform(0.3, 0.7) : rng.uniform(1.4, 3.0));
      }
    }
    if (L <= 990) return m;
  }
}

// (sum_j w_j |phi_j^n - 1|^p)^{1/p} for x = 1.
inline double atom_error(const AtomModel& m, double p, std::uint64_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < m.phases.size(); ++j) {
    const double rn = m.moduli[j] == 1.0 ? 1.0 : std::pow(m.moduli[j], double(n));
    if (!(rn < 1e100)) return HUGE_VAL;
    s += m.weights[j] * std::pow(std::abs(rn * cis_turns(m.phases[j].power_turns_u64(n)) - 1.0), p);
  }
  return std::pow(s, 1.0 / p);
}

inline json atom_json(const AtomModel& m) {
  return {{"weights", m.weights},
          {"phases", join(m.phases, ",", [](const PhaseAngle& a) { return a.to_string(); })},
          {"moduli", m.moduli}};
}

inline void multiplication_lp(ScenarioContext& c) {
  const auto& p = c.params;
  const double eps = p.r("eps"), pp = p.r("p");
  const auto h = scan_horizon(p, "horizon");
  const int hr_depth = int(p.i("hr_depth"));
  const auto sched = ToleranceSchedule::harmonic(hr_depth, eps * hr_depth);
  json rows = json::array(), hr_rows = json::object();
  bool agree = true, hr_ok = true;
  int recurrent = 0;
  for (int i = 0; i < int(p.i("models")); ++i) {
    const AtomModel m = random_atom_model(c.rng, int(p.i("max_atoms")));
    const bool predicted = std::all_of(m.moduli.begin(), m.moduli.end(), [](double r) { return r == 1.0; });
    const auto s = scan_range(1, h, eps, 1, c.workers, [&](std::uint64_t n) { return atom_error(m, pp, n); });
    const bool observed = !s.times.empty();
    agree = agree && predicted == observed;
    json row = {{"model", atom_json(m)}, {"predicted_recurrent", predicted}, {"observed_return", observed}};
    if (observed) row["first_return"] = near_miss_json(s.times[0], s.errors[0]);
    else row["near_miss"] = near_miss_json(s.best_time, s.best_error);
    rows.push_back(row);
    if (predicted) {
      ++recurrent;
      const OperatorSpec op = make_multiplication(m.weights, m.phases, m.moduli, pp);
      const CoeffVec ones(0, std::vector<cplx>(m.phases.size(), cplx{1.0, 0.0}));
      const auto hr = hyper_recurrence_probe(op, ones, standard_basis(op), sched, BigInt(h), 2, c.opt());
      hr_ok = hr_ok && hr.verdict == Verdict::consistent;
      hr_rows["model" + std::to_string(i)] = recurrence_json(hr);
    }
  }
  c.add("classification", pass_fail(agree), std::to_string(h), eps, {{"models", rows}});
  c.add("bounded-below-hyper-recurrent", pass_fail(hr_ok && recurrent > 0), std::to_string(h), sched.final_eps(),
        {{"recurrent_models", recurrent}, {"probes", hr_rows}});

  // phi = 1: every n returns exactly.
  const std::vector<PhaseAngle> id(3, PhaseAngle::exact(0, 1));
  const auto rt = find_return_times(id, eps, BigInt(h), 5, c.workers);
  bool id_ok = rt.times.size() == 5;
  for (std::size_t i = 0; i < rt.times.size(); ++i) id_ok = id_ok && rt.times[i] == BigInt(i + 1) && rt.errors[i] == 0.0;
  c.add("identity-model", pass_fail(id_ok), std::to_string(h), eps, {{"times", times_json(rt.times)}, {"errors", rt.errors}});
}

// ---------------------------------------------------------------------------
// banach-holo-components

// phi on one component: a constant c = modulus e^{2 pi i phase}, or c (1 + a z) on the unit disc.
struct HoloPiece {
  std::string kind;  // rational | irrational | non-unimodular | non-constant
  PhaseAngle phase;
  double modulus = 1.0;
  cplx slope{};
  std::vector<std::pair<double, double>> samples;  // (log|phi(z)|, arg phi(z) in turns) on the boundary
};

inline HoloPiece holo_piece(const std::string& kind, Rng& rng, int boundary) {
  HoloPiece h;
  h.kind = kind;
  if (kind == "rational") {
    const std::int64_t q = 1 + std::int64_t(rng.below(6));
    h.phase = PhaseAngle::exact(std::int64_t(rng.below(std::uint64_t(q))), q);
  } else {
    h.phase = PhaseAngle::approx(rng.uniform());
  }
  if (kind == "non-unimodular") h.modulus = rng.uniform() < 0.5 ? rng.uniform(0.5, 0.8) : rng.uniform(1.25, 2.0);
  if (kind == "non-constant") {
    h.slope = rng.uniform(0.2, 0.5) * cis_turns(rng.uniform(-0.5, 0.5));
    const cplx c0 = h.phase.value();
    for (int s = 0; s < boundary; ++s) {
      const cplx v = c0 * (1.0 + h.slope * cis_turns(double(s) / boundary - (2 * s >= boundary ? 1.0 : 0.0)));
      h.samples.emplace_back(std::log(std::abs(v)), std::arg(v) / (2.0 * kPi));
    }
  }
  return h;
}

// sup over the boundary of |phi^n - 1|.
inline double holo_sup(const HoloPiece& h, std::uint64_t n) {
  if (h.kind != "non-constant") {
    const double rn = h.modulus == 1.0 ? 1.0 : std::pow(h.modulus, double(n));
    if (!(rn < 1e100)) return HUGE_VAL;
    return std::abs(rn * cis_turns(h.phase.power_turns_u64(n)) - 1.0);
  }
  double best = 0.0;
  for (const auto& [lg, turns] : h.samples) {
    const double lr = double(n) * lg;
    if (lr > 230.0) return HUGE_VAL;
    long double t = static_cast<long double>(n) * turns;
    t -= std::floor(t);
    if (t > 0.5L) t -= 1.0L;
    best = std::max(best, std::abs(std::exp(lr) * cis_turns(double(t)) - 1.0));
  }
  return best;
}

inline double holo_error(const std::vector<HoloPiece>& ph, const std::vector<double>& f, std::uint64_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < ph.size(); ++i) s += f[i] * holo_sup(ph[i], n);
  return s;
}

inline void banach_holo_components(ScenarioContext& c) {
  const auto& p = c.params;
  const int comps = int(p.i("components")), boundary = int(p.i("boundary_points"));
  const double eps = p.r("eps");
  const auto h = scan_horizon(p, "horizon");
  static const char* kinds[] = {"rational", "irrational", "non-unimodular", "non-constant"};
  json rows = json::array();
  bool agree = true;
  for (int cs = 0; cs < int(p.i("cases")); ++cs) {
    std::vector<HoloPiece> ph;
    bool irrational = false;
    for (int i = 0; i < comps; ++i) {
      std::string k = cs == 0 ? "rational" : cs == 1 && i == 0 ? "irrational" : cs == 1 ? "rational" : kinds[c.rng.below(4)];
      if (k == "irrational" && irrational) k = "rational";
      irrational = irrational || k == "irrational";
      ph.push_back(holo_piece(k, c.rng, boundary));
    }
    const std::vector<double> f(std::size_t(comps), 1.0);
    const bool predicted = std::all_of(ph.begin(), ph.end(), [](const HoloPiece& x) {
      return x.kind == "rational" || x.kind == "irrational";
    });
    const auto s = scan_range(1, h, eps, 1, c.workers, [&](std::uint64_t n) { return holo_error(ph, f, n); });
    const bool observed = !s.times.empty();
    agree = agree && predicted == observed;
    json kinds_json = json::array();
    for (const auto& x : ph) kinds_json.push_back(x.kind);
    json row = {{"components", kinds_json}, {"predicted_recurrent", predicted}, {"observed_return", observed}};
    if (observed) row["first_return"] = near_miss_json(s.times[0], s.errors[0]);
    else row["near_miss"] = near_miss_json(s.best_time, s.best_error);
    rows.push_back(row);
  }
  c.add("constants-only-recurrent", pass_fail(agree), std::to_string(h), eps, {{"cases", rows}});

  // Cutoff rigidity: irrational constants, ||f_i|| = 4^-i, n_k returning components i <= k within 2^-k.
  std::vector<HoloPiece> ph;
  std::vector<double> f;
  for (int i = 1; i <= comps; ++i) {
    ph.push_back(holo_piece("irrational", c.rng, boundary));
    f.push_back(std::ldexp(1.0, -2 * i));
  }
  const auto ch = scan_horizon(p, "cutoff_horizon");
  const int depth = std::min(int(p.i("cutoff_depth")), comps);
  json traj = json::array();
  std::uint64_t prev = 0;
  bool ok = true, found = true;
  double last_bound = HUGE_VAL;
  for (int k = 1; k <= depth && found; ++k) {
    const double delta = std::ldexp(1.0, -k);
    const auto s = scan_range(prev + 1, ch, delta, 1, c.workers, [&](std::uint64_t n) {
      double e = 0.0;
      for (int i = 0; i < k; ++i) e = std::max(e, holo_sup(ph[std::size_t(i)], n));
      return e;
    });
    if (s.times.empty()) {
      found = false;
      traj.push_back({{"k", k}, {"near_miss", near_miss_json(s.best_time, s.best_error)}});
      break;
    }
    prev = s.times[0];
    double bound = 0.0;
    for (int i = 0; i < comps; ++i) bound += (i < k ? delta : 2.0) * f[std::size_t(i)];
    const double e = holo_error(ph, f, prev);
    ok = ok && e <= bound && bound < last_bound;
    last_bound = bound;
    traj.push_back({{"k", k}, {"time", std::to_string(prev)}, {"error", e}, {"bound", bound}});
  }
  c.add("cutoff-rigidity", found ? pass_fail(ok) : kInconclusive, std::to_string(ch), last_bound,
        {{"steps", traj}, {"depth", depth}});
}

// ---------------------------------------------------------------------------
// composition-entire

inline CoeffVec random_poly(Rng& rng, int degree) {
  std::vector<cplx> c(std::size_t(degree + 1));
  for (auto& z : c) z = rng.cnormal();
  return {0, std::move(c)};
}

inline cplx horner(const CoeffVec& f, cplx z) {
  cplx acc{};
  for (std::int64_t j = f.last(); j >= f.offset(); --j) acc = acc * z + f.at(j);
  return acc;
}

struct MicyDraw {
  CoeffVec coeffs;
  std::size_t roots_tested = 0;
  int rejected = 0;
  double min_abs = HUGE_VAL;
};

// Coefficients with sum_j c_j b^j ((theta - 1)/(a - 1))^j away from 0 for every root of unity of order <= Q.
inline MicyDraw micy_draw(Rng& rng, int degree, cplx a, cplx b, int Q, double tol) {
  MicyDraw out;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    CoeffVec f = random_poly(rng, degree);
    const double fn = l2_of(f);
    double mn = HUGE_VAL;
    std::size_t tested = 0;
    for (int q = 1; q <= Q; ++q)
      for (int r = 0; r < q; ++r) {
        if (std::gcd(r, q) != 1) continue;
        const cplx theta = PhaseAngle::exact(r, q).value();
        mn = std::min(mn, std::abs(horner(f, b * (theta - 1.0) / (a - 1.0))));
        ++tested;
      }
    if (mn >= tol * fn) {
      out.coeffs = f;
      out.roots_tested = tested;
      out.min_abs = mn;
      return out;
    }
    ++out.rejected;
  }
  throw ConfigError("micy_draw: no admissible coefficients after 1000 draws");
}

// Hyper-recurrence test along a sequence returning x with margin, so that bounded error ratios pass.
inline RecurrenceReport margin_hyper_probe(const OperatorSpec& op, const CoeffVec& x, const ToleranceSchedule& sched,
                                           double margin, std::uint64_t h, const ProbeOptions& opt) {
  const CoeffVec xx = fit_window(op, x);
  const auto g = greedy_returns(op, [&](int) { return std::vector<CoeffVec>{xx}; }, sched.degraded(margin), BigInt(h), opt);
  if (g.failed_k != 0) {
    RecurrenceReport r;
    r.probe = "hyper_recurrence";
    r.horizon = h;
    r.tolerance = sched.final_eps();
    r.near_miss = g.near_miss;
    r.data["failed_k"] = g.failed_k;
    return r;
  }
  const ReturnSequence omega(g.times, Provenance::brute_force);
  return hyper_recurrence_probe(op, x, standard_basis(op), sched, BigInt(h), 1, opt, {omega});
}

inline void composition_entire(ScenarioContext& c) {
  const auto& p = c.params;
  const int deg = int(p.i("degree"));
  const PhaseAngle a_ph = parse_phase(p.s("a_phase"));
  const cplx b = parse_complex(p.s("b"), "b");
  const FunctionModel model = parse_model(p.s("model"));
  constexpr double tol = 1e-10;

  // C_phi^n = C_{phi^n}
  std::vector<OperatorSpec> ops{make_affine({}, b, model, std::size_t(deg + 1), a_ph),
                                make_affine(0.8 * cis_turns(0.1), b, model, std::size_t(deg + 1)),
                                make_affine({}, b, model, std::size_t(deg + 1), PhaseAngle::exact(1, 5))};
  double worst = 0.0;
  const int iters = int(p.i("iterations"));
  for (const auto& op : ops) {
    const CoeffVec f = random_poly(c.rng, deg);
    CoeffVec y = f;
    for (int n = 1; n <= iters; ++n) {
      y = reclab::apply(op, y);
      worst = std::max(worst, l2_of(y - power(op, std::uint64_t(n), f)) / l2_of(f));
    }
  }
  c.add("iterate-identity", pass_fail(worst < tol), std::to_string(iters), tol,
        {{"max_relative_difference", worst}, {"operators", ops.size()}});

  const int hd = int(p.i("hr_degree"));
  const int Q = int(p.i("Q"));
  const cplx a = a_ph.value();
  const auto md = micy_draw(c.rng, hd, a, b, Q, p.r("micy_tol"));
  c.add("micy-coefficients", kPass, "structured", p.r("micy_tol"),
        {{"coefficients", join(md.coeffs.coeffs(), ";", [](cplx z) { return complex_str(z); })},
         {"roots_tested", md.roots_tested}, {"rejected", md.rejected}, {"min_abs", md.min_abs}});

  const int depth = int(p.i("hr_depth"));
  const auto sched = ToleranceSchedule::harmonic(depth, p.r("hr_eps") * depth);
  const auto h = scan_horizon(p, "horizon");
  const double margin = p.r("hr_margin");
  const OperatorSpec op_h = make_affine({}, b, model, std::size_t(hd + 1), a_ph);
  const auto hr = margin_hyper_probe(op_h, md.coeffs, sched, margin, h, c.opt());
  c.add("hyper-recurrence", check_verdict(hr.verdict), std::to_string(h), sched.final_eps(),
        {{"probes", {{"hyper_recurrence", recurrence_json(hr)}}}, {"margin", margin}});

  // b = 0: x with c_1 != 0 drives every monomial back.
  const OperatorSpec op_g = make_affine({}, {}, model, std::size_t(hd + 1), a_ph);
  CoeffVec xg = random_poly(c.rng, hd);
  xg.set(1, 1.0);
  const auto hg = margin_hyper_probe(op_g, xg, sched, margin, h, c.opt());
  c.add("g-set-hyper-recurrence", check_verdict(hg.verdict), std::to_string(h), sched.final_eps(),
        {{"probes", {{"hyper_recurrence", recurrence_json(hg)}}}, {"margin", margin}});

  // a a primitive q-th root of unity: the smallest return divides q.
  json rows = json::array();
  bool ok = true;
  for (const auto& s : split(p.s("root_orders"), ',')) {
    if (s.empty()) continue;
    const auto q = to_int(s, "root_orders");
    if (q < 1 || q > 10000) throw ConfigError("root_orders: orders must lie in [1, 10000]");
    std::int64_t r = 1 + std::int64_t(c.rng.below(std::uint64_t(q)));
    while (std::gcd(r, q) != 1) r = r % q + 1;
    const OperatorSpec op = make_affine({}, b, model, std::size_t(deg + 1), PhaseAngle::exact(r % q, q));
    const CoeffVec f = random_poly(c.rng, deg);
    std::int64_t first = 0;
    for (std::int64_t n = 1; n <= q && !first; ++n)
      if (return_error(op, BigInt(n), f) <= 1e-9 * l2_of(f)) first = n;
    const bool good = first > 0 && q % first == 0;
    ok = ok && good;
    rows.push_back({{"order", q}, {"phase", std::to_string(r % q) + "/" + std::to_string(q)}, {"first_return", first}});
  }
  c.add("root-of-unity-period", pass_fail(ok), "structured", 1e-9, {{"rows", rows}});
}

}  // namespace scn

// ---------------------------------------------------------------------------
// Dirichlet non-recurrence bound

struct ZetaBracket {
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t terms = 0;
  double value() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
};

// zeta(s), s > 1: partial sum to M, remainder between int_{M+1} + f(M+1)/2 and int_{M+1/2}.
inline ZetaBracket zeta_bracket(double s, double width = 1e-11) {
  if (!(s > 1.0)) throw ConfigError("zeta_bracket: s must be > 1");
  long double sum = 0.0L;
  std::uint64_t M = 0;
  auto tail = [&](long double from) { return std::pow(from, 1.0L - s) / (s - 1.0L); };
  for (std::uint64_t target = 64;; target *= 2) {
    if (target > (std::uint64_t(1) << 31)) throw ConfigError("zeta_bracket: s too close to 1 for direct summation");
    for (std::uint64_t n = target; n > M; --n) sum += std::pow(static_cast<long double>(n), -static_cast<long double>(s));
    M = target;
    const long double m1 = static_cast<long double>(M) + 1.0L;
    const long double lo = sum + tail(m1) + 0.5L * std::pow(m1, -static_cast<long double>(s));
    const long double hi = sum + tail(static_cast<long double>(M) + 0.5L);
    if (double(hi - lo) < width) return {double(lo), double(hi), M};
  }
}

// r = 2 + 2^{1/2+eta}(1 + 2 zeta(1+eta)^{1/2})/(2^{eta/2} - 1).
inline double compute_dirichlet_r(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("compute_dirichlet_r: eta must be > 0");
  const double z = zeta_bracket(1.0 + eta).value();
  return 2.0 + std::pow(2.0, 0.5 + eta) * (1.0 + 2.0 * std::sqrt(z)) / (std::pow(2.0, eta / 2) - 1.0);
}

inline cplx dirichlet_eval(const CoeffVec& g, cplx s) {
  cplx acc{};
  for (std::int64_t n = std::max<std::int64_t>(1, g.offset()); n <= g.last(); ++n)
    acc += g.at(n) * std::exp(-s * std::log(double(n)));
  return acc;
}

struct NonrecurrenceRow {
  int ell = 0;
  cplx sigma;
  double lhs = 0.0;     // |g(s0) - g(sigma)|
  double direct = 0.0;  // |f(s0) - f(sigma)| - |h(s0)| - |h(sigma)|, h = g - f
};

struct NonrecurrenceCheck {
  double eta = 0.0;
  double r = 0.0;
  double zeta = 0.0;
  double distance = 0.0;  // ||g - f||
  double display = 0.0;   // (r-1)(2^{-(1+eta)/2} - 2^{-(1/2+eta)}) - 2 zeta(1+eta)^{1/2}
  std::vector<NonrecurrenceRow> rows;
  bool holds = false;     // display > 1 and lhs >= direct >= display on every row

  json to_json() const {
    json rs = json::array();
    for (const auto& w : rows)
      rs.push_back({{"ell", w.ell}, {"sigma", cplx_json(w.sigma)}, {"lhs", w.lhs}, {"direct_bound", w.direct}});
    return {{"eta", eta}, {"r", r}, {"zeta", zeta}, {"distance", distance}, {"display_bound", display},
            {"rows", rs}, {"holds", holds}};
  }
};

// Shift model: phi^l(s0) = s0 + l (eta + i shift_t), s0 = (1+eta)/2, so Re >= 1/2 + eta for l >= 1.
inline NonrecurrenceCheck dirichlet_nonrecurrence_check(double eta, const CoeffVec& g, const std::vector<int>& ells,
                                                        double shift_t = 0.0) {
  if (!(eta > 0.0)) throw ConfigError("dirichlet_nonrecurrence_check: eta must be > 0");
  if (g.offset() < 1) throw ConfigError("dirichlet_nonrecurrence_check: coefficients start at index 1");
  NonrecurrenceCheck out;
  out.eta = eta;
  out.r = compute_dirichlet_r(eta);
  out.zeta = zeta_bracket(1.0 + eta).value();
  const std::int64_t hi = std::max<std::int64_t>(2, g.last());
  CoeffVec f = CoeffVec::zeros(1, std::size_t(hi));
  f.set(2, out.r);
  const CoeffVec h = g - f;
  out.distance = l2_of(h);
  if (!(out.distance < 1.0))
    throw ConfigError("dirichlet_nonrecurrence_check: precondition ||g - f|| < 1 violated (" + real_str(out.distance) + ")");
  out.display = (out.r - 1.0) * (std::pow(2.0, -(1.0 + eta) / 2) - std::pow(2.0, -(0.5 + eta))) - 2.0 * std::sqrt(out.zeta);
  const cplx s0 = (1.0 + eta) / 2;
  out.holds = out.display > 1.0;
  for (int l : ells) {
    if (l < 1) throw ConfigError("dirichlet_nonrecurrence_check: ell must be >= 1");
    NonrecurrenceRow w;
    w.ell = l;
    w.sigma = s0 + double(l) * cplx{eta, shift_t};
    w.lhs = std::abs(dirichlet_eval(g, s0) - dirichlet_eval(g, w.sigma));
    w.direct = std::abs(dirichlet_eval(f, s0) - dirichlet_eval(f, w.sigma)) - std::abs(dirichlet_eval(h, s0)) -
               std::abs(dirichlet_eval(h, w.sigma));
    const double slack = 1e-12 * std::max(1.0, out.r);
    out.holds = out.holds && w.lhs >= w.direct - slack && w.direct >= out.display - slack;
    out.rows.push_back(w);
  }
  return out;
}

namespace scn {

inline void dirichlet_recurrence(ScenarioContext& c) {
  const auto& p = c.params;
  const int N = int(p.i("N"));
  const OperatorSpec op = make_dirichlet(p.r("t"), N);
  const int depth = int(p.i("depth"));
  const auto sched = ToleranceSchedule::harmonic(depth, p.r("scale"));
  const auto h = scan_horizon(p, "horizon");
  const auto basis = standard_basis(op);
  const auto pr = product_recurrence_test(op, N, {basis}, sched, BigInt(h), c.opt());
  c.add("rigidity", check_verdict(pr.per_tuple.at(0).verdict), std::to_string(h), sched.final_eps(),
        {{"probes", {{"product", recurrence_json(pr.per_tuple.at(0))}}}});

  double worst = 0.0;
  for (int s = 0; s < int(p.i("isometry_samples")); ++s) {
    std::vector<cplx> co(static_cast<std::size_t>(N));
    for (auto& z : co) z = c.rng.cnormal();
    const CoeffVec f(1, co);
    for (std::uint64_t n : {1ull, 2ull, 10ull, 12345ull, 1000000007ull})
      worst = std::max(worst, std::abs(l2_of(power(op, n, f)) - l2_of(f)) / l2_of(f));
  }
  c.add("isometry", pass_fail(worst <= 1e-12), "structured", 1e-12, {{"max_relative_defect", worst}});

  json rs = json::array();
  bool r_ok = true;
  std::vector<double> etas;
  for (const auto& s : split(p.s("etas"), ',')) {
    if (s.empty()) continue;
    const double eta = to_real(s, "etas");
    if (!(eta > 0.0)) throw ConfigError("etas: every eta must be > 0");
    etas.push_back(eta);
    const auto zb = zeta_bracket(1.0 + eta);
    const double r = compute_dirichlet_r(eta);
    r_ok = r_ok && std::isfinite(r) && zb.width() < 1e-11;
    rs.push_back({{"eta", eta}, {"r", r}, {"zeta_lo", zb.lo}, {"zeta_hi", zb.hi}, {"terms", zb.terms}});
  }
  c.add("r-of-eta", pass_fail(r_ok), "structured", 1e-11, {{"rows", rs}});

  // Admissible g: f = r e_2 plus h with ||h|| < 1, including h = 0 and a_2 moved by 0.5.
  std::vector<int> ells;
  for (int l = 1; l <= int(p.i("ell_max")); ++l) ells.push_back(l);
  const int len = int(p.i("g_length"));
  json summary = json::array();
  bool all = true;
  for (double eta : etas) {
    const double r = compute_dirichlet_r(eta);
    double min_lhs = HUGE_VAL, display = 0.0;
    int tried = 0;
    for (int k = 0; k < int(p.i("g_count")); ++k) {
      CoeffVec g = CoeffVec::zeros(1, std::size_t(len));
      g.set(2, r);
      if (k == 1) g.set(2, r + 0.5);
      if (k >= 2) {
        CoeffVec hv = CoeffVec::zeros(1, std::size_t(len));
        for (int n = 1; n <= len; ++n) hv.set(n, c.rng.cnormal());
        g = g + cplx(0.999 * c.rng.uniform() / l2_of(hv), 0.0) * hv;
      }
      const auto chk = dirichlet_nonrecurrence_check(eta, g, ells, p.r("shift_t"));
      all = all && chk.holds;
      display = chk.display;
      for (const auto& w : chk.rows) min_lhs = std::min(min_lhs, w.lhs);
      ++tried;
    }
    summary.push_back({{"eta", eta}, {"r", r}, {"display_bound", display}, {"min_lhs", min_lhs}, {"g_tested", tried}});
  }
  c.add("non-recurrence-bound", pass_fail(all), "structured", 1.0, {{"rows", summary}, {"ells", ells}});
}

// ---------------------------------------------------------------------------
// periodic-cascade

inline void periodic_cascade(ScenarioContext& c) {
  const auto& p = c.params;
  std::vector<std::int64_t> periods;
  for (const auto& s : split(p.s("periods"), ','))
    if (!s.empty()) periods.push_back(to_int(s, "periods"));
  const PeriodicCascade pc = make_cascade(periods, p.r("first_scale"));
  const OperatorSpec op = pc;
  const std::size_t L = periods.size();
  std::vector<double> a(L), bmax(L);
  for (std::size_t l = 0; l < L; ++l) std::tie(a[l], bmax[l]) = cascade_ab(periods[l], pc.scales[l]);

  bool sep = true;
  json seps = json::array();
  for (std::size_t l = 0; l + 1 < L; ++l) {
    sep = sep && 4.0 * bmax[l + 1] < a[l];
    seps.push_back({{"l", l + 1}, {"a", a[l]}, {"four_b_next", 4.0 * bmax[l + 1]}});
  }
  c.add("separation", pass_fail(sep), "structured", 0.0, {{"rows", seps}});

  CoeffVec q = CoeffVec::zeros(1, L);
  for (std::size_t l = 0; l < L; ++l) q.set(std::int64_t(l + 1), pc.scales[l]);

  // (n!) times: coordinates whose period divides n! return exactly; the rest cost at most b_l.
  std::vector<TrajPoint> traj;
  bool fact_ok = true;
  json bounds = json::array();
  BigInt fact = 1;
  for (int n = 1; n <= int(p.i("factorial_depth")); ++n) {
    fact *= n;
    double bound = 0.0;
    for (std::size_t l = 0; l < L; ++l)
      if (fact % periods[l] != 0) bound += bmax[l];
    const double e = return_error(op, fact, q);
    fact_ok = fact_ok && e <= bound * (1.0 + 1e-12);
    traj.push_back({fact, e, 0.0});
    bounds.push_back(bound);
  }
  fact_ok = fact_ok && traj.back().error == 0.0;
  c.add("factorial-times", pass_fail(fact_ok), "structured", 0.0, {{"trajectory", trajectory_json(traj)}, {"bounds", bounds}});

  // Over one lcm period: error < a_l forces p_1, ..., p_l | n; n = lcm(p_1..p_l) achieves < a_l / 2.
  // Times where only coordinate l misses sit exactly on a_l, so the comparison keeps a relative margin.
  constexpr double margin = 1e-10;
  const std::int64_t Lc = cascade_period_lcm(pc);
  std::vector<double> err(std::size_t(Lc) + 1);
  for (std::int64_t n = 1; n <= Lc; ++n) err[std::size_t(n)] = return_error(op, BigInt(n), q);
  int violations = 0;
  json rows = json::array();
  std::int64_t lc = 1;
  bool exist = true;
  for (std::size_t l = 0; l < L; ++l) {
    lc = std::lcm(lc, periods[l]);
    int below = 0;
    for (std::int64_t n = 1; n <= Lc; ++n)
      if (err[std::size_t(n)] < a[l] * (1.0 - margin)) {
        ++below;
        for (std::size_t j = 0; j <= l; ++j)
          if (n % periods[j] != 0) ++violations;
      }
    exist = exist && err[std::size_t(lc)] < a[l] / 2;
    rows.push_back({{"l", l + 1}, {"threshold", a[l]}, {"times_below", below}, {"lcm", lc}, {"error_at_lcm", err[std::size_t(lc)]}});
  }
  c.add("divisibility-forcing", pass_fail(violations == 0 && exist), std::to_string(Lc), margin,
        {{"violations", violations}, {"rows", rows}});
}

// ---------------------------------------------------------------------------
// factor-lift

inline void factor_lift_scenario(ScenarioContext& c) {
  const auto& p = c.params;
  const int size = int(p.i("size"));
  std::vector<PhaseAngle> ph;
  for (int i = 0; i < size; ++i) ph.push_back(PhaseAngle::approx(c.rng.uniform()));
  const OperatorSpec op = make_diagonal(ph);
  const auto sched = ToleranceSchedule::harmonic(int(p.i("depth")), p.r("scale"));
  const auto h = scan_horizon(p, "horizon");
  const auto basis = standard_basis(op);
  const auto pr = product_recurrence_test(op, size, {basis}, sched, BigInt(h), c.opt());
  const auto& rep = pr.per_tuple.at(0);
  c.add("quasi-rigid-times", check_verdict(rep.verdict), std::to_string(h), sched.final_eps(),
        {{"probes", {{"product", recurrence_json(rep)}}}});
  if (rep.verdict != Verdict::pass) return;

  const ReturnSequence omega = *rep.times;
  std::vector<BigInt> extra;
  for (int i = 0; i < 8; ++i) extra.emplace_back(1 + c.rng.below(h));
  const double eps = p.r("eps");
  const auto z = factor_lift(op, omega, basis, eps, size, sched, extra);
  const auto z2 = factor_lift(op, omega, basis, eps / 2, size, sched, extra);
  c.add("lift-returns", check_verdict(z.lift_report.verdict), omega.times.back().str(), sched.final_eps(),
        {{"probes", {{"lift", recurrence_json(z.lift_report)}}}});
  c.add("pullback", pass_fail(z.pullback_verified && z2.pullback_verified), omega.times.back().str(), 0.0,
        {{"extra_times", times_json(extra)}});
  double dev = 0.0;
  for (std::size_t k = 0; k < z.scales.size(); ++k) dev = std::max(dev, std::abs(z2.scales[k] / z.scales[k] - 0.5));
  c.add("eps-halving", pass_fail(dev <= 1e-15), "structured", 1e-15,
        {{"scales", z.scales}, {"scales_half_eps", z2.scales}, {"max_deviation", dev}});
}

// ---------------------------------------------------------------------------
// dstar-isometry

inline void dstar_isometry(ScenarioContext& c) {
  const auto& p = c.params;
  const int size = int(p.i("size"));
  const auto H = std::uint64_t(p.i("H"));
  const int samples = int(p.i("samples"));
  std::vector<PhaseAngle> ph;
  for (int i = 0; i < size; ++i) {
    const std::int64_t q = 1 + std::int64_t(c.rng.below(std::uint64_t(p.i("max_den"))));
    ph.push_back(PhaseAngle::exact(std::int64_t(c.rng.below(std::uint64_t(q))), q));
  }
  const OperatorSpec unit = make_diagonal(ph, 0);
  std::vector<double> w(std::size_t(size), 1.0), mod;
  std::vector<PhaseAngle> cph;
  for (int i = 0; i < size; ++i) {
    mod.push_back(c.rng.uniform(0.5, 0.9));
    cph.push_back(PhaseAngle::approx(c.rng.uniform()));
  }
  const OperatorSpec contraction = make_multiplication(w, cph, mod, 2.0);
  const BigInt period = *exact_period(unit);

  auto rnd = [&] {
    std::vector<cplx> v(static_cast<std::size_t>(size));
    for (auto& z : v) z = c.rng.cnormal();
    return CoeffVec(0, v);
  };
  double dom = HUGE_VAL, shift = -HUGE_VAL, iso = 0.0, inv = 0.0, contr = -HUGE_VAL;
  for (int s = 0; s < samples; ++s) {
    const CoeffVec x = rnd(), y = rnd();
    const double d0 = l2_of(x - y);
    for (const OperatorSpec* op : {&unit, &contraction}) {
      dom = std::min(dom, dstar_dist(x, y, *op, H) - d0);
      shift = std::max(shift, dstar_dist(reclab::apply(*op, x), reclab::apply(*op, y), *op, H) - dstar_dist(x, y, *op, H + 1));
    }
    const double du = dstar_dist(x, y, unit, H);
    iso = std::max(iso, std::abs(dstar_dist(reclab::apply(unit, x), reclab::apply(unit, y), unit, H) - du) / d0);
    const BigInt n = 1 + BigInt(c.rng.below(1000));
    const CoeffVec fwd = power(unit, n, x);
    const CoeffVec back = power(unit, period - n % period, x);
    inv = std::max(inv, std::abs(dstar_dist(fwd, x, unit, H) - dstar_dist(x, back, unit, H)) / std::max(1e-300, l2_of(x)));
    contr = std::max(contr, dstar_dist(reclab::apply(contraction, x), reclab::apply(contraction, y), contraction, H) - d0);
  }
  c.add("dominates-base-metric", pass_fail(dom >= 0.0), std::to_string(H), 0.0, {{"min_margin", dom}});
  c.add("shift-contraction", pass_fail(shift <= 1e-12), std::to_string(H), 1e-12, {{"max_excess", shift}});
  c.add("recurrent-isometry", pass_fail(iso <= 1e-12), std::to_string(H), 1e-12, {{"max_relative_defect", iso}});
  c.add("inverse-orbit-identity", pass_fail(inv <= 1e-12), std::to_string(H), 1e-12,
        {{"max_relative_defect", inv}, {"period", period.str()}});
  c.add("non-recurrent-contraction-shrinks", pass_fail(contr < 0.0), std::to_string(H), 0.0, {{"max_excess", contr}});
  bool refused = false;
  std::string msg;
  try {
    const AugeTapia at = make_auge_tapia(2, 8);
    dstar_dist(zero_vector(at), zero_vector(at), at, 1);
  } catch (const NotPowerBounded& e) {
    refused = true;
    msg = e.what();
  }
  c.add("not-power-bounded-refused", pass_fail(refused), "structured", 0.0, {{"message", msg}});
}

// ---------------------------------------------------------------------------
// catalog

inline const std::vector<ScenarioEntry>& catalog() {
  static const std::vector<ScenarioEntry> entries = [] {
    std::vector<ScenarioEntry> e;
    auto tp = tapia_params("100000");
    tp.push_back({"qr_eps", K::real, "0.05", 1e-9, 1, "final tolerance of the quasi-rigidity probe"});
    e.push_back({"auge-tapia-recurrent-not-quasi-rigid",
                 "single vectors return at 2 m_{theta-1}; the P-spanning sample has no common return",
                 tp, at_recurrent_not_quasi_rigid});
    e.push_back({"td-not-recurrent", "obstruction identity and common-return failure for the d-tuple",
                 tapia_params("1000000"), td_not_recurrent});
    e.push_back({"qrnh-rigid-eta-infinite",
                 "rigidity along m_{k_l}, eta witnesses from orthogonal omega directions, limit formula",
                 {{"D", K::integer, "128", 4, 512, "dimension of E"},
                  {"K", K::integer, "128", 8, 512, "perturbed coordinates 0..K-1"},
                  {"omega_seed", K::integer, "0", 0, 9e18, "seed of the omega enumeration"},
                  {"level", K::integer, "20", 2, 256, "rigidity level l"},
                  {"samples", K::integer, "20", 1, 1000, "random vectors"},
                  {"support", K::integer, "16", 0, 512, "E-support of the rigidity vectors"},
                  {"rigidity_tol", K::real, "1e-3", 1e-15, 1, "tolerance at level l"},
                  {"tuples", K::integer, "5", 1, 100, "sampled tuples"},
                  {"tuple_size", K::integer, "4", 1, 64, "vectors per tuple"},
                  {"tuple_support", K::integer, "64", 0, 511, "E-support of tuple vectors"},
                  {"witness_depth", K::integer, "9", 1, 64, "witness sequence length"},
                  {"witness_skip", K::integer, "2", 0, 64, "leading witness slots dropped"},
                  {"witness_eps", K::real, "0.05", 1e-12, 1, "final witness tolerance"},
                  {"witness_horizon", K::integer, "1000", 1, 1e7, "scan horizon inside the hyper-recurrence probe"},
                  {"limit_tol", K::real, "0.05", 1e-15, 1, "limit formula tolerance"}},
                 qrnh_rigid_eta_infinite});
    e.push_back({"hr-sta-d2", "d = 2: vectors returning along the visits of one direction form a codimension-one subspace",
                 {{"K", K::integer, "64", 16, 256, "perturbed coordinates"},
                  {"schedule", K::text, "triangular", -HUGE_VAL, HUGE_VAL, "m-schedule"},
                  {"g_seed", K::integer, "0", 0, 9e18, "seed of the g-enumeration"},
                  {"direction", K::integer, "0", 0, 1e6, "base direction b"},
                  {"noise", K::real, "1e-3", 0, 1, "generic coordinates"},
                  {"noise_depth", K::integer, "8", 0, 64, "generic coordinates d+1..d+noise_depth"},
                  {"depth", K::integer, "6", 1, 32, "visits checked"},
                  {"eps", K::real, "0.01", 1e-12, 1, "final tolerance"}},
                 hr_sta_d2});
    e.push_back({"multiplication-lp", "atomic multiplication models: modulus-one classification against brute force",
                 {{"models", K::integer, "50", 1, 10000, "random models"},
                  {"max_atoms", K::integer, "4", 1, 16, "atoms per model"},
                  {"p", K::real, "2", 1, 64, "L^p exponent"},
                  {"eps", K::real, "0.1", 1e-9, 10, "return tolerance"},
                  {"horizon", K::integer, "100000", 1, 1e7, "brute-force horizon"},
                  {"hr_depth", K::integer, "3", 1, 16, "hyper-recurrence depth"}},
                 multiplication_lp});
    e.push_back({"banach-holo-components", "multi-component sup-norm model: only unimodular constants recur",
                 {{"components", K::integer, "4", 1, 16, "disc components"},
                  {"boundary_points", K::integer, "64", 8, 4096, "samples per boundary circle"},
                  {"cases", K::integer, "20", 2, 1000, "random cases"},
                  {"eps", K::real, "0.05", 1e-9, 1, "return tolerance"},
                  {"horizon", K::integer, "100000", 1, 1e7, "scan horizon"},
                  {"cutoff_depth", K::integer, "3", 1, 16, "cutoff levels"},
                  {"cutoff_horizon", K::integer, "1000000", 1, 1e7, "cutoff scan horizon"}},
                 banach_holo_components});
    e.push_back({"composition-entire", "phi(z) = a z + b on polynomial truncations",
                 {{"degree", K::integer, "12", 1, 40, "polynomial degree"},
                  {"iterations", K::integer, "100", 1, 1000, "n for the iterate identity"},
                  {"a_phase", K::text, "0.2360679774997897", -HUGE_VAL, HUGE_VAL, "phase of a in turns"},
                  {"b", K::text, "(0.1,0.05)", -HUGE_VAL, HUGE_VAL, "translation b"},
                  {"model", K::text, "H(C)", -HUGE_VAL, HUGE_VAL, "H(C) or Ep(beta)"},
                  {"Q", K::integer, "64", 1, 1024, "largest root-of-unity order"},
                  {"micy_tol", K::real, "1e-8", 0, 1, "rejection threshold relative to ||c||"},
                  {"hr_degree", K::integer, "6", 1, 24, "degree for the hyper-recurrence probe"},
                  {"hr_depth", K::integer, "3", 1, 16, "probe depth"},
                  {"hr_eps", K::real, "0.1", 1e-9, 10, "final probe tolerance"},
                  {"hr_margin", K::real, "0.05", 1e-6, 1, "x returns within margin * tolerance"},
                  {"horizon", K::integer, "1000000", 1, 1e7, "scan horizon"},
                  {"root_orders", K::text, "3,4,5,6,8,12", -HUGE_VAL, HUGE_VAL, "orders of a"}},
                 composition_entire});
    e.push_back({"dirichlet-recurrence", "C_{s+it} rigidity on coefficients, isometry, r(eta) and the non-recurrence bound",
                 {{"t", K::real, "1", -1e6, 1e6, "imaginary translation"},
                  {"N", K::integer, "8", 1, 64, "coefficients a_1..a_N"},
                  {"depth", K::integer, "3", 1, 16, "rigidity depth"},
                  {"scale", K::real, "1", 1e-9, 10, "harmonic schedule scale"},
                  {"horizon", K::integer, "1000000", 1, 1e7, "scan horizon"},
                  {"isometry_samples", K::integer, "10", 1, 1000, "random f"},
                  {"etas", K::text, "0.5,1,2", -HUGE_VAL, HUGE_VAL, "eta values"},
                  {"g_count", K::integer, "100", 2, 100000, "admissible g per eta"},
                  {"g_length", K::integer, "16", 2, 1024, "coefficients of g"},
                  {"ell_max", K::integer, "10", 1, 1000, "iterates l = 1..ell_max"},
                  {"shift_t", K::real, "1", -1e6, 1e6, "imaginary part of the per-step shift"}},
                 dirichlet_recurrence});
    e.push_back({"periodic-cascade", "cascade with 4 b(p_{l+1}) < a(p_l): factorial times and divisibility forcing",
                 {{"periods", K::text, "2,3,5,7,11", -HUGE_VAL, HUGE_VAL, "increasing periods"},
                  {"first_scale", K::real, "1", 1e-6, 1e6, "scale of the first coordinate"},
                  {"factorial_depth", K::integer, "12", 1, 40, "n for the times n!"}},
                 periodic_cascade});
    e.push_back({"factor-lift", "lift of a quasi-rigid diagonal operator and the pullback property",
                 {{"size", K::integer, "3", 1, 6, "diagonal size"},
                  {"depth", K::integer, "3", 1, 8, "schedule depth"},
                  {"scale", K::real, "0.5", 1e-6, 10, "harmonic schedule scale"},
                  {"eps", K::real, "0.1", 1e-12, 10, "lift tolerance"},
                  {"horizon", K::integer, "1000000", 1, 1e7, "scan horizon"}},
                 factor_lift_scenario});
    e.push_back({"dstar-isometry", "horizon-truncated orbit metric: isometry for recurrent, shrinkage otherwise",
                 {{"size", K::integer, "6", 1, 64, "window size"},
                  {"H", K::integer, "50", 1, 100000, "orbit horizon"},
                  {"samples", K::integer, "10", 1, 10000, "random pairs"},
                  {"max_den", K::integer, "12", 1, 1000000, "largest phase denominator"}},
                 dstar_isometry});
    return e;
  }();
  return entries;
}

}  // namespace scn

inline const std::vector<ScenarioEntry>& scenario_catalog() { return scn::catalog(); }

inline const ScenarioEntry& find_scenario(const std::string& name) {
  for (const auto& e : scenario_catalog())
    if (e.name == name) return e;
  std::string names;
  for (const auto& e : scenario_catalog()) names += "\n  " + e.name;
  throw UnknownScenario("unknown scenario: " + name + "\navailable scenarios:" + names);
}

inline ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  const ScenarioEntry& e = find_scenario(cfg.name);
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioContext c{Params(e.name, e.params, cfg.params), cfg.seed.value_or(0), std::max(1u, cfg.workers),
                    Rng(cfg.seed.value_or(0)), {}};
  e.run(c);
  ScenarioReport r;
  r.scenario = e.name;
  r.params = c.params.effective();
  r.seed = c.seed;
  r.seed_defaulted = !cfg.seed;
  r.checks = std::move(c.checks);
  r.verdict = overall_verdict(r.checks);
  if (cfg.timing)
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// ---------------------------------------------------------------------------
// ad-hoc probes: [operator] builds the operator, [probe] carries the inputs

inline ToleranceSchedule parse_schedule(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts[0] == "harmonic" && parts.size() == 3)
    return ToleranceSchedule::harmonic(int(to_int(parts[1], "schedule")), to_real(parts[2], "schedule"));
  if (parts[0] == "geometric" && parts.size() == 4)
    return ToleranceSchedule::geometric(int(to_int(parts[1], "schedule")), to_real(parts[2], "schedule"),
                                        to_real(parts[3], "schedule"));
  if (parts[0] == "list" && parts.size() == 2) return ToleranceSchedule::list(parse_real_list(parts[1], "schedule"));
  throw ConfigError("schedule: expected harmonic:K:scale, geometric:K:first:ratio or list:v1,v2,...");
}

inline const std::vector<std::string>& probe_names() {
  static const std::vector<std::string> n{"in-l-omega", "quasi-rigidity", "hyper-recurrence", "stationarity", "return-set",
                                          "tapia-obstruction"};
  return n;
}

namespace detail {

inline std::vector<CoeffVec> probe_vectors(const json& pr, const OperatorSpec& op) {
  if (!pr.contains("vectors") || !pr["vectors"].is_object()) throw ConfigError("probe: missing [probe.vectors] section");
  std::vector<std::pair<std::int64_t, CoeffVec>> v;
  for (auto it = pr["vectors"].begin(); it != pr["vectors"].end(); ++it) {
    if (it.key().find("_offset") != std::string::npos) continue;
    v.emplace_back(to_int(it.key(), "probe.vectors"), vector_from_kv(pr["vectors"], it.key(), op));
  }
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<CoeffVec> out;
  for (auto& [k, x] : v) out.push_back(std::move(x));
  if (out.empty()) throw ConfigError("probe: [probe.vectors] is empty");
  return out;
}

inline ReturnSequence probe_times(const json& pr) {
  std::vector<BigInt> t;
  for (const auto& s : split(detail::need(pr, "times"), ','))
    if (!s.empty()) t.push_back(parse_bigint(s));
  return {std::move(t), Provenance::user};
}

}  // namespace detail

inline ScenarioReport run_probe(const std::string& name, const json& cfg, unsigned workers = 1) {
  if (std::find(probe_names().begin(), probe_names().end(), name) == probe_names().end())
    throw UnknownScenario("unknown probe: " + name + "\navailable probes: " + join(probe_names(), ", ", [](const std::string& s) { return s; }));
  if (!cfg.contains("operator")) throw ConfigError("probe: missing [operator] section");
  if (!cfg.contains("probe")) throw ConfigError("probe: missing [probe] section");
  const OperatorSpec op = operator_from_kv(cfg["operator"]);
  const json& pr = cfg["probe"];
  auto allow = [&](std::initializer_list<const char*> keys) {
    for (auto it = pr.begin(); it != pr.end(); ++it) {
      bool ok = false;
      for (const char* k : keys) ok = ok || it.key() == k || it.key() == std::string(k) + "_offset";
      if (!ok) throw ConfigError("probe: unknown key " + it.key());
    }
  };
  const ProbeOptions opt{workers, 0};
  auto sched = [&] { return parse_schedule(detail::opt(pr, "schedule", "harmonic:5:1")); };
  auto horizon = [&] { return parse_bigint(detail::opt(pr, "horizon", "100000")); };
  ScenarioReport r;
  r.scenario = "probe:" + name;
  r.params = {{"operator", cfg["operator"]}, {"probe", pr}};
  r.seed_defaulted = true;
  RecurrenceReport rep;
  if (name == "in-l-omega") {
    allow({"x", "times", "schedule"});
    rep = in_L_omega(op, vector_from_kv(pr, "x", op), detail::probe_times(pr), sched());
  } else if (name == "quasi-rigidity") {
    allow({"vectors", "schedule", "horizon"});
    rep = quasi_rigidity_probe(op, detail::probe_vectors(pr, op), sched(), horizon(), opt);
  } else if (name == "hyper-recurrence") {
    allow({"x", "schedule", "horizon", "sequences"});
    rep = hyper_recurrence_probe(op, vector_from_kv(pr, "x", op), scn::standard_basis(op), sched(), horizon(),
                                 int(to_int(detail::opt(pr, "sequences", "3"), "sequences")), opt);
  } else if (name == "stationarity") {
    allow({"vectors", "times", "schedule", "seed"});
    rep = stationarity_probe(op, detail::probe_times(pr), detail::probe_vectors(pr, op), sched(),
                             std::uint64_t(to_int(detail::opt(pr, "seed", "0"), "seed")));
  } else if (name == "return-set") {
    allow({"x", "eps", "horizon"});
    const auto h = horizon();
    if (!fits_i63(h)) throw ConfigError("return-set: horizon too large");
    const auto t = return_set(op, vector_from_kv(pr, "x", op), to_real(detail::need(pr, "eps"), "eps"),
                              static_cast<std::uint64_t>(h), opt);
    rep.probe = "return_set";
    rep.horizon = h;
    rep.tolerance = to_real(detail::need(pr, "eps"), "eps");
    rep.verdict = t.empty() ? Verdict::inconclusive : Verdict::pass;
    std::vector<BigInt> tb(t.begin(), t.end());
    rep.data["times"] = times_json(tb);
  } else {
    allow({"x", "n"});
    const auto* at = std::get_if<AugeTapia>(&op);
    if (!at) throw ConfigError("tapia-obstruction: operator family must be auge-tapia");
    const BigInt n = parse_bigint(detail::need(pr, "n"));
    const auto row = tapia_obstruction_row(*at, vector_from_kv(pr, "x", op), n);
    json rows = json::array();
    double worst = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      worst = std::max(worst, row[j].relative_gap());
      rows.push_back({{"k", int(j) + at->d + 1}, {"lhs", cplx_json(row[j].lhs)}, {"rhs", cplx_json(row[j].rhs)},
                      {"relative_gap", row[j].relative_gap()}});
    }
    rep.probe = "tapia_obstruction";
    rep.horizon = n;
    rep.tolerance = 1e-10;
    rep.verdict = worst < 1e-10 ? Verdict::pass : Verdict::fail;
    rep.data = {{"rows", rows}, {"worst_relative_gap", worst}};
  }
  const json rj = recurrence_json(rep);
  r.checks.push_back({name, check_verdict(rep.verdict), rep.horizon.str(), rep.tolerance,
                      {{"probes", {{name, rj}}}, {"probe_verdict", verdict_name(rep.verdict)}}});
  r.verdict = overall_verdict(r.checks);
  return r;
}

}  // namespace reclab

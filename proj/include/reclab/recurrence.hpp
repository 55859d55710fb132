#pragma once

#include "reclab/diophantine.hpp"

#include <json.hpp>

#include <map>

namespace reclab {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// tolerance schedules

struct ToleranceSchedule {
  enum class Kind { harmonic, geometric, list };
  Kind kind = Kind::harmonic;
  double scale = 1.0;  // harmonic: scale / k; geometric: scale * ratio^(k-1)
  double ratio = 0.5;
  std::vector<double> values;
  int max_k = 10;

  static ToleranceSchedule harmonic(int max_k, double scale = 1.0) {
    ToleranceSchedule s;
    s.max_k = max_k;
    s.scale = scale;
    s.validate();
    return s;
  }
  static ToleranceSchedule geometric(int max_k, double first, double ratio) {
    ToleranceSchedule s;
    s.kind = Kind::geometric;
    s.max_k = max_k;
    s.scale = first;
    s.ratio = ratio;
    s.validate();
    return s;
  }
  static ToleranceSchedule list(std::vector<double> v) {
    ToleranceSchedule s;
    s.kind = Kind::list;
    s.max_k = int(v.size());
    s.values = std::move(v);
    s.validate();
    return s;
  }

  double eps_at(int k) const {
    if (k < 1) throw ConfigError("ToleranceSchedule: k must be >= 1");
    switch (kind) {
      case Kind::harmonic: return scale / k;
      case Kind::geometric: return scale * std::pow(ratio, k - 1);
      case Kind::list: return values.at(std::size_t(std::min(k, max_k) - 1));
    }
    return 0.0;
  }
  double final_eps() const { return eps_at(max_k); }

  // Loosened by a constant factor, for derived vectors whose errors add up.
  ToleranceSchedule degraded(double factor) const {
    ToleranceSchedule s = *this;
    s.scale *= factor;
    for (auto& v : s.values) v *= factor;
    return s;
  }

  void validate() const {
    if (max_k < 1) throw ConfigError("ToleranceSchedule: max_k must be >= 1");
    if (kind == Kind::harmonic && !(scale > 0.0)) throw ConfigError("ToleranceSchedule: scale must be > 0");
    if (kind == Kind::geometric && !(scale > 0.0 && ratio > 0.0 && ratio < 1.0))
      throw ConfigError("ToleranceSchedule: geometric needs first > 0 and 0 < ratio < 1");
    if (kind == Kind::list) {
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0)) throw ConfigError("ToleranceSchedule: values must be positive");
        if (i && !(values[i] < values[i - 1])) throw ConfigError("ToleranceSchedule: values must strictly decrease");
      }
    }
  }
};

// ---------------------------------------------------------------------------
// reports

enum class Verdict { pass, fail, inconclusive, consistent, witness_against, stationary_consistent, stationary_inconsistent };

inline std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive-at-horizon";
    case Verdict::consistent: return "consistent-with-hyper-recurrent";
    case Verdict::witness_against: return "witness-against";
    case Verdict::stationary_consistent: return "stationary-consistent";
    case Verdict::stationary_inconsistent: return "stationary-inconsistent";
  }
  return {};
}

inline Verdict parse_verdict(const std::string& s) {
  for (auto v : {Verdict::pass, Verdict::fail, Verdict::inconclusive, Verdict::consistent, Verdict::witness_against,
                 Verdict::stationary_consistent, Verdict::stationary_inconsistent})
    if (verdict_name(v) == s) return v;
  throw ConfigError("unknown verdict: " + s);
}

struct TrajPoint {
  BigInt time;
  double error = 0.0;
  double tail = 0.0;
  bool operator==(const TrajPoint&) const = default;
};

struct RecurrenceReport {
  std::string probe;
  Verdict verdict = Verdict::inconclusive;
  std::optional<ReturnSequence> times;
  std::vector<TrajPoint> trajectory;
  BigInt horizon;
  double tolerance = 0.0;
  double tail_bound = 0.0;  // max truncation-tail bound over the trajectory
  std::optional<NearMiss> near_miss;
  json data = json::object();

  bool passed() const { return verdict == Verdict::pass || verdict == Verdict::consistent || verdict == Verdict::stationary_consistent; }
};

struct ProbeOptions {
  unsigned workers = 1;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// helpers

// T^L = I exactly on the truncation, when such an L is known.
inline std::optional<BigInt> exact_period(const OperatorSpec& op) {
  return std::visit(
      [](const auto& o) -> std::optional<BigInt> {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, DiagonalUnitary>) {
          if (!all_exact(o.phases)) return std::nullopt;
          return phase_period(o.phases);
        } else if constexpr (std::is_same_v<T, PeriodicCascade>) {
          return BigInt(cascade_period_lcm(o));
        } else if constexpr (std::is_same_v<T, MultiplicationAtomic>) {
          for (double r : o.moduli)
            if (r != 1.0) return std::nullopt;
          if (!all_exact(o.phases)) return std::nullopt;
          return phase_period(o.phases);
        } else if constexpr (std::is_same_v<T, AffineComposition>) {
          if (!o.a_phase || !o.a_phase->is_exact()) return std::nullopt;
          if (o.b != cplx{} && o.a_phase->num() == 0) return std::nullopt;
          return o.a_phase->den();
        } else if constexpr (std::is_same_v<T, DirichletComposition>) {
          if (o.t == 0.0) return BigInt(1);
          return std::nullopt;
        } else {
          return std::nullopt;
        }
      },
      op);
}

inline double l2_of(const CoeffVec& v) { return norm(v, NormSpec::l2()); }

// Numerical rank of a family of coefficient vectors on a common window.
inline int numerical_rank(const std::vector<CoeffVec>& vs, std::int64_t offset, std::size_t len, double tol = 1e-9) {
  std::vector<std::vector<cplx>> a;
  double scale = 0.0;
  for (const auto& v : vs) {
    const CoeffVec w = v.aligned_to(offset, len);
    a.push_back(w.coeffs());
    scale = std::max(scale, l2_of(w));
  }
  int rank = 0;
  const std::size_t rows = a.size();
  for (std::size_t col = 0; col < len && std::size_t(rank) < rows; ++col) {
    std::size_t piv = std::size_t(rank);
    for (std::size_t r = std::size_t(rank); r < rows; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) <= tol * std::max(scale, 1e-300)) continue;
    std::swap(a[piv], a[std::size_t(rank)]);
    const auto& p = a[std::size_t(rank)];
    for (std::size_t r = std::size_t(rank) + 1; r < rows; ++r) {
      const cplx f = a[r][col] / p[col];
      for (std::size_t c = col; c < len; ++c) a[r][c] -= f * p[c];
    }
    ++rank;
  }
  return rank;
}

struct GreedyReturns {
  std::vector<BigInt> times;
  std::vector<double> errors;
  int failed_k = 0;  // 0 when every level succeeded
  std::optional<NearMiss> near_miss;
  BigInt scanned_to;
  std::vector<std::string> regimes;  // per time: lcm-exact or brute-force
};

// theta_k: first time after theta_{k-1} with max_{x in vectors(k)} ||T^n x - x|| < eps_at(k).
template <class VecsAt>
GreedyReturns greedy_returns(const OperatorSpec& op, VecsAt&& vectors_at, const ToleranceSchedule& sched,
                             const BigInt& horizon, const ProbeOptions& opt) {
  GreedyReturns g;
  const auto period = exact_period(op);
  BigInt prev = 0;
  const std::uint64_t cap = fits_i63(horizon) ? std::min<std::uint64_t>(std::uint64_t(horizon), kScanCap) : kScanCap;
  for (int k = 1; k <= sched.max_k; ++k) {
    const std::vector<CoeffVec> vs = vectors_at(k);
    const double eps = sched.eps_at(k);
    auto err_big = [&](const BigInt& n) {
      double e = 0.0;
      for (const auto& x : vs) e = std::max(e, return_error(op, n, x));
      return e;
    };
    if (period) {
      const BigInt t = (prev / *period + 1) * *period;
      if (t <= horizon) {
        const double e = err_big(t);
        if (e < eps) {
          g.times.push_back(t);
          g.errors.push_back(e);
          g.regimes.push_back("lcm-exact");
          prev = t;
          continue;
        }
      }
    }
    const std::uint64_t lo = static_cast<std::uint64_t>(prev) + 1;
    const ReturnErrors errs(op, vs);
    const auto s = scan_range(lo, cap, eps, 1, opt.workers, [&](std::uint64_t n, double cut) { return errs.max_error(n, cut); });
    if (s.times.empty()) {
      g.failed_k = k;
      g.near_miss = NearMiss{BigInt(s.best_time), s.best_error};
      g.scanned_to = cap;
      return g;
    }
    g.times.emplace_back(s.times[0]);
    g.errors.push_back(s.errors[0]);
    g.regimes.push_back("brute-force");
    prev = s.times[0];
  }
  g.scanned_to = prev;
  return g;
}

inline std::vector<TrajPoint> trajectory_of(const OperatorSpec& op, const CoeffVec& x, const std::vector<BigInt>& times) {
  std::vector<TrajPoint> out;
  for (const auto& t : times) out.push_back({t, return_error(op, t, x), tail_bound(op, t, x)});
  return out;
}

inline double max_tail(const std::vector<TrajPoint>& tr) {
  double m = 0.0;
  for (const auto& p : tr) m = std::max(m, p.tail);
  return m;
}

inline json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

// ---------------------------------------------------------------------------
// probes

// {n <= horizon : ||T^n x - x|| < eps}.
inline std::vector<std::uint64_t> return_set(const OperatorSpec& op, const CoeffVec& x, double eps,
                                             std::uint64_t horizon, const ProbeOptions& opt = {}) {
  if (!(eps > 0.0)) throw ConfigError("return_set: eps must be > 0");
  if (horizon > kScanCap) throw ConfigError("return_set: horizon above the scan cap of 10^7");
  const ReturnErrors err(op, {x});
  return scan_range(1, horizon, eps, std::numeric_limits<std::size_t>::max(), opt.workers,
                    [&](std::uint64_t n, double cut) { return err.max_error(n, cut); })
      .times;
}

inline RecurrenceReport in_L_omega(const OperatorSpec& op, const CoeffVec& x, const ReturnSequence& omega,
                                   const ToleranceSchedule& sched) {
  omega.validate();
  RecurrenceReport r;
  r.probe = "in_L_omega";
  const std::size_t depth = std::min<std::size_t>(std::size_t(sched.max_k), omega.size());
  const std::vector<BigInt> t(omega.times.begin(), omega.times.begin() + std::ptrdiff_t(depth));
  r.trajectory = trajectory_of(op, x, t);
  r.horizon = t.back();
  r.tolerance = sched.eps_at(int(depth));
  r.tail_bound = max_tail(r.trajectory);
  r.times = omega;
  bool ok = true;
  int first_bad = 0;
  for (std::size_t k = 0; k < depth; ++k)
    if (!(r.trajectory[k].error <= sched.eps_at(int(k + 1)))) {
      ok = false;
      if (!first_bad) first_bad = int(k + 1);
    }
  r.verdict = ok ? Verdict::pass : Verdict::fail;
  r.data["depth"] = depth;
  if (!ok) r.data["first_failing_k"] = first_bad;
  return r;
}

namespace detail {

// Largest single-coordinate obstruction (lambda_k^n - 1)(e_k*(y) + g_k(Py)/((lambda_k - 1) m_{k-1})) at time n.
inline json tapia_obstruction_json(const AugeTapia& at, const std::vector<CoeffVec>& ys, const BigInt& n) {
  json best;
  double mag = -1.0;
  for (std::size_t i = 0; i < ys.size(); ++i)
    for (int k = at.d + 1; k <= at.d + at.K; ++k) {
      const auto s = tapia_obstruction(at, ys[i], n, k);
      if (std::abs(s.rhs) > mag) {
        mag = std::abs(s.rhs);
        best = {{"vector", i}, {"k", k}, {"time", n.str()}, {"lhs", cplx_json(s.lhs)}, {"rhs", cplx_json(s.rhs)},
                {"magnitude", mag}, {"relative_gap", s.relative_gap()}};
      }
    }
  return best;
}

}  // namespace detail

// H_k = intersection over j <= k of N(y_j, B(y_j, eps_at(k))); emits theta_k in H_k increasing.
inline RecurrenceReport quasi_rigidity_probe(const OperatorSpec& op, const std::vector<CoeffVec>& sample,
                                             const ToleranceSchedule& sched, const BigInt& horizon,
                                             const ProbeOptions& opt = {}) {
  if (sample.empty()) throw ConfigError("quasi_rigidity_probe: empty sample");
  std::vector<CoeffVec> ys;
  for (const auto& y : sample) ys.push_back(fit_window(op, y));
  RecurrenceReport r;
  r.probe = "quasi_rigidity";
  r.horizon = horizon;
  r.tolerance = sched.final_eps();
  const auto g = greedy_returns(
      op,
      [&](int k) { return std::vector<CoeffVec>(ys.begin(), ys.begin() + std::ptrdiff_t(std::min<std::size_t>(std::size_t(k), ys.size()))); },
      sched, horizon, opt);
  for (std::size_t i = 0; i < g.times.size(); ++i) {
    double tail = 0.0;
    for (const auto& y : ys) tail = std::max(tail, tail_bound(op, g.times[i], y));
    r.trajectory.push_back({g.times[i], g.errors[i], tail});
  }
  r.tail_bound = max_tail(r.trajectory);
  r.data["regimes"] = g.regimes;
  r.data["scanned_to"] = g.scanned_to.str();
  if (g.failed_k == 0) {
    r.verdict = Verdict::pass;
    r.times = ReturnSequence(g.times, g.regimes.empty() || g.regimes[0] == "lcm-exact" ? Provenance::lcm_exact
                                                                                       : Provenance::brute_force);
  } else {
    r.verdict = Verdict::inconclusive;
    r.near_miss = g.near_miss;
    r.data["failed_k"] = g.failed_k;
    r.data["failed_eps"] = sched.eps_at(g.failed_k);
    if (const auto* at = std::get_if<AugeTapia>(&op); at && g.near_miss && g.near_miss->time > 0) {
      const std::size_t used = std::min<std::size_t>(std::size_t(g.failed_k), ys.size());
      r.data["obstruction"] = detail::tapia_obstruction_json(*at, std::vector<CoeffVec>(ys.begin(), ys.begin() + std::ptrdiff_t(used)),
                                                             g.near_miss->time);
    }
  }
  return r;
}

struct ProductResult {
  std::vector<RecurrenceReport> per_tuple;
  bool all_pass = false;  // quasi-rigidity indicator at sample level
};

inline ProductResult product_recurrence_test(const OperatorSpec& op, int m, const std::vector<std::vector<CoeffVec>>& tuples,
                                             const ToleranceSchedule& sched, const BigInt& horizon,
                                             const ProbeOptions& opt = {}) {
  if (m < 1) throw ConfigError("product_recurrence_test: m must be >= 1");
  ProductResult out;
  out.all_pass = true;
  for (const auto& tup : tuples) {
    if (int(tup.size()) != m) throw ConfigError("product_recurrence_test: tuple size differs from m");
    std::vector<CoeffVec> ys;
    for (const auto& y : tup) ys.push_back(fit_window(op, y));
    const auto g = greedy_returns(op, [&](int) { return ys; }, sched, horizon, opt);
    RecurrenceReport r;
    r.probe = "product_recurrence";
    r.horizon = horizon;
    r.tolerance = sched.final_eps();
    for (std::size_t i = 0; i < g.times.size(); ++i) r.trajectory.push_back({g.times[i], g.errors[i], 0.0});
    for (auto& p : r.trajectory)
      for (const auto& y : ys) p.tail = std::max(p.tail, tail_bound(op, p.time, y));
    r.tail_bound = max_tail(r.trajectory);
    if (g.failed_k == 0) {
      r.verdict = Verdict::pass;
      r.times = ReturnSequence(g.times, g.regimes[0] == "lcm-exact" ? Provenance::lcm_exact : Provenance::brute_force);
    } else {
      r.verdict = Verdict::inconclusive;
      r.near_miss = g.near_miss;
      r.data["failed_k"] = g.failed_k;
      if (const auto* at = std::get_if<AugeTapia>(&op); at && g.near_miss && g.near_miss->time > 0)
        r.data["obstruction"] = detail::tapia_obstruction_json(*at, ys, g.near_miss->time);
      out.all_pass = false;
    }
    out.per_tuple.push_back(std::move(r));
  }
  return out;
}

// Candidate return sequences for x: lcm-exact multiples, structured m-times and their thinnings, and a greedy scan.
inline std::vector<ReturnSequence> candidate_sequences(const OperatorSpec& op, const CoeffVec& x,
                                                       const ToleranceSchedule& sched, const BigInt& horizon,
                                                       const ProbeOptions& opt) {
  std::vector<ReturnSequence> c;
  const std::size_t depth = std::size_t(sched.max_k);
  if (const auto p = exact_period(op)) {
    std::vector<BigInt> t;
    for (std::size_t i = 1; i <= depth; ++i) t.push_back(*p * i);
    c.emplace_back(std::move(t), Provenance::lcm_exact);
  }
  const MSequence* m = nullptr;
  if (const auto* at = std::get_if<AugeTapia>(&op)) m = &at->m;
  if (const auto* q = std::get_if<QRNH>(&op)) m = &q->m;
  if (m) {
    const ReturnSequence base = structured_mk_times(*m, BigInt(std::holds_alternative<AugeTapia>(op) ? 2 : 1));
    for (std::size_t skip : {0, 4, 8, 12})
      for (std::size_t stride : {1, 2, 3})
        for (std::size_t start = skip; start < skip + stride && start < base.size(); ++start) {
          auto s = base.subsequence(start, stride);
          if (s.size() > depth) s.times.resize(depth);
          c.push_back(std::move(s));
        }
  }
  const CoeffVec xx = fit_window(op, x);
  const auto g = greedy_returns(op, [&](int) { return std::vector<CoeffVec>{xx}; }, sched, horizon, opt);
  if (g.failed_k == 0 && !g.times.empty()) c.emplace_back(g.times, Provenance::brute_force);
  return c;
}

inline RecurrenceReport hyper_recurrence_probe(const OperatorSpec& op, const CoeffVec& x,
                                               const std::vector<CoeffVec>& spanning_set, const ToleranceSchedule& sched,
                                               const BigInt& horizon, int n_sequences, const ProbeOptions& opt = {},
                                               std::vector<ReturnSequence> extra = {}) {
  const Window w = window(op);
  if (numerical_rank(spanning_set, w.offset, w.size) < int(w.size))
    throw ConfigError("hyper_recurrence_probe: spanning set does not span the truncated space");
  RecurrenceReport r;
  r.probe = "hyper_recurrence";
  r.horizon = horizon;
  r.tolerance = sched.final_eps();
  auto cands = candidate_sequences(op, x, sched, horizon, opt);
  cands.insert(cands.begin(), extra.begin(), extra.end());
  int tested = 0;
  json tried = json::array();
  std::vector<ReturnSequence> seen;
  for (const auto& omega : cands) {
    if (tested >= n_sequences) break;
    if (std::find(seen.begin(), seen.end(), omega) != seen.end()) continue;
    seen.push_back(omega);
    const auto rx = in_L_omega(op, x, omega, sched);
    if (rx.verdict != Verdict::pass) continue;
    ++tested;
    r.tail_bound = std::max(r.tail_bound, rx.tail_bound);
    json entry = {{"provenance", provenance_name(omega.provenance)}, {"length", omega.size()}, {"first", omega[0].str()}};
    for (std::size_t i = 0; i < spanning_set.size(); ++i) {
      const auto ri = in_L_omega(op, spanning_set[i], omega, sched);
      r.tail_bound = std::max(r.tail_bound, ri.tail_bound);
      if (ri.verdict != Verdict::pass) {
        r.verdict = Verdict::witness_against;
        r.times = omega;
        r.trajectory = ri.trajectory;
        entry["witness_index"] = i;
        tried.push_back(entry);
        r.data["sequences"] = tried;
        r.data["witness_index"] = i;
        r.data["tested"] = tested;
        return r;
      }
    }
    if (!r.times) {
      r.times = omega;
      r.trajectory = rx.trajectory;
    }
    tried.push_back(entry);
  }
  r.data["sequences"] = tried;
  r.data["tested"] = tested;
  r.verdict = tested == 0 ? Verdict::inconclusive : Verdict::consistent;
  return r;
}

struct EtaSamples {
  std::vector<std::pair<BigInt, double>> ratios;
  std::vector<double> clusters;  // distinct accumulation values, ascending
};

inline EtaSamples eta_ratio_samples(const OperatorSpec& op, const CoeffVec& p, const CoeffVec& q, std::uint64_t horizon,
                                    double floor = 1e-12, double cluster_tol = 1e-9) {
  EtaSamples out;
  const CoeffVec pp = fit_window(op, p), qq = fit_window(op, q);
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    const BigInt nb(n);
    const double den = return_error(op, nb, qq);
    if (den <= floor) continue;
    out.ratios.emplace_back(nb, return_error(op, nb, pp) / den);
  }
  if (out.ratios.empty())
    throw ConfigError("eta_ratio_samples: degenerate input, ||T^n q - q|| stays below the floor over the horizon");
  std::vector<double> v;
  for (const auto& pr : out.ratios) v.push_back(pr.second);
  std::sort(v.begin(), v.end());
  for (double x : v)
    if (out.clusters.empty() || x - out.clusters.back() > cluster_tol * std::max(1.0, std::abs(x))) out.clusters.push_back(x);
  return out;
}

// Subsequence generators: tail shifts 1..5, parity classes, 3 seeded thinnings of density 1/2.
inline std::vector<std::pair<std::string, ReturnSequence>> stationarity_strategies(const ReturnSequence& omega,
                                                                                   std::uint64_t seed) {
  std::vector<std::pair<std::string, ReturnSequence>> out;
  for (std::size_t s = 1; s <= 5; ++s)
    if (s < omega.size()) out.emplace_back("shift-" + std::to_string(s), omega.shifted(s));
  out.emplace_back("even", omega.subsequence(0, 2));
  if (omega.size() > 1) out.emplace_back("odd", omega.subsequence(1, 2));
  for (int r = 0; r < 3; ++r) {
    std::uint64_t state = detail::mix64(seed + 0x9E3779B97F4A7C15ULL * std::uint64_t(r + 1));
    std::vector<BigInt> t;
    for (const auto& v : omega.times) {
      state = detail::mix64(state);
      if (state & 1) t.push_back(v);
    }
    if (t.empty()) t.push_back(omega.times.back());
    out.emplace_back("thin-" + std::to_string(r), ReturnSequence(std::move(t), omega.provenance));
  }
  return out;
}

inline RecurrenceReport stationarity_probe(const OperatorSpec& op, const ReturnSequence& omega,
                                           const std::vector<CoeffVec>& test_set, const ToleranceSchedule& sched,
                                           std::uint64_t seed = 0) {
  if (omega.size() < std::size_t(sched.max_k)) throw ConfigError("stationarity_probe: omega shorter than the schedule depth");
  RecurrenceReport r;
  r.probe = "stationarity";
  r.times = omega;
  r.horizon = omega.times.back();
  r.tolerance = sched.final_eps();
  auto pattern = [&](const ReturnSequence& s) {
    std::vector<bool> p;
    for (const auto& x : test_set) {
      const auto rep = in_L_omega(op, x, s, sched);
      r.tail_bound = std::max(r.tail_bound, rep.tail_bound);
      p.push_back(rep.verdict == Verdict::pass);
    }
    return p;
  };
  const auto base = pattern(omega);
  r.data["base_pattern"] = base;
  json diffs = json::array();
  for (const auto& [name, mu] : stationarity_strategies(omega, seed)) {
    const auto p = pattern(mu);
    if (p != base) diffs.push_back({{"strategy", name}, {"pattern", p}});
  }
  r.data["disagreements"] = diffs;
  r.verdict = diffs.empty() ? Verdict::stationary_consistent : Verdict::stationary_inconsistent;
  return r;
}

// Lower bound for |N_omega(B(center, radius))| through probes inside the ball.
inline std::size_t n_omega_count(const OperatorSpec& op, const CoeffVec& center, double radius, const ReturnSequence& omega,
                                 const std::vector<CoeffVec>& probes) {
  if (!(radius > 0.0)) throw ConfigError("n_omega_count: radius must be > 0");
  const CoeffVec c = fit_window(op, center);
  std::vector<CoeffVec> ps;
  for (const auto& p : probes) {
    const CoeffVec pp = fit_window(op, p);
    if (!(l2_of(pp - c) < radius)) throw ConfigError("n_omega_count: probe outside the ball");
    ps.push_back(pp);
  }
  std::size_t count = 0;
  for (const auto& n : omega.times)
    for (const auto& p : ps)
      if (l2_of(power(op, n, p) - c) < radius) {
        ++count;
        break;
      }
  return count;
}

struct FactorLift {
  std::vector<double> scales;       // r_k
  std::vector<CoeffVec> components;  // r_k q_k in the l1-product model
  RecurrenceReport lift_report;      // recurrence of the lift along omega
  bool pullback_verified = false;
};

inline double lift_error(const OperatorSpec& op, const FactorLift& z, const BigInt& n) {
  double s = 0.0;
  for (const auto& c : z.components) s += return_error(op, n, c);
  return s;
}

inline FactorLift factor_lift(const OperatorSpec& op, const ReturnSequence& omega, const std::vector<CoeffVec>& q_list,
                              double eps, int depth, const ToleranceSchedule& sched,
                              const std::vector<BigInt>& pullback_times = {}) {
  if (!(eps > 0.0)) throw ConfigError("factor_lift: eps must be > 0");
  if (depth < 1 || std::size_t(depth) > q_list.size()) throw ConfigError("factor_lift: depth exceeds the product width");
  omega.validate();
  FactorLift z;
  for (int k = 1; k <= depth; ++k) {
    const CoeffVec q = fit_window(op, q_list[std::size_t(k - 1)]);
    if (in_L_omega(op, q, omega, sched).verdict != Verdict::pass)
      throw ConfigError("factor_lift: q_" + std::to_string(k) + " does not pass in_L_omega");
    double bound = l2_of(q);
    for (const auto& n : omega.times) bound = std::max(bound, l2_of(power(op, n, q)));
    if (!std::isfinite(bound)) throw ConfigError("factor_lift: orbit of q_" + std::to_string(k) + " unbounded over the horizon");
    const double target = eps / std::ldexp(1.0, k + 1);
    const double r = bound > 0.0 ? 0.5 * target / bound : 1.0;
    z.scales.push_back(r);
    z.components.push_back(r * q);
  }
  RecurrenceReport& rep = z.lift_report;
  rep.probe = "factor_lift";
  rep.times = omega;
  rep.horizon = omega.times.back();
  rep.tolerance = sched.final_eps();
  bool ok = true;
  const std::size_t dep = std::min<std::size_t>(std::size_t(sched.max_k), omega.size());
  for (std::size_t i = 0; i < dep; ++i) {
    const double e = lift_error(op, z, omega[i]);
    double tail = 0.0;
    for (const auto& c : z.components) tail += tail_bound(op, omega[i], c);
    rep.trajectory.push_back({omega[i], e, tail});
    if (!(e <= sched.eps_at(int(i + 1)))) ok = false;
  }
  rep.tail_bound = max_tail(rep.trajectory);
  rep.verdict = ok ? Verdict::pass : Verdict::fail;
  // Pullback: ||T^n q_k - q_k|| <= ||T^n z - z||_1 / r_k at every checked time.
  std::vector<BigInt> check(omega.times.begin(), omega.times.begin() + std::ptrdiff_t(dep));
  check.insert(check.end(), pullback_times.begin(), pullback_times.end());
  z.pullback_verified = true;
  for (const auto& n : check) {
    const double e = lift_error(op, z, n);
    for (std::size_t k = 0; k < z.components.size(); ++k) {
      const double ek = return_error(op, n, fit_window(op, q_list[k]));
      if (!(ek * z.scales[k] <= e * (1.0 + 1e-12) + 1e-300)) z.pullback_verified = false;
    }
  }
  rep.data["scales"] = z.scales;
  rep.data["pullback_verified"] = z.pullback_verified;
  return z;
}

}  // namespace reclab

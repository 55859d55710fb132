#pragma once

#include "reclab/operators.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

namespace reclab {

enum class Provenance { brute_force, lcm_exact, structured_mk, user };

inline std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::brute_force: return "brute-force";
    case Provenance::lcm_exact: return "lcm-exact";
    case Provenance::structured_mk: return "structured-mk";
    case Provenance::user: return "user";
  }
  return {};
}

inline Provenance parse_provenance(const std::string& s) {
  for (auto p : {Provenance::brute_force, Provenance::lcm_exact, Provenance::structured_mk, Provenance::user})
    if (provenance_name(p) == s) return p;
  throw ConfigError("unknown provenance: " + s);
}

struct ReturnSequence {
  std::vector<BigInt> times;
  Provenance provenance = Provenance::user;

  ReturnSequence() = default;
  ReturnSequence(std::vector<BigInt> t, Provenance p) : times(std::move(t)), provenance(p) { validate(); }

  void validate() const {
    if (times.empty()) throw ConfigError("ReturnSequence: empty");
    if (times.front() < 1) throw ConfigError("ReturnSequence: times must be positive");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1])) throw ConfigError("ReturnSequence: times must be strictly increasing");
  }
  std::size_t size() const { return times.size(); }
  const BigInt& operator[](std::size_t i) const { return times[i]; }
  // Every other term, starting at `start`.
  ReturnSequence subsequence(std::size_t start, std::size_t stride) const {
    if (stride == 0) throw ConfigError("subsequence: stride must be >= 1");
    std::vector<BigInt> t;
    for (std::size_t i = start; i < times.size(); i += stride) t.push_back(times[i]);
    return {std::move(t), provenance};
  }
  ReturnSequence shifted(std::size_t drop) const {
    return {std::vector<BigInt>(times.begin() + std::ptrdiff_t(std::min(drop, times.size())), times.end()), provenance};
  }
  bool operator==(const ReturnSequence&) const = default;
};

// ---------------------------------------------------------------------------
// partitioned scan

inline constexpr std::uint64_t kScanCap = 10'000'000;
inline constexpr std::uint64_t kScanBlock = 1 << 14;

struct NearMiss {
  BigInt time;
  double error = HUGE_VAL;
  bool operator==(const NearMiss&) const = default;
};

struct ScanOutcome {
  std::vector<std::uint64_t> times;
  std::vector<double> errors;
  std::uint64_t scanned_to = 0;  // last n examined when the scan ran to completion
  bool exhausted = false;        // true when [lo, hi] was scanned fully
  std::uint64_t best_time = 0;   // minimal error over the range, or over the hits when stopped early
  double best_error = HUGE_VAL;
};

// Scans n in [lo, hi] for err(n) < eps, collecting the first `count` hits.
// Fixed-size blocks are claimed in order; the merge depends only on the data.
// err may take (n, cutoff) and return any value >= cutoff once the error is known to reach it.
template <class ErrFn>
ScanOutcome scan_range(std::uint64_t lo, std::uint64_t hi, double eps, std::size_t count, unsigned workers,
                       ErrFn&& err) {
  ScanOutcome out;
  if (hi < lo || count == 0) {
    out.exhausted = true;
    out.scanned_to = hi;
    return out;
  }
  struct Block {
    std::vector<std::uint64_t> t;
    std::vector<double> e;
    std::uint64_t best_t = 0;
    double best_e = HUGE_VAL;
    bool done = false;
  };
  const std::uint64_t nblocks = (hi - lo) / kScanBlock + 1;
  std::vector<Block> blocks(nblocks);
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::uint64_t prefix = 0;
  std::size_t prefix_hits = 0;

  auto work = [&] {
    for (;;) {
      if (stop.load(std::memory_order_relaxed)) return;
      const std::uint64_t b = next.fetch_add(1);
      if (b >= nblocks) return;
      Block& blk = blocks[b];
      const std::uint64_t a = lo + b * kScanBlock;
      const std::uint64_t z = std::min(hi, a + kScanBlock - 1);
      for (std::uint64_t n = a;; ++n) {
        double e;
        if constexpr (std::is_invocable_v<ErrFn&, std::uint64_t, double>)
          e = err(n, std::max(eps, blk.best_e));
        else
          e = err(n);
        if (e < blk.best_e) {
          blk.best_e = e;
          blk.best_t = n;
        }
        if (e < eps && blk.t.size() < count) {
          blk.t.push_back(n);
          blk.e.push_back(e);
        }
        if (n == z) break;
      }
      std::lock_guard<std::mutex> lk(mu);
      blk.done = true;
      while (prefix < nblocks && blocks[prefix].done) {
        prefix_hits += blocks[prefix].t.size();
        ++prefix;
      }
      if (prefix_hits >= count) stop = true;
    }
  };
  const unsigned w = std::max(1u, std::min<unsigned>(workers, unsigned(std::min<std::uint64_t>(nblocks, 256))));
  if (w == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < w; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (std::uint64_t b = 0; b < prefix; ++b) {
    const Block& blk = blocks[b];
    for (std::size_t i = 0; i < blk.t.size() && out.times.size() < count; ++i) {
      out.times.push_back(blk.t[i]);
      out.errors.push_back(blk.e[i]);
    }
  }
  out.exhausted = prefix == nblocks && out.times.size() < count;
  // Near misses only over a range fixed by the data: the whole range, or the reported hits.
  if (out.exhausted) {
    for (const Block& blk : blocks)
      if (blk.best_e < out.best_error) {
        out.best_error = blk.best_e;
        out.best_time = blk.best_t;
      }
  } else {
    for (std::size_t i = 0; i < out.times.size(); ++i)
      if (out.errors[i] < out.best_error) {
        out.best_error = out.errors[i];
        out.best_time = out.times[i];
      }
  }
  out.scanned_to = out.exhausted ? hi : (out.times.empty() ? lo : out.times.back());
  return out;
}

// ---------------------------------------------------------------------------
// return times of a phase list

enum class SearchRegime { lcm_multiples, lcm_period_scan, brute_force };

inline std::string regime_name(SearchRegime r) {
  switch (r) {
    case SearchRegime::lcm_multiples: return "lcm-multiples";
    case SearchRegime::lcm_period_scan: return "lcm-period-scan";
    case SearchRegime::brute_force: return "brute-force";
  }
  return {};
}

struct ReturnSearch {
  std::vector<BigInt> times;
  std::vector<double> errors;
  Provenance provenance = Provenance::brute_force;
  SearchRegime regime = SearchRegime::brute_force;
  double eps = 0.0;
  BigInt horizon;
  BigInt scanned_to;                 // times above this were not examined
  std::optional<NearMiss> near_miss;  // set when nothing was found
  std::optional<BigInt> period;       // common period when every phase is exact

  bool found() const { return !times.empty(); }
  ReturnSequence sequence() const { return {times, provenance}; }
};

inline double max_dist_to_one(const std::vector<PhaseAngle>& phases, const BigInt& n) {
  double e = 0.0;
  for (const auto& p : phases) e = std::max(e, p.dist_to_one(n));
  return e;
}

inline double max_dist_to_one_u64(const std::vector<PhaseAngle>& phases, std::uint64_t n) {
  double e = 0.0;
  for (const auto& p : phases) e = std::max(e, p.dist_to_one_u64(n));
  return e;
}

inline BigInt phase_period(const std::vector<PhaseAngle>& phases) {
  BigInt L = 1;
  for (const auto& p : phases) L = lcm_big(L, p.den());
  return L;
}

inline bool all_exact(const std::vector<PhaseAngle>& phases) {
  return std::all_of(phases.begin(), phases.end(), [](const PhaseAngle& p) { return p.is_exact(); });
}

inline ReturnSearch find_return_times(const std::vector<PhaseAngle>& phases, double eps, const BigInt& horizon,
                                      std::size_t count, unsigned workers = 1) {
  if (phases.empty()) throw ConfigError("find_return_times: no phases");
  if (!(eps > 0.0)) throw ConfigError("find_return_times: eps must be > 0");
  if (horizon < 1) throw ConfigError("find_return_times: horizon must be >= 1");
  if (count == 0) throw ConfigError("find_return_times: count must be >= 1");
  ReturnSearch r;
  r.eps = eps;
  r.horizon = horizon;
  auto finish_scan = [&](const ScanOutcome& s) {
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      r.times.emplace_back(s.times[i]);
      r.errors.push_back(s.errors[i]);
    }
    r.scanned_to = s.scanned_to;
    if (r.times.empty()) r.near_miss = NearMiss{BigInt(s.best_time), s.best_error};
  };

  if (all_exact(phases)) {
    const BigInt L = phase_period(phases);
    r.period = L;
    r.provenance = Provenance::lcm_exact;
    BigInt qmax = 1;
    for (const auto& p : phases) qmax = std::max(qmax, p.den());
    // Below the smallest nonzero chord only exact returns qualify: the multiples of L.
    const double min_chord = qmax == 1 ? HUGE_VAL : chord_turns(ratio_to_double(BigInt(1), qmax));
    if (eps <= min_chord || L == 1) {
      r.regime = SearchRegime::lcm_multiples;
      for (BigInt t = L; t <= horizon && r.times.size() < count; t += L) {
        r.times.push_back(t);
        r.errors.push_back(0.0);
      }
      r.scanned_to = horizon;
      if (r.times.empty()) {
        // horizon < L: scan what is below it for the near miss
        const auto h = fits_i63(horizon) ? std::min<std::uint64_t>(std::uint64_t(horizon), kScanCap) : kScanCap;
        const auto s = scan_range(1, h, eps, 1, workers, [&](std::uint64_t n) { return max_dist_to_one_u64(phases, n); });
        r.near_miss = NearMiss{BigInt(s.best_time), s.best_error};
        r.scanned_to = h;
      }
      return r;
    }
    if (L <= kScanCap) {
      r.regime = SearchRegime::lcm_period_scan;
      const auto L64 = static_cast<std::uint64_t>(L);
      const std::uint64_t h = horizon < L ? static_cast<std::uint64_t>(horizon) : L64;
      const auto s = scan_range(1, h, eps, count, workers, [&](std::uint64_t n) { return max_dist_to_one_u64(phases, n); });
      finish_scan(s);
      if (s.times.size() >= count || h < L64) return r;
      // one full period is known; later returns repeat it with identical errors
      r.near_miss.reset();
      for (BigInt base = L; r.times.size() < count; base += L) {
        bool any = false;
        for (std::size_t i = 0; i < s.times.size() && r.times.size() < count; ++i) {
          const BigInt t = base + s.times[i];
          if (t > horizon) break;
          r.times.push_back(t);
          r.errors.push_back(s.errors[i]);
          any = true;
        }
        if (!any) break;
      }
      r.scanned_to = horizon;
      return r;
    }
  }

  r.regime = SearchRegime::brute_force;
  r.provenance = Provenance::brute_force;
  const std::uint64_t h = fits_i63(horizon) ? std::min<std::uint64_t>(std::uint64_t(horizon), kScanCap) : kScanCap;
  finish_scan(scan_range(1, h, eps, count, workers, [&](std::uint64_t n) { return max_dist_to_one_u64(phases, n); }));
  return r;
}

// Re-evaluates each time with exact phase arithmetic.
inline bool verify_return_times(const std::vector<PhaseAngle>& phases, const ReturnSearch& r) {
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    const double e = max_dist_to_one(phases, r.times[i]);
    if (!(e < r.eps) || e != r.errors[i]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// targeting

enum class TargetVerdict { found, near_miss, infeasible };

inline std::string target_verdict_name(TargetVerdict v) {
  switch (v) {
    case TargetVerdict::found: return "found";
    case TargetVerdict::near_miss: return "near-miss";
    case TargetVerdict::infeasible: return "certified-infeasible";
  }
  return {};
}

struct TargetResult {
  TargetVerdict verdict = TargetVerdict::near_miss;
  BigInt time;         // hit or best near miss
  double error = HUGE_VAL;
  std::optional<BigInt> period;  // all hits are time + j * period when every phase is exact
  std::string certificate;       // why the target is infeasible
};

// Distance from z to the nearest q-th root of unity.
inline double subgroup_distance(const BigInt& q, cplx z) {
  const double turns = std::arg(z) / (2.0 * kPi);
  const double qd = to_double(q);
  if (qd > 1e15) return 0.0;  // too fine to separate in double precision
  double best = HUGE_VAL;
  const double s0 = std::floor(turns * qd);
  for (double s : {s0 - 1.0, s0, s0 + 1.0, s0 + 2.0}) best = std::min(best, std::abs(std::polar(1.0, 2.0 * kPi * s / qd) - z));
  return best;
}

inline TargetResult simultaneous_target(const std::vector<PhaseAngle>& phases, const std::vector<cplx>& targets,
                                        double eps, const BigInt& horizon, unsigned workers = 1) {
  if (phases.empty()) throw ConfigError("simultaneous_target: no phases");
  if (phases.size() != targets.size()) throw ConfigError("simultaneous_target: phases and targets differ in length");
  if (!(eps > 0.0)) throw ConfigError("simultaneous_target: eps must be > 0");
  if (horizon < 1) throw ConfigError("simultaneous_target: horizon must be >= 1");
  for (auto z : targets)
    if (std::abs(std::abs(z) - 1.0) > 1e-12) throw ConfigError("simultaneous_target: targets must be unimodular");
  TargetResult res;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (!phases[i].is_exact()) continue;
    const double d = subgroup_distance(phases[i].den(), targets[i]);
    if (d >= eps) {
      res.verdict = TargetVerdict::infeasible;
      res.error = d;
      res.certificate = "target " + std::to_string(i) + " lies at distance " + std::to_string(d) +
                        " from the subgroup of " + phases[i].den().str() + "-th roots of unity";
      return res;
    }
  }
  auto err = [&](std::uint64_t n) {
    double e = 0.0;
    for (std::size_t i = 0; i < phases.size(); ++i)
      e = std::max(e, targets[i] == cplx{1.0, 0.0} ? phases[i].dist_to_one_u64(n)
                                                    : std::abs(cis_turns(phases[i].power_turns_u64(n)) - targets[i]));
    return e;
  };
  std::uint64_t h = fits_i63(horizon) ? std::min<std::uint64_t>(std::uint64_t(horizon), kScanCap) : kScanCap;
  bool whole_period = false;
  if (all_exact(phases)) {
    const BigInt L = phase_period(phases);
    res.period = L;
    if (L <= BigInt(h)) {
      h = static_cast<std::uint64_t>(L);
      whole_period = true;
    }
  }
  const auto s = scan_range(1, h, eps, 1, workers, err);
  if (!s.times.empty()) {
    res.verdict = TargetVerdict::found;
    res.time = s.times[0];
    res.error = s.errors[0];
    return res;
  }
  res.time = s.best_time;
  res.error = s.best_error;
  if (whole_period) {
    res.verdict = TargetVerdict::infeasible;
    res.certificate = "no time within one full common period " + res.period->str() + " meets the targets";
  }
  return res;
}

// ---------------------------------------------------------------------------
// integer relations

struct RelationCertificate {
  std::vector<BigInt> coefficients;
  BigInt integer_value;  // sum n_i p_i / q_i, exactly
  bool exact_zero = true;
  double residual = 0.0;
};

struct RelationCandidate {
  std::vector<std::int64_t> coefficients;
  double residual = 0.0;  // distance of sum n_i t_i to the nearest integer
};

inline constexpr std::uint64_t kRelationBoxCap = 50'000'000;

namespace detail {

inline std::uint64_t box_size(std::size_t k, std::int64_t bound) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < k; ++i) {
    total *= std::uint64_t(2 * bound + 1);
    if (total > kRelationBoxCap) return kRelationBoxCap + 1;
  }
  return total;
}

// Calls f(v) for every v in [-B, B]^k, last coordinate fastest.
template <class F>
void for_each_in_box(std::size_t k, std::int64_t bound, F&& f) {
  std::vector<std::int64_t> v(k, -bound);
  if (k == 0) {
    f(v);
    return;
  }
  for (;;) {
    f(v);
    std::size_t i = k;
    while (i > 0) {
      --i;
      if (v[i] < bound) {
        ++v[i];
        break;
      }
      v[i] = -bound;
      if (i == 0) return;
    }
  }
}

inline bool canonical_sign(const std::vector<std::int64_t>& v) {
  for (auto c : v)
    if (c != 0) return c > 0;
  return false;
}

}  // namespace detail

// All n in [-B, B]^k, n != 0, first nonzero entry positive, with sum n_i p_i / q_i an integer.
// Sorted by max |n_i|, then sum |n_i|, then lexicographically.
inline std::vector<RelationCertificate> log_rational_relations(const std::vector<PhaseAngle>& phases,
                                                               std::int64_t coeff_bound) {
  if (phases.empty()) throw ConfigError("log_rational_relations: no phases");
  if (coeff_bound < 1) throw ConfigError("log_rational_relations: coeff_bound must be >= 1");
  for (const auto& p : phases)
    if (!p.is_exact())
      throw ConfigError("log_rational_relations: approximate phase " + p.to_string() +
                        " refused; exact mode certifies rational phases only (use the heuristic mode for residuals)");
  const std::size_t k = phases.size();
  if (detail::box_size(k - 1, coeff_bound) > kRelationBoxCap)
    throw ConfigError("log_rational_relations: coefficient box too large");
  const BigInt L = phase_period(phases);
  std::vector<BigInt> a;
  for (const auto& p : phases) a.push_back(p.num() * (L / p.den()));
  // n_k a_k = -s (mod L) has solutions iff g | s, then n_k = c0 (mod L/g).
  const BigInt g = boost::multiprecision::gcd(a[k - 1], L);
  const BigInt Lg = L / g;
  BigInt inv = 0;
  if (Lg > 1) {
    // inverse of a_k/g modulo L/g via extended Euclid
    BigInt r0 = Lg, r1 = (a[k - 1] / g) % Lg, t0 = 0, t1 = 1;
    while (r1 != 0) {
      const BigInt qq = r0 / r1;
      std::tie(r0, r1) = std::make_pair(r1, BigInt(r0 - qq * r1));
      std::tie(t0, t1) = std::make_pair(t1, BigInt(t0 - qq * t1));
    }
    inv = ((t0 % Lg) + Lg) % Lg;
  }
  std::vector<std::vector<std::int64_t>> found;
  detail::for_each_in_box(k - 1, coeff_bound, [&](const std::vector<std::int64_t>& head) {
    BigInt s = 0;
    for (std::size_t i = 0; i + 1 < k; ++i) s += head[i] * a[i];
    BigInt rem = (-s) % L;
    if (rem < 0) rem += L;
    if (rem % g != 0) return;
    BigInt c0 = Lg > 1 ? BigInt(((rem / g) * inv) % Lg) : BigInt(0);
    // all n_k = c0 + j Lg within [-B, B]
    const BigInt lo = c0 - Lg * ((c0 + coeff_bound) / Lg);
    for (BigInt nk = lo; nk <= coeff_bound; nk += Lg) {
      std::vector<std::int64_t> v = head;
      v.push_back(static_cast<std::int64_t>(nk));
      if (detail::canonical_sign(v)) found.push_back(std::move(v));
    }
  });
  auto key = [](const std::vector<std::int64_t>& v) {
    std::int64_t mx = 0, l1 = 0;
    for (auto c : v) {
      mx = std::max<std::int64_t>(mx, std::abs(c));
      l1 += std::abs(c);
    }
    return std::make_tuple(mx, l1, v);
  };
  std::sort(found.begin(), found.end(), [&](const auto& x, const auto& y) { return key(x) < key(y); });
  std::vector<RelationCertificate> out;
  for (const auto& v : found) {
    RelationCertificate c;
    BigInt num = 0;
    for (std::size_t i = 0; i < k; ++i) {
      c.coefficients.emplace_back(v[i]);
      num += v[i] * a[i];
    }
    if (num % L != 0) throw std::logic_error("log_rational_relations: relation failed exact check");
    c.integer_value = num / L;
    out.push_back(std::move(c));
  }
  return out;
}

// Exact check: sum n_i p_i / q_i is an integer.
inline bool relation_holds(const std::vector<PhaseAngle>& phases, const std::vector<BigInt>& n) {
  if (phases.size() != n.size()) return false;
  const BigInt L = phase_period(phases);
  BigInt s = 0;
  for (std::size_t i = 0; i < n.size(); ++i) s += n[i] * phases[i].num() * (L / phases[i].den());
  return s % L == 0;
}

// Heuristic mode for any phases: the `keep` smallest residuals over the box. Never a certificate.
inline std::vector<RelationCandidate> relation_residuals(const std::vector<PhaseAngle>& phases, std::int64_t coeff_bound,
                                                         std::size_t keep) {
  if (phases.empty()) throw ConfigError("relation_residuals: no phases");
  if (coeff_bound < 1) throw ConfigError("relation_residuals: coeff_bound must be >= 1");
  if (detail::box_size(phases.size(), coeff_bound) > kRelationBoxCap)
    throw ConfigError("relation_residuals: coefficient box too large");
  std::vector<RelationCandidate> all;
  detail::for_each_in_box(phases.size(), coeff_bound, [&](const std::vector<std::int64_t>& v) {
    if (!detail::canonical_sign(v)) return;
    long double s = 0.0L;
    for (std::size_t i = 0; i < v.size(); ++i) s += static_cast<long double>(v[i]) * phases[i].turns();
    const double res = double(std::abs(s - std::round(s)));
    all.push_back({v, res});
    if (all.size() > 4 * keep + 1024) {
      std::nth_element(all.begin(), all.begin() + std::ptrdiff_t(keep), all.end(),
                       [](const auto& x, const auto& y) { return std::tie(x.residual, x.coefficients) < std::tie(y.residual, y.coefficients); });
      all.resize(keep);
    }
  });
  std::sort(all.begin(), all.end(),
            [](const auto& x, const auto& y) { return std::tie(x.residual, x.coefficients) < std::tie(y.residual, y.coefficients); });
  if (all.size() > keep) all.resize(keep);
  return all;
}

// ---------------------------------------------------------------------------
// structured times

inline ReturnSequence structured_mk_times(const MSequence& m, const BigInt& multiplier) {
  if (multiplier < 1) throw ConfigError("structured_mk_times: multiplier must be >= 1");
  std::vector<BigInt> t;
  for (const auto& v : m.m) t.push_back(multiplier * v);
  return {std::move(t), Provenance::structured_mk};
}

}  // namespace reclab

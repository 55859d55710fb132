#pragma once

#include "reclab/space.hpp"

#include <bit>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <tuple>
#include <variant>

namespace reclab {

// ---------------------------------------------------------------------------
// m-sequences

struct MSchedule {
  enum class Kind { triangular, geometric, constant, factorial, list };
  Kind kind = Kind::triangular;
  BigInt base = 2;
  std::vector<BigInt> values;

  static MSchedule parse(const std::string& s) {
    MSchedule out;
    auto colon = s.find(':');
    std::string head = s.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
    if (head == "triangular") out.kind = Kind::triangular;
    else if (head == "factorial") out.kind = Kind::factorial;
    else if (head == "geometric" || head == "constant") {
      out.kind = head == "geometric" ? Kind::geometric : Kind::constant;
      out.base = parse_bigint(arg);
    } else if (head == "list") {
      out.kind = Kind::list;
      std::size_t pos = 0;
      while (pos <= arg.size()) {
        auto comma = arg.find(',', pos);
        out.values.push_back(parse_bigint(arg.substr(pos, comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    } else {
      throw ConfigError("unknown m-schedule: " + s);
    }
    return out;
  }

  std::string str() const {
    switch (kind) {
      case Kind::triangular: return "triangular";
      case Kind::factorial: return "factorial";
      case Kind::geometric: return "geometric:" + base.str();
      case Kind::constant: return "constant:" + base.str();
      case Kind::list: {
        std::string s = "list:";
        for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + values[i].str();
        return s;
      }
    }
    return {};
  }

  // j-th term, j = 1, 2, ...
  BigInt term(int j) const {
    switch (kind) {
      case Kind::triangular: return pow2(unsigned(j) * unsigned(j + 1) / 2);
      case Kind::geometric: return boost::multiprecision::pow(base, unsigned(j));
      case Kind::constant: return base;
      case Kind::factorial: {
        BigInt f = 1;
        for (int i = 2; i <= j + 1; ++i) f *= i;
        return f;
      }
      case Kind::list:
        if (j < 1 || std::size_t(j) > values.size()) throw ConfigError("m-schedule list too short");
        return values[std::size_t(j - 1)];
    }
    return 1;
  }
};

// m_k for k = first, first+1, ...; m_{first-1} is taken to be 1.
struct MSequence {
  std::vector<BigInt> m;
  int first = 1;

  int last_index() const { return first + int(m.size()) - 1; }
  bool has(int k) const { return k >= first - 1 && k <= last_index(); }
  BigInt at(int k) const {
    if (k == first - 1) return 1;
    if (k < first || k > last_index()) throw ConfigError("MSequence: index " + std::to_string(k) + " out of range");
    return m[std::size_t(k - first)];
  }
  bool operator==(const MSequence& o) const { return m == o.m && first == o.first; }
};

struct MCertificate {
  bool assessable = false;
  bool separation_certified = false;   // sum m_{k-2}/m_{k-1} < inf
  bool tail_product_certified = false; // m_j sum_{k>j} 1/m_k -> 0
  double separation_partial_sum = 0.0;
  std::vector<double> tail_products;
  double worst_ratio_decay = 0.0;
};

struct MBuild {
  MSequence seq;
  MCertificate cert;
};

inline void check_m_chain(const MSequence& s) {
  for (std::size_t i = 0; i < s.m.size(); ++i) {
    if (s.m[i] <= 0) throw ConfigError("m-sequence: terms must be positive");
    if (i == 0) continue;
    if (!(s.m[i] > s.m[i - 1]))
      throw ConfigError("m-sequence rejected: not strictly increasing at index " + std::to_string(s.first + int(i)));
    if (s.m[i] % s.m[i - 1] != 0)
      throw ConfigError("m-sequence rejected: m_" + std::to_string(s.first + int(i) - 1) + " does not divide m_" +
                        std::to_string(s.first + int(i)));
  }
}

// Both summability conditions reduce to u_j = m_j / m_{j+1} decaying geometrically;
// the prefix certifies them when the second half of the u-ratios stays below 3/4.
inline MCertificate certify_m_sequence(const MSequence& s) {
  MCertificate c;
  const std::size_t n = s.m.size();
  std::vector<double> u;
  for (std::size_t i = 0; i + 1 < n; ++i) u.push_back(ratio_to_double(s.m[i], s.m[i + 1]));
  for (double v : u) c.separation_partial_sum += v;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    double acc = 0.0;
    for (std::size_t k = j + 1; k < n; ++k) acc += ratio_to_double(s.m[j], s.m[k]);
    c.tail_products.push_back(acc);
  }
  if (u.size() < 3) return c;
  c.assessable = true;
  double worst = 0.0;
  for (std::size_t i = u.size() / 2; i + 1 < u.size(); ++i)
    worst = std::max(worst, u[i] > 0 ? u[i + 1] / u[i] : 0.0);
  c.worst_ratio_decay = worst;
  c.separation_certified = worst <= 0.75;
  c.tail_product_certified = worst <= 0.75 && c.tail_products.back() < c.tail_products.front();
  return c;
}

inline MBuild build_m_sequence(int count, const MSchedule& schedule, int first = 1) {
  if (count < 2) throw ConfigError("build_m_sequence: count must be >= 2");
  MBuild b;
  b.seq.first = first;
  for (int j = 1; j <= count; ++j) b.seq.m.push_back(schedule.term(j));
  check_m_chain(b.seq);
  b.cert = certify_m_sequence(b.seq);
  if (b.cert.assessable && !(b.cert.separation_certified && b.cert.tail_product_certified)) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "m-sequence rejected: schedule too slow (partial sum %.6g, ratio decay %.6g, last tail product %.6g)",
                  b.cert.separation_partial_sum, b.cert.worst_ratio_decay, b.cert.tail_products.back());
    throw ConfigError(buf);
  }
  return b;
}

// ---------------------------------------------------------------------------
// g-sequences

using Direction = std::vector<cplx>;

struct GSequence {
  enum class Order { plain, revisit };
  int d = 1;
  std::vector<Direction> directions;
  std::vector<double> scales;
  Order order = Order::revisit;
  std::uint64_t seed = 0;

  // Revisit order walks 1; 1,2; 1,2,3; ... so every direction recurs infinitely often.
  static std::size_t revisit_base(std::size_t j) {
    std::size_t t = 1;
    while (t * (t + 1) / 2 <= j) ++t;
    return j - t * (t - 1) / 2;
  }
  std::size_t base_index(std::size_t j) const { return order == Order::plain ? j : revisit_base(j); }
  bool has(std::size_t j) const { return base_index(j) < directions.size(); }
  double scale(std::size_t j) const { return j < scales.size() ? scales[j] : 1.0; }
  double max_scale() const {
    double m = 1.0;
    for (double s : scales) m = std::max(m, s);
    return m;
  }
  const Direction& direction(std::size_t j) const {
    if (!has(j)) throw ConfigError("GSequence: functional " + std::to_string(j) + " beyond enumeration");
    return directions[base_index(j)];
  }
  // Bilinear pairing g_j(v) = scale_j * sum_i dir_i v_i.
  cplx eval(std::size_t j, const std::vector<cplx>& v) const {
    const Direction& dir = direction(j);
    cplx acc{};
    for (std::size_t i = 0; i < dir.size() && i < v.size(); ++i) acc += dir[i] * v[i];
    return scale(j) * acc;
  }
  // Functional indices j < limit sharing base direction b.
  std::vector<std::size_t> visits(std::size_t b, std::size_t limit) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < limit; ++j)
      if (base_index(j) == b) out.push_back(j);
    return out;
  }
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct GridKey {
  std::vector<std::pair<int, int>> mod2;   // reduced |v_i|^2
  std::vector<std::pair<int, int>> phase;  // reduced arg(v_i) in turns
  bool operator<(const GridKey& o) const { return std::tie(mod2, phase) < std::tie(o.mod2, o.phase); }
};

inline std::pair<int, int> reduced(int a, int b) {
  if (a == 0) return {0, 1};
  int g = std::gcd(a, b);
  return {a / g, b / g};
}

inline void compositions(int total, int parts, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int a = total; a >= 0; --a) {
    cur.push_back(a);
    compositions(total - a, parts - 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace detail

// Directions sqrt(a_i / L) e^{2 pi i b_i / L} for growing grid level L; the union over L is
// dense in the unit sphere of C^d. Level 1 (the basis) is kept in coordinate order; the seed
// permutes each later level.
inline GSequence build_g_sequence(int d, int count, std::uint64_t seed, GSequence::Order order = GSequence::Order::revisit) {
  if (d < 1 || count < 1) throw ConfigError("build_g_sequence: d and count must be >= 1");
  GSequence g;
  g.d = d;
  g.seed = seed;
  g.order = order;
  std::set<detail::GridKey> seen;
  for (int L = 1; int(g.directions.size()) < count; ++L) {
    std::vector<std::vector<int>> comps;
    std::vector<int> cur;
    detail::compositions(L, d, cur, comps);
    std::vector<std::pair<detail::GridKey, Direction>> level;
    for (const auto& a : comps) {
      std::vector<int> nz;
      for (int i = 0; i < d; ++i)
        if (a[std::size_t(i)] > 0) nz.push_back(i);
      std::size_t combos = 1;
      for (std::size_t i = 0; i < nz.size(); ++i) combos *= std::size_t(L);
      for (std::size_t c = 0; c < combos; ++c) {
        detail::GridKey key;
        Direction v(static_cast<std::size_t>(d));
        std::size_t rest = c;
        std::vector<int> b(std::size_t(d), 0);
        for (int i : nz) {
          b[std::size_t(i)] = int(rest % std::size_t(L));
          rest /= std::size_t(L);
        }
        for (int i = 0; i < d; ++i) {
          const int ai = a[std::size_t(i)];
          key.mod2.push_back(detail::reduced(ai, L));
          key.phase.push_back(ai == 0 ? std::pair{0, 1} : detail::reduced(b[std::size_t(i)], L));
          if (ai > 0) v[std::size_t(i)] = std::sqrt(double(ai) / L) * cis_turns(centered_small(std::uint64_t(b[std::size_t(i)]), std::uint64_t(L)));
        }
        if (seen.insert(key).second) level.emplace_back(std::move(key), std::move(v));
      }
    }
    if (L > 1) {
      std::uint64_t state = detail::mix64(seed ^ (std::uint64_t(L) << 32) ^ std::uint64_t(d));
      for (std::size_t i = level.size(); i > 1; --i) {
        state = detail::mix64(state);
        std::swap(level[i - 1], level[state % i]);
      }
    }
    for (auto& kv : level) {
      if (int(g.directions.size()) >= count) break;
      g.directions.push_back(std::move(kv.second));
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// geometric-sum tables for the diagonal-plus-perturbation families

namespace detail {

struct GeoEntry {
  PhaseAngle lambda;
  cplx lam{1.0, 0.0};
  bool trivial = false;  // lambda == 1
  bool small = false;    // q < 2^62, p < 2^62
  std::uint64_t p64 = 0, q64 = 0;
  bool p_fits = false;
  std::size_t q_bits = 0;
  long double two_q_mant = 1.0L;
  int two_q_exp = 0;
  double inv_m_prev = 0.0;  // 1/m_{k-1}
  double scale = 0.0;       // 1/(sin(pi p/q) m_{k-1})
  double inv_sin = 0.0;     // 1/sin(pi p/q)
};

inline double sinc_pi(double x) {
  const double y = kPi * x;
  if (std::abs(y) < 1e-4) return 1.0 - y * y / 6.0 + y * y * y * y / 120.0;
  return std::sin(y) / y;
}

inline GeoEntry make_geo(const PhaseAngle& lam, const BigInt& m_prev) {
  if (!lam.is_exact()) throw ConfigError("geometric table needs exact phases");
  GeoEntry e;
  e.lambda = lam;
  e.lam = lam.value();
  e.inv_m_prev = ratio_to_double(BigInt(1), m_prev);
  const BigInt& p = lam.num();
  const BigInt& q = lam.den();
  if (p == 0) {
    e.trivial = true;
    return e;
  }
  e.small = p < pow2(62) && q < pow2(62);
  if (e.small) {
    e.p64 = static_cast<std::uint64_t>(p);
    e.q64 = static_cast<std::uint64_t>(q);
  }
  e.p_fits = fits_i63(p);
  if (e.p_fits) e.p64 = static_cast<std::uint64_t>(p);
  e.q_bits = bit_length(q);
  const BigInt two_q = 2 * q;
  const long sh = long(bit_length(two_q)) - 64;
  const BigInt top = sh > 0 ? BigInt(two_q >> sh) : BigInt(two_q << -sh);
  e.two_q_mant = static_cast<long double>(static_cast<std::uint64_t>(top));
  e.two_q_exp = int(sh);
  const BigInt u = std::min(p, BigInt(q - p));
  const double theta = ratio_to_double(u, q);
  const double sc = kPi * sinc_pi(theta);
  e.inv_sin = ratio_to_double(q, u) / sc;
  e.scale = ratio_to_double(q, u * m_prev) / sc;
  return e;
}

// (lambda^n, (sum_{j<n} lambda^j) * scale).
inline std::pair<cplx, cplx> geo_eval(const GeoEntry& e, const BigInt& n, bool n_fits, std::uint64_t n64) {
  using u128 = unsigned __int128;
  if (e.trivial) return {cplx{1.0, 0.0}, cplx{to_double(n) * e.inv_m_prev, 0.0}};
  auto finish = [&](double lam_t, long double c1, double c2) {
    // Tiny angles: fold the scale in before c1 can underflow a double.
    const double s = std::fabs(c1) < 1e-6L
                         ? double(2.0L * kPiL * c1 * static_cast<long double>(e.scale)) * sinc_pi(2.0 * double(c1))
                         : std::sin(2.0 * kPi * double(c1)) * e.scale;
    return std::pair<cplx, cplx>{cis_turns(lam_t), cis_turns(c2) * s};
  };
  if (n_fits && e.small) {
    const std::uint64_t q = e.q64, r = n64 % q;
    if (r == 0) return {cplx{1.0, 0.0}, cplx{}};
    const u128 rp = u128(r) * e.p64;
    const auto A = std::uint64_t(rp % q);
    const auto B = std::uint64_t(rp % (2 * u128(q)));
    const auto C = std::uint64_t((u128(r - 1) * e.p64) % (2 * u128(q)));
    return finish(centered_small(A, q), centered_small(B, 2 * q), centered_small(C, 2 * q));
  }
  if (n_fits && e.p_fits && std::size_t(std::bit_width(n64) + std::bit_width(e.p64)) < e.q_bits) {
    // r p < q: no reduction needed, ratios taken against 2q = mant * 2^exp.
    if (n64 == 0) return {cplx{1.0, 0.0}, cplx{}};
    const u128 rp = u128(n64) * e.p64;
    const u128 rp1 = u128(n64 - 1) * e.p64;
    const long double c1 = std::ldexp(static_cast<long double>(rp) / e.two_q_mant, -e.two_q_exp);
    const long double c2 = std::ldexp(static_cast<long double>(rp1) / e.two_q_mant, -e.two_q_exp);
    long double t = 2.0L * c1;
    if (t > 0.5L) t -= 1.0L;
    return finish(double(t), c1, double(c2));
  }
  const BigInt& q = e.lambda.den();
  const BigInt& p = e.lambda.num();
  BigInt r = n % q;
  if (r < 0) r += q;
  if (r == 0) return {cplx{1.0, 0.0}, cplx{}};
  const BigInt two_q = 2 * q;
  const BigInt B = (r * p) % two_q;
  const BigInt A = B % q;
  const BigInt C = ((r - 1) * p) % two_q;
  return finish(centered_big(A, q), centered_big_ld(B, two_q), centered_big(C, two_q));
}

struct GeoTable {
  std::vector<GeoEntry> entries;  // entries[i] belongs to basis index first_index + i
  std::int64_t first_index = 0;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// operator families

struct DiagonalUnitary {
  std::int64_t offset = 1;
  std::vector<PhaseAngle> phases;
};

// T x = S x + sum_{k > d} (1/m_{k-1}) g_k(P x) e_k on indices 1..d+K, lambda_k = exp(i pi / m_k).
struct AugeTapia {
  int d = 2;
  int K = 32;
  MSequence m;
  GSequence g;
  std::shared_ptr<const detail::GeoTable> table;  // indices d+1 .. d+K+tail
};

// Indices -D..-1 form E; T x = x on E, lambda_k x_k + <omega_k, P x>/m_{k-1} on k = 0..K-1.
struct QRNH {
  int D = 16;
  int K = 16;
  MSequence m;  // first == 0
  std::vector<Direction> omegas;
  std::shared_ptr<const detail::GeoTable> table;  // indices 0 .. K-1+tail
};

struct MultiplicationAtomic {
  std::vector<double> weights;
  std::vector<PhaseAngle> phases;
  std::vector<double> moduli;
  double p = 2.0;
};

enum class FunctionModel { entire, punctured, disc, hardy2, weighted };

inline std::string model_name(FunctionModel m) {
  switch (m) {
    case FunctionModel::entire: return "H(C)";
    case FunctionModel::punctured: return "H(C*)";
    case FunctionModel::disc: return "H(D)";
    case FunctionModel::hardy2: return "H2(D)";
    case FunctionModel::weighted: return "Ep(beta)";
  }
  return {};
}

inline FunctionModel parse_model(const std::string& s) {
  for (auto m : {FunctionModel::entire, FunctionModel::punctured, FunctionModel::disc, FunctionModel::hardy2,
                 FunctionModel::weighted})
    if (model_name(m) == s) return m;
  throw ConfigError("unknown function model: " + s);
}

// C_phi f = f o phi with phi(z) = a z + b on a coefficient window.
struct AffineComposition {
  std::optional<PhaseAngle> a_phase;  // set when a is unimodular and given as a phase
  cplx a{1.0, 0.0};
  cplx b{};
  FunctionModel model = FunctionModel::entire;
  std::int64_t offset = 0;
  std::size_t size = 8;
  std::vector<double> beta;  // weights for E^p(beta)
  double p = 2.0;
  int degree_cap = 64;
};

// C_{s+it} on Dirichlet coefficients a_1..a_N.
struct DirichletComposition {
  double t = 0.0;
  int N = 8;
};

// Diagonal operator with e_l of prime period m_l, scaled by s_l.
struct PeriodicCascade {
  std::vector<std::int64_t> periods;
  std::vector<double> scales;
};

using OperatorSpec = std::variant<DiagonalUnitary, AugeTapia, QRNH, MultiplicationAtomic, AffineComposition,
                                  DirichletComposition, PeriodicCascade>;

inline std::string family_name(const OperatorSpec& op) {
  static const char* names[] = {"diagonal-unitary", "auge-tapia", "qrnh", "multiplication-atomic",
                                "affine-composition", "dirichlet-composition", "periodic-cascade"};
  return names[op.index()];
}

inline constexpr int kTailExtra = 64;

inline std::shared_ptr<const detail::GeoTable> build_geo_table(const MSequence& m, int first_k, int count,
                                                              BigInt (*den_of)(const BigInt&)) {
  auto t = std::make_shared<detail::GeoTable>();
  t->first_index = first_k;
  for (int k = first_k; k < first_k + count && m.has(k) && m.has(k - 1); ++k)
    t->entries.push_back(detail::make_geo(PhaseAngle::exact(1, den_of(m.at(k))), m.at(k - 1)));
  return t;
}

inline AugeTapia make_auge_tapia(int d, int K, const MSequence& m, GSequence g) {
  if (d < 1 || K < 1) throw ConfigError("AugeTapia: d and K must be >= 1");
  if (m.first != 1) throw ConfigError("AugeTapia: m-sequence must start at index 1");
  if (!m.has(d + K)) throw ConfigError("AugeTapia: m-sequence shorter than d + K");
  if (g.d != d) throw ConfigError("AugeTapia: g-sequence dimension differs from d");
  if (!g.has(std::size_t(K - 1))) throw ConfigError("AugeTapia: g-sequence shorter than K");
  check_m_chain(m);
  AugeTapia op{d, K, m, std::move(g), nullptr};
  op.table = build_geo_table(m, d + 1, K + kTailExtra, [](const BigInt& mk) { return BigInt(2 * mk); });
  return op;
}

inline std::size_t revisit_count_for(std::size_t functionals) {
  std::size_t t = 1;
  while (t * (t + 1) / 2 < functionals) ++t;
  return t;
}

inline AugeTapia make_auge_tapia(int d, int K, const MSchedule& sched = {}, std::uint64_t seed = 0) {
  const int total = d + K + kTailExtra;
  MSequence m;
  m.first = 1;
  for (int j = 1; j <= total; ++j) m.m.push_back(sched.term(j));
  const auto need = revisit_count_for(std::size_t(K + kTailExtra));
  return make_auge_tapia(d, K, m, build_g_sequence(d, int(need), seed));
}

// Even slots sweep e_{-1}, e_{-2}, ...; odd slots revisit the grid enumeration of the unit
// sphere of E, which starts at e_{-D}, e_{-D+1}, ...
inline std::vector<Direction> build_qrnh_omegas(int D, int count, std::uint64_t seed) {
  const int odd = (count + 1) / 2;
  GSequence grid = build_g_sequence(D, int(revisit_count_for(std::size_t(odd))), seed);
  std::vector<Direction> out;
  for (int k = 0; k < count; ++k) {
    if (k % 2 == 0) {
      Direction v(static_cast<std::size_t>(D));
      v[std::size_t(D - 1 - (k / 2) % D)] = 1.0;  // position j holds e_{-D+j}
      out.push_back(std::move(v));
    } else {
      out.push_back(grid.direction(std::size_t(k / 2)));
    }
  }
  return out;
}

inline QRNH make_qrnh(int D, int K, const MSequence& m, std::vector<Direction> omegas) {
  if (D < 1 || K < 1) throw ConfigError("QRNH: D and K must be >= 1");
  if (m.first != 0) throw ConfigError("QRNH: m-sequence must start at index 0");
  if (!m.has(K - 1)) throw ConfigError("QRNH: m-sequence shorter than K");
  if (omegas.size() < std::size_t(K)) throw ConfigError("QRNH: fewer omega directions than K");
  if (m.at(0) < 2) throw ConfigError("QRNH: m_0 must be >= 2");
  for (auto& w : omegas) {
    if (w.size() != std::size_t(D)) throw ConfigError("QRNH: omega direction outside E window");
    double nn = 0.0;
    for (auto z : w) nn += std::norm(z);
    if (std::abs(std::sqrt(nn) - 1.0) > 1e-12) throw ConfigError("QRNH: omega directions must be unit vectors");
  }
  check_m_chain(m);
  QRNH op{D, K, m, std::move(omegas), nullptr};
  op.table = build_geo_table(m, 0, K + kTailExtra, [](const BigInt& mk) { return mk; });
  return op;
}

inline QRNH make_qrnh(int D, int K, std::uint64_t seed = 0) {
  MSequence m;
  m.first = 0;
  for (int j = 1; j <= K + kTailExtra; ++j) m.m.push_back(MSchedule{}.term(j));
  return make_qrnh(D, K, m, build_qrnh_omegas(D, K + kTailExtra, seed));
}

inline DiagonalUnitary make_diagonal(std::vector<PhaseAngle> phases, std::int64_t offset = 1) {
  if (phases.empty()) throw ConfigError("DiagonalUnitary: needs at least one phase");
  return {offset, std::move(phases)};
}

inline MultiplicationAtomic make_multiplication(std::vector<double> weights, std::vector<PhaseAngle> phases,
                                                std::vector<double> moduli, double p) {
  if (weights.empty() || weights.size() != phases.size() || moduli.size() != phases.size())
    throw ConfigError("MultiplicationAtomic: weights, phases and moduli must have equal nonzero length");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("MultiplicationAtomic: weights must be positive");
  for (double r : moduli)
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("MultiplicationAtomic: moduli must be finite and >= 0");
  if (!(p >= 1.0)) throw ConfigError("MultiplicationAtomic: p must be >= 1");
  return {std::move(weights), std::move(phases), std::move(moduli), p};
}

inline AffineComposition make_affine(cplx a, cplx b, FunctionModel model, std::size_t size,
                                     std::optional<PhaseAngle> a_phase = std::nullopt) {
  AffineComposition op;
  op.a_phase = a_phase;
  op.a = a_phase ? a_phase->value() : a;
  op.b = b;
  op.model = model;
  op.size = size;
  if (size < 1) throw ConfigError("AffineComposition: window must be nonempty");
  if (model == FunctionModel::punctured) {
    if (b != cplx{}) throw ConfigError("AffineComposition: H(C*) requires b = 0");
    if (op.a == cplx{}) throw ConfigError("AffineComposition: H(C*) requires a != 0");
    op.offset = -std::int64_t(size / 2);
  }
  if (model == FunctionModel::disc || model == FunctionModel::hardy2) {
    if (std::abs(op.a) + std::abs(b) > 1.0 + 1e-15)
      throw ConfigError("AffineComposition: phi must map the disc into itself");
  }
  if (model == FunctionModel::weighted) {
    op.beta.resize(size);
    for (std::size_t n = 0; n < size; ++n) op.beta[n] = 1.0 / std::tgamma(double(n) + 1.0);
  }
  return op;
}

inline DirichletComposition make_dirichlet(double t, int N) {
  if (N < 1) throw ConfigError("DirichletComposition: N must be >= 1");
  if (!std::isfinite(t)) throw ConfigError("DirichletComposition: t must be finite");
  return {t, N};
}

inline std::int64_t cascade_period_lcm(const PeriodicCascade& op) {
  std::int64_t L = 1;
  for (auto m : op.periods) L = std::lcm(L, m);
  return L;
}

// Pairwise orbit distances over one period: (a, b) = (min, max) of |T^i p - T^j p|.
inline std::pair<double, double> cascade_ab(std::int64_t period, double scale) {
  const auto lam = PhaseAngle::exact(1, period);
  if (period == 1) return {0.0, 0.0};
  double a = HUGE_VAL, b = 0.0;
  for (std::int64_t i = 0; i < period; ++i)
    for (std::int64_t j = i + 1; j < period; ++j) {
      const double dd = scale * std::abs(lam.pow(i) - lam.pow(j));
      a = std::min(a, dd);
      b = std::max(b, dd);
    }
  return {a, b};
}

// Scales chosen so that 4 b(p_{l+1}) < a(p_l) holds with a factor 2 to spare.
inline PeriodicCascade make_cascade(std::vector<std::int64_t> periods, double first_scale = 1.0) {
  if (periods.empty()) throw ConfigError("PeriodicCascade: needs periods");
  for (std::size_t i = 0; i < periods.size(); ++i) {
    if (periods[i] < 2) throw ConfigError("PeriodicCascade: periods must be >= 2");
    if (i && periods[i] <= periods[i - 1]) throw ConfigError("PeriodicCascade: periods must increase");
  }
  PeriodicCascade op{std::move(periods), {}};
  double s = first_scale;
  for (std::size_t i = 0; i < op.periods.size(); ++i) {
    op.scales.push_back(s);
    const auto ab = cascade_ab(op.periods[i], 1.0);
    const auto next = i + 1 < op.periods.size() ? cascade_ab(op.periods[i + 1], 1.0) : ab;
    s = s * ab.first / (8.0 * std::max(next.second, 1e-300));
  }
  return op;
}

// ---------------------------------------------------------------------------
// windows

struct Window {
  std::int64_t offset;
  std::size_t size;
};

inline Window window(const OperatorSpec& op) {
  return std::visit(
      [](const auto& o) -> Window {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, DiagonalUnitary>) return {o.offset, o.phases.size()};
        else if constexpr (std::is_same_v<T, AugeTapia>) return {1, std::size_t(o.d + o.K)};
        else if constexpr (std::is_same_v<T, QRNH>) return {-std::int64_t(o.D), std::size_t(o.D + o.K)};
        else if constexpr (std::is_same_v<T, MultiplicationAtomic>) return {0, o.phases.size()};
        else if constexpr (std::is_same_v<T, AffineComposition>) return {o.offset, o.size};
        else if constexpr (std::is_same_v<T, DirichletComposition>) return {1, std::size_t(o.N)};
        else return {1, o.periods.size()};
      },
      op);
}

inline CoeffVec zero_vector(const OperatorSpec& op) {
  const Window w = window(op);
  return CoeffVec::zeros(w.offset, w.size);
}

inline CoeffVec fit_window(const OperatorSpec& op, const CoeffVec& x) {
  const Window w = window(op);
  const std::int64_t hi = w.offset + std::int64_t(w.size) - 1;
  for (std::int64_t i = x.offset(); i <= x.last(); ++i)
    if ((i < w.offset || i > hi) && x.at(i) != cplx{})
      throw ConfigError("window mismatch: coefficient at index " + std::to_string(i) + " outside operator window [" +
                        std::to_string(w.offset) + ", " + std::to_string(hi) + "]");
  return x.aligned_to(w.offset, w.size);
}

// Power-boundedness as declared by family (parameters decide where the family is mixed).
inline bool power_bounded(const OperatorSpec& op, std::string* why = nullptr) {
  auto say = [&](const char* s) {
    if (why) *why = s;
  };
  return std::visit(
      [&](const auto& o) -> bool {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, DiagonalUnitary> || std::is_same_v<T, DirichletComposition> ||
                      std::is_same_v<T, PeriodicCascade>) {
          return true;
        } else if constexpr (std::is_same_v<T, AugeTapia> || std::is_same_v<T, QRNH>) {
          say("perturbation coefficients (lambda_k^n - 1)/((lambda_k - 1) m_{k-1}) are unbounded in k");
          return false;
        } else if constexpr (std::is_same_v<T, MultiplicationAtomic>) {
          for (double r : o.moduli)
            if (r > 1.0) {
              say("an atom value has modulus > 1");
              return false;
            }
          return true;
        } else {
          const double ma = std::abs(o.a);
          if (ma > 1.0 + 1e-15) {
            say("|a| > 1");
            return false;
          }
          if (o.a == cplx{1.0, 0.0} && o.b != cplx{}) {
            say("phi is a translation");
            return false;
          }
          return true;
        }
      },
      op);
}

// ---------------------------------------------------------------------------
// coefficient-level maps

inline double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return r;
}

// Coefficients of p(a z + b) from those of p.
inline CoeffVec compose_affine_poly(cplx a, cplx b, const CoeffVec& coeffs, int degree_cap = 64) {
  if (coeffs.offset() != 0) throw ConfigError("compose_affine_poly: coefficients must start at index 0");
  const int deg = int(coeffs.size()) - 1;
  if (deg > degree_cap)
    throw ConfigError("compose_affine_poly: degree " + std::to_string(deg) + " exceeds cap " + std::to_string(degree_cap));
  std::vector<cplx> out(coeffs.size());
  std::vector<cplx> apow(coeffs.size()), bpow(coeffs.size());
  apow[0] = bpow[0] = 1.0;
  for (std::size_t i = 1; i < coeffs.size(); ++i) {
    apow[i] = apow[i - 1] * a;
    bpow[i] = bpow[i - 1] * b;
  }
  for (int n = 0; n <= deg; ++n) {
    const cplx c = coeffs.coeffs()[std::size_t(n)];
    if (c == cplx{}) continue;
    for (int j = 0; j <= n; ++j) out[std::size_t(j)] += c * binom(n, j) * apow[std::size_t(j)] * bpow[std::size_t(n - j)];
  }
  for (const auto& z : out)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw ConfigError("compose_affine_poly: binomial overflow at degree " + std::to_string(deg));
  return CoeffVec(0, std::move(out));
}

// Phase of n^{-it}, in turns.
inline PhaseAngle dirichlet_phase(double t, int n) { return PhaseAngle::approx(-t * std::log(double(n)) / (2.0 * kPi)); }

inline CoeffVec dirichlet_apply(double t, const CoeffVec& coeffs, const BigInt& times = 1) {
  if (coeffs.offset() < 1) throw ConfigError("dirichlet_apply: coefficients must start at index >= 1");
  CoeffVec out = coeffs;
  for (std::int64_t n = coeffs.offset(); n <= coeffs.last(); ++n)
    if (n > 1) out.set(n, coeffs.at(n) * dirichlet_phase(t, int(n)).pow(times));
  return out;
}

// phi^n(z) = a^n z + (1 - a^n) b / (1 - a), or z + n b when a = 1.
inline std::pair<cplx, cplx> affine_iterate(const AffineComposition& op, const BigInt& n) {
  const cplx an = op.a_phase ? op.a_phase->pow(n) : std::pow(op.a, to_double(n));
  if (op.b == cplx{}) return {an, cplx{}};
  if (op.a == cplx{1.0, 0.0}) return {an, to_double(n) * op.b};
  return {an, (1.0 - an) * op.b / (1.0 - op.a)};
}

// ---------------------------------------------------------------------------
// apply / power

inline constexpr std::uint64_t kPowerFallbackCap = 10'000'000;

struct HorizonExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<cplx> block(const CoeffVec& x, std::int64_t lo, int len) {
  std::vector<cplx> v(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) v[std::size_t(i)] = x.at(lo + i);
  return v;
}

inline cplx inner(const Direction& w, const std::vector<cplx>& v) {
  cplx acc{};
  for (std::size_t i = 0; i < w.size(); ++i) acc += std::conj(w[i]) * v[i];
  return acc;
}

inline cplx qrnh_functional(const QRNH& op, std::size_t k, const std::vector<cplx>& px) {
  return inner(op.omegas[k], px);
}

inline CoeffVec power_geo(const CoeffVec& x, std::int64_t first, std::size_t count, const GeoTable& t,
                          const std::vector<cplx>& fvals, const BigInt& n) {
  CoeffVec out = x;
  const bool fits = fits_i63(n);
  const std::uint64_t n64 = fits ? static_cast<std::uint64_t>(n) : 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::int64_t k = first + std::int64_t(i);
    const auto& e = t.entries[std::size_t(k - t.first_index)];
    const auto [ln, gs] = geo_eval(e, n, fits, n64);
    out.set(k, ln * x.at(k) + gs * fvals[i]);
  }
  return out;
}

}  // namespace detail

inline CoeffVec apply(const OperatorSpec& op, const CoeffVec& x_in) {
  const CoeffVec x = fit_window(op, x_in);
  return std::visit(
      [&](const auto& o) -> CoeffVec {
        using T = std::decay_t<decltype(o)>;
        CoeffVec y = x;
        if constexpr (std::is_same_v<T, DiagonalUnitary>) {
          for (std::size_t i = 0; i < o.phases.size(); ++i) {
            const auto k = o.offset + std::int64_t(i);
            y.set(k, o.phases[i].value() * x.at(k));
          }
        } else if constexpr (std::is_same_v<T, AugeTapia>) {
          const auto px = detail::block(x, 1, o.d);
          for (int k = o.d + 1; k <= o.d + o.K; ++k) {
            const auto& e = o.table->entries[std::size_t(k - o.table->first_index)];
            y.set(k, e.lam * x.at(k) + e.inv_m_prev * o.g.eval(std::size_t(k - o.d - 1), px));
          }
        } else if constexpr (std::is_same_v<T, QRNH>) {
          const auto px = detail::block(x, -o.D, o.D);
          for (int k = 0; k < o.K; ++k) {
            const auto& e = o.table->entries[std::size_t(k)];
            y.set(k, e.lam * x.at(k) + e.inv_m_prev * detail::qrnh_functional(o, std::size_t(k), px));
          }
        } else if constexpr (std::is_same_v<T, MultiplicationAtomic>) {
          for (std::size_t j = 0; j < o.phases.size(); ++j)
            y.set(std::int64_t(j), o.moduli[j] * o.phases[j].value() * x.at(std::int64_t(j)));
        } else if constexpr (std::is_same_v<T, AffineComposition>) {
          if (o.b == cplx{}) {
            for (std::int64_t n = x.offset(); n <= x.last(); ++n)
              y.set(n, (o.a_phase ? o.a_phase->pow(n) : std::pow(o.a, double(n))) * x.at(n));
          } else {
            y = compose_affine_poly(o.a, o.b, x, o.degree_cap);
          }
        } else if constexpr (std::is_same_v<T, DirichletComposition>) {
          y = dirichlet_apply(o.t, x);
        } else {
          for (std::size_t l = 0; l < o.periods.size(); ++l) {
            const auto k = std::int64_t(l + 1);
            y.set(k, PhaseAngle::exact(1, o.periods[l]).value() * x.at(k));
          }
        }
        return y;
      },
      op);
}

inline CoeffVec power(const OperatorSpec& op, const BigInt& n, const CoeffVec& x_in) {
  if (n < 0) throw ConfigError("power: n must be >= 0");
  const CoeffVec x = fit_window(op, x_in);
  if (n == 0) return x;
  return std::visit(
      [&](const auto& o) -> CoeffVec {
        using T = std::decay_t<decltype(o)>;
        CoeffVec y = x;
        if constexpr (std::is_same_v<T, DiagonalUnitary>) {
          for (std::size_t i = 0; i < o.phases.size(); ++i) {
            const auto k = o.offset + std::int64_t(i);
            y.set(k, o.phases[i].pow(n) * x.at(k));
          }
        } else if constexpr (std::is_same_v<T, AugeTapia>) {
          const auto px = detail::block(x, 1, o.d);
          std::vector<cplx> f(std::size_t(o.K));
          for (int j = 0; j < o.K; ++j) f[std::size_t(j)] = o.g.eval(std::size_t(j), px);
          y = detail::power_geo(x, o.d + 1, std::size_t(o.K), *o.table, f, n);
        } else if constexpr (std::is_same_v<T, QRNH>) {
          const auto px = detail::block(x, -o.D, o.D);
          std::vector<cplx> f(std::size_t(o.K));
          for (int k = 0; k < o.K; ++k) f[std::size_t(k)] = detail::qrnh_functional(o, std::size_t(k), px);
          y = detail::power_geo(x, 0, std::size_t(o.K), *o.table, f, n);
        } else if constexpr (std::is_same_v<T, MultiplicationAtomic>) {
          for (std::size_t j = 0; j < o.phases.size(); ++j) {
            const double r = o.moduli[j] == 1.0 ? 1.0 : std::pow(o.moduli[j], to_double(n));
            y.set(std::int64_t(j), r * o.phases[j].pow(n) * x.at(std::int64_t(j)));
          }
        } else if constexpr (std::is_same_v<T, AffineComposition>) {
          const auto [an, bn] = affine_iterate(o, n);
          if (o.b == cplx{}) {
            for (std::int64_t i = x.offset(); i <= x.last(); ++i)
              y.set(i, (o.a_phase ? o.a_phase->pow(n * i) : std::pow(an, double(i))) * x.at(i));
          } else {
            y = compose_affine_poly(an, bn, x, o.degree_cap);
          }
        } else if constexpr (std::is_same_v<T, DirichletComposition>) {
          y = dirichlet_apply(o.t, x, n);
        } else {
          const BigInt r = n % cascade_period_lcm(o);
          if (r > BigInt(kPowerFallbackCap))
            throw HorizonExceeded("power: horizon exceeded (" + r.str() + " steps needed, cap " +
                                  std::to_string(kPowerFallbackCap) + ")");
          const auto steps = static_cast<std::uint64_t>(r);
          for (std::uint64_t s = 0; s < steps; ++s) y = reclab::apply(op, y);
        }
        return y;
      },
      op);
}

inline CoeffVec power(const OperatorSpec& op, std::uint64_t n, const CoeffVec& x) { return power(op, BigInt(n), x); }

// ||T^n x - x|| in l2 for the coefficient window.
inline double return_error(const OperatorSpec& op, const BigInt& n, const CoeffVec& x) {
  return norm(power(op, n, x) - fit_window(op, x), NormSpec::l2());
}

// max_i ||T^n x_i - x_i|| for fixed vectors at machine-word n, bitwise equal to return_error.
// The perturbed families share one geometric-table evaluation per coordinate across all vectors.
class ReturnErrors {
 public:
  ReturnErrors(const OperatorSpec& op, const std::vector<CoeffVec>& xs) : op_(op) {
    for (const auto& x : xs) xs_.push_back(fit_window(op, x));
    if (const auto* a = std::get_if<AugeTapia>(&op)) {
      table_ = a->table.get();
      first_ = a->d + 1;
      count_ = std::size_t(a->K);
      for (const auto& x : xs_) {
        const auto px = detail::block(x, 1, a->d);
        std::vector<cplx> f(count_);
        for (std::size_t j = 0; j < count_; ++j) f[j] = a->g.eval(j, px);
        fvals_.push_back(std::move(f));
      }
    } else if (const auto* q = std::get_if<QRNH>(&op)) {
      table_ = q->table.get();
      first_ = 0;
      count_ = std::size_t(q->K);
      for (const auto& x : xs_) {
        const auto px = detail::block(x, -q->D, q->D);
        std::vector<cplx> f(count_);
        for (std::size_t k = 0; k < count_; ++k) f[k] = detail::qrnh_functional(*q, k, px);
        fvals_.push_back(std::move(f));
      }
    }
  }

  // Exact when the error is below `cutoff`; otherwise some value that is at least `cutoff`.
  double max_error(std::uint64_t n, double cutoff = HUGE_VAL) const {
    if (!table_ || n == 0 || (n >> 63)) {
      double e = 0.0;
      const BigInt nb(n);
      for (const auto& x : xs_) e = std::max(e, return_error(op_, nb, x));
      return e;
    }
    static const BigInt unused;
    thread_local std::vector<std::vector<cplx>> diffs;
    diffs.resize(xs_.size());
    for (auto& d : diffs) d.assign(count_, cplx{});
    thread_local std::vector<double> partial;
    partial.assign(xs_.size(), 0.0);
    const double cut2 = cutoff * cutoff;
    for (std::size_t i = 0; i < count_; ++i) {
      const std::int64_t k = first_ + std::int64_t(i);
      const auto& e = table_->entries[std::size_t(k - table_->first_index)];
      const auto [ln, gs] = e.small || (e.p_fits && std::size_t(std::bit_width(n) + std::bit_width(e.p64)) < e.q_bits)
                                ? detail::geo_eval(e, unused, true, n)
                                : detail::geo_eval(e, BigInt(n), true, n);
      for (std::size_t v = 0; v < xs_.size(); ++v) {
        const cplx xk = xs_[v].at(k);
        const cplx y = ln * xk + gs * fvals_[v][i];
        diffs[v][i] = y - xk;
        partial[v] += std::norm(diffs[v][i]);
      }
      if (cutoff < HUGE_VAL && (i & 3) == 3)
        for (const double p : partial)
          if (p * (1.0 - 1e-12) >= cut2) return std::max(cutoff, std::sqrt(p) * (1.0 - 1e-12));
    }
    double best = 0.0;
    for (const auto& d : diffs) {
      double s = 0.0, scale = 0.0;
      for (const auto& z : d) scale = std::max(scale, std::abs(z));
      if (scale == 0.0) continue;
      for (const auto& z : d) s += std::norm(z / scale);
      best = std::max(best, scale * std::sqrt(s));
    }
    return best;
  }

 private:
  OperatorSpec op_;
  std::vector<CoeffVec> xs_;
  const detail::GeoTable* table_ = nullptr;
  std::int64_t first_ = 0;
  std::size_t count_ = 0;
  std::vector<std::vector<cplx>> fvals_;
};

// Bound on the l2 contribution of coordinates beyond the window to ||T^n x - x||.
inline double tail_bound(const OperatorSpec& op, const BigInt& n, const CoeffVec& x_in) {
  if (!std::holds_alternative<AugeTapia>(op) && !std::holds_alternative<QRNH>(op)) return 0.0;
  const CoeffVec x = fit_window(op, x_in);
  const bool fits = fits_i63(n);
  const std::uint64_t n64 = fits ? static_cast<std::uint64_t>(n) : 0;
  double sq = 0.0, rest = 0.0;
  auto accumulate = [&](const detail::GeoTable& t, std::int64_t from, auto&& fval, double pnorm, double gmax,
                        const MSequence& m) {
    std::int64_t k = from;
    for (; k < t.first_index + std::int64_t(t.entries.size()); ++k) {
      const auto& e = t.entries[std::size_t(k - t.first_index)];
      const cplx gs = detail::geo_eval(e, n, fits, n64).second;
      sq += std::norm(gs * fval(k));
    }
    if (!m.has(int(k) - 1)) return;
    // Beyond the table every term is at most n * gmax * ||Px|| / m_{k-1}, and m doubles at least.
    if (pnorm == 0.0 || n == 0) return;
    rest = 2.0 * gmax * pnorm * ratio_to_double(n, m.at(int(k) - 1));
    if (!std::isfinite(rest)) rest = HUGE_VAL;
  };
  if (const auto* a = std::get_if<AugeTapia>(&op)) {
    const auto px = detail::block(x, 1, a->d);
    double pn = 0.0;
    for (auto z : px) pn += std::norm(z);
    pn = std::sqrt(pn);
    accumulate(*a->table, a->d + a->K + 1,
               [&](std::int64_t k) {
                 const auto j = std::size_t(k - a->d - 1);
                 return a->g.has(j) ? a->g.eval(j, px) : cplx{a->g.max_scale() * pn, 0.0};
               },
               pn, a->g.max_scale(), a->m);
  } else {
    const auto& q = std::get<QRNH>(op);
    const auto px = detail::block(x, -q.D, q.D);
    double pn = 0.0;
    for (auto z : px) pn += std::norm(z);
    pn = std::sqrt(pn);
    accumulate(*q.table, q.K,
               [&](std::int64_t k) {
                 return std::size_t(k) < q.omegas.size() ? detail::qrnh_functional(q, std::size_t(k), px)
                                                         : cplx{pn, 0.0};
               },
               pn, 1.0, q.m);
  }
  return std::sqrt(sq) + rest;
}

// ---------------------------------------------------------------------------
// closed-form checks

struct ObstructionSides {
  cplx lhs;
  cplx rhs;
  double scale = 0.0;  // |e_k*(y)| + |geometric-sum term|: the size of the operands being cancelled
  double gap() const { return std::abs(lhs - rhs); }
  double relative_gap() const { return gap() / std::max({std::abs(lhs), std::abs(rhs), scale, 1e-300}); }
};

namespace detail {

// Right-hand side (lambda_k^n - 1)(e_k*(y) + g_k(Py)/((lambda_k - 1) m_{k-1})), from the phase alone.
inline void obstruction_rhs(const AugeTapia& op, const CoeffVec& y, const std::vector<cplx>& px, const BigInt& n, int k,
                            ObstructionSides& s) {
  const PhaseAngle lam = PhaseAngle::exact(1, 2 * op.m.at(k));
  const cplx gk = op.g.eval(std::size_t(k - op.d - 1), px);
  const double t = lam.power_turns(n);
  const cplx lam_n_minus_1 = cplx{0.0, 2.0 * std::sin(kPi * t)} * cis_turns(t / 2);
  const double theta = lam.turns();
  // (lambda^n - 1)/((lambda - 1) m_{k-1}) = (r / (num m_{k-1})) sinc(t)/sinc(theta) e^{i pi (t - theta)},
  // with r the centered residue of n num mod den; one exact ratio keeps every intermediate in range.
  BigInt r = (n * lam.num()) % lam.den();
  if (r < 0) r += lam.den();
  if (2 * r > lam.den()) r -= lam.den();
  const double q = ratio_to_double(r, lam.num() * op.m.at(k - 1));
  const cplx sum_term = q * (sinc_pi(t) / sinc_pi(theta)) * cis_turns((t - theta) / 2) * gk;
  s.rhs = lam_n_minus_1 * y.at(k) + sum_term;
  s.scale = std::abs(y.at(k)) + std::abs(sum_term);
}

}  // namespace detail

// e_k*(T^n y - y) against (lambda_k^n - 1)(e_k*(y) + g_k(Py)/((lambda_k - 1) m_{k-1})).
inline ObstructionSides tapia_obstruction(const AugeTapia& op, const CoeffVec& y_in, const BigInt& n, int k) {
  if (k <= op.d || k > op.d + op.K) throw ConfigError("tapia_obstruction: k out of window");
  const OperatorSpec spec = op;
  const CoeffVec y = fit_window(spec, y_in);
  ObstructionSides s;
  s.lhs = power(spec, n, y).at(k) - y.at(k);
  detail::obstruction_rhs(op, y, detail::block(y, 1, op.d), n, k, s);
  return s;
}

// Both sides for every k = d+1..d+K from a single power() evaluation.
inline std::vector<ObstructionSides> tapia_obstruction_row(const AugeTapia& op, const CoeffVec& y_in, const BigInt& n) {
  const OperatorSpec spec = op;
  const CoeffVec y = fit_window(spec, y_in);
  const CoeffVec ty = power(spec, n, y);
  const auto px = detail::block(y, 1, op.d);
  std::vector<ObstructionSides> out(std::size_t(op.K));
  for (int k = op.d + 1; k <= op.d + op.K; ++k) {
    auto& s = out[std::size_t(k - op.d - 1)];
    s.lhs = ty.at(k) - y.at(k);
    detail::obstruction_rhs(op, y, px, n, k, s);
  }
  return out;
}

struct LimitFormula {
  double error_norm = 0.0;
  double predicted = 0.0;
  double tail = 0.0;
  double gap() const { return std::abs(error_norm - predicted); }
};

// ||T^{m_l} x - x|| against |<omega_{l+1}, P x>|.
inline LimitFormula qrnh_limit_formula(const QRNH& op, const CoeffVec& x_in, int l) {
  if (l < 0 || l + 1 >= op.K || !op.m.has(l)) throw ConfigError("qrnh_limit_formula: l outside m prefix");
  const OperatorSpec spec = op;
  const CoeffVec x = fit_window(spec, x_in);
  LimitFormula r;
  const BigInt n = op.m.at(l);
  r.error_norm = return_error(spec, n, x);
  r.predicted = std::abs(detail::qrnh_functional(op, std::size_t(l + 1), detail::block(x, -op.D, op.D)));
  r.tail = tail_bound(spec, n, x);
  return r;
}

}  // namespace reclab

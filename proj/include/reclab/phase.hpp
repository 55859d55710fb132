#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace reclab {

using BigInt = boost::multiprecision::cpp_int;
using cplx = std::complex<double>;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr long double kPiL = std::numbers::pi_v<long double>;

inline bool fits_i63(const BigInt& v) {
  return v >= 0 && (v == 0 || boost::multiprecision::msb(v) < 63);
}

inline std::size_t bit_length(const BigInt& v) {
  return v == 0 ? 0 : boost::multiprecision::msb(v) + 1;
}

// a/b for machine-sized operands; shared by every path so results agree bitwise.
inline double ratio_small(std::int64_t a, std::uint64_t b) {
  constexpr std::uint64_t exact = std::uint64_t{1} << 53;
  std::uint64_t ua = a < 0 ? std::uint64_t(-(a + 1)) + 1 : std::uint64_t(a);
  if (ua <= exact && b <= exact) return double(a) / double(b);
  return double(static_cast<long double>(a) / static_cast<long double>(b));
}

// a/b for arbitrary sizes, b > 0, in extended precision and exponent range.
inline long double ratio_to_long_double(const BigInt& a, const BigInt& b) {
  if (b <= 0) throw std::invalid_argument("ratio_to_double: nonpositive denominator");
  if (a == 0) return 0.0L;
  const bool neg = a < 0;
  const BigInt A = neg ? BigInt(-a) : a;
  const long la = long(bit_length(A)), lb = long(bit_length(b));
  const long sa = std::max(0L, la - 63), sb = std::max(0L, lb - 63);
  const auto ta = static_cast<std::uint64_t>(BigInt(A >> sa));
  const auto tb = static_cast<std::uint64_t>(BigInt(b >> sb));
  const long double q = static_cast<long double>(ta) / static_cast<long double>(tb);
  const long e = sa - sb;
  if (e < -20000) return neg ? -0.0L : 0.0L;
  if (e > 20000) return neg ? -HUGE_VALL : HUGE_VALL;
  const long double r = std::ldexp(q, int(e));
  return neg ? -r : r;
}

// a/b for arbitrary sizes, b > 0. Results below the double range flush to 0.
inline double ratio_to_double(const BigInt& a, const BigInt& b) {
  if (b <= 0) throw std::invalid_argument("ratio_to_double: nonpositive denominator");
  if (a == 0) return 0.0;
  const bool neg = a < 0;
  const BigInt A = neg ? BigInt(-a) : a;
  if (fits_i63(A) && fits_i63(b)) {
    auto av = static_cast<std::int64_t>(A);
    return ratio_small(neg ? -av : av, static_cast<std::uint64_t>(b));
  }
  return double(ratio_to_long_double(a, b));
}

inline double to_double(const BigInt& v) { return ratio_to_double(v, BigInt(1)); }

// Representative of num/den mod 1 in (-1/2, 1/2]; den > 0, 0 <= num < den.
inline double centered_small(std::uint64_t num, std::uint64_t den) {
  if (2 * static_cast<unsigned __int128>(num) > den)
    return ratio_small(-static_cast<std::int64_t>(den - num), den);
  return ratio_small(static_cast<std::int64_t>(num), den);
}

inline double centered_big(const BigInt& num, const BigInt& den) {
  if (fits_i63(den)) return centered_small(static_cast<std::uint64_t>(num), static_cast<std::uint64_t>(den));
  if (2 * num > den) return ratio_to_double(num - den, den);
  return ratio_to_double(num, den);
}

inline long double centered_big_ld(const BigInt& num, const BigInt& den) {
  if (fits_i63(den)) return centered_small(static_cast<std::uint64_t>(num), static_cast<std::uint64_t>(den));
  if (2 * num > den) return ratio_to_long_double(num - den, den);
  return ratio_to_long_double(num, den);
}

// e^{2 pi i t} for t in (-1/2, 1/2], exact at quarter turns.
inline cplx cis_turns(double t) {
  if (t == 0.0) return {1.0, 0.0};
  if (t == 0.5 || t == -0.5) return {-1.0, 0.0};
  if (t == 0.25) return {0.0, 1.0};
  if (t == -0.25) return {0.0, -1.0};
  const double a = 2.0 * kPi * t;
  return {std::cos(a), std::sin(a)};
}

// |e^{2 pi i t} - 1| for centered t.
inline double chord_turns(double t) { return 2.0 * std::abs(std::sin(kPi * t)); }

// Unimodular scalar e^{2 pi i angle}: exact rational p/q turns or an approximate real angle.
class PhaseAngle {
 public:
  enum class Kind { exact, approx };

  PhaseAngle() : kind_(Kind::exact), p_(0), q_(1) {}

  static PhaseAngle exact(BigInt p, BigInt q) {
    if (q <= 0) throw ConfigError("PhaseAngle: denominator must be positive");
    p %= q;
    if (p < 0) p += q;
    BigInt g = boost::multiprecision::gcd(p, q);
    if (g > 1) {
      p /= g;
      q /= g;
    }
    PhaseAngle a;
    a.kind_ = Kind::exact;
    a.p_ = std::move(p);
    a.q_ = std::move(q);
    if (a.p_ == 0) a.q_ = 1;
    a.small_ = fits_i63(a.q_);
    if (a.small_) {
      a.p64_ = static_cast<std::uint64_t>(a.p_);
      a.q64_ = static_cast<std::uint64_t>(a.q_);
    }
    return a;
  }

  static PhaseAngle approx(double turns) {
    if (!std::isfinite(turns)) throw ConfigError("PhaseAngle: non-finite angle");
    PhaseAngle a;
    a.kind_ = Kind::approx;
    double t = turns - std::floor(turns);
    if (t >= 1.0) t = 0.0;
    a.t_ = t;
    a.set_dyadic();
    return a;
  }

  Kind kind() const { return kind_; }
  bool is_exact() const { return kind_ == Kind::exact; }
  const BigInt& num() const { return p_; }
  const BigInt& den() const { return q_; }
  double turns() const { return is_exact() ? ratio_to_double(p_, q_) : t_; }

  // Angle of lambda^n as a centered fraction of a turn.
  double power_turns(const BigInt& n) const {
    if (is_exact()) {
      if (fits_i63(q_) && fits_i63(p_) && fits_i63(n)) {
        const auto q = static_cast<std::uint64_t>(q_);
        const auto r = static_cast<std::uint64_t>(n) % q;
        const auto s = static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(r) * static_cast<std::uint64_t>(p_)) % q);
        return centered_small(s, q);
      }
      BigInt r = n % q_;
      if (r < 0) r += q_;
      BigInt s = (r * p_) % q_;
      return centered_big(s, q_);
    }
    return dyadic_power_turns(n);
  }

  // Same value as power_turns(BigInt(n)) without the big-integer round trip.
  double power_turns_u64(std::uint64_t n) const {
    if (n >> 63) return power_turns(BigInt(n));
    if (is_exact()) {
      if (!small_) return power_turns(BigInt(n));
      const auto s = static_cast<std::uint64_t>((static_cast<unsigned __int128>(n % q64_) * p64_) % q64_);
      return centered_small(s, q64_);
    }
    if (t_ == 0.0 || n == 0 || shift_ <= 0) return 0.0;
    if (shift_ >= 127) return power_turns(BigInt(n));
    using u128 = unsigned __int128;
    const u128 den = u128(1) << shift_;
    const u128 num = (u128(n) * u128(M_)) & (den - 1);
    const long double x = std::ldexp(static_cast<long double>(num), -shift_);
    return double(x > 0.5L ? x - 1.0L : x);
  }
  double dist_to_one_u64(std::uint64_t n) const { return chord_turns(power_turns_u64(n)); }

  cplx value() const { return pow(BigInt(1)); }
  cplx pow(const BigInt& n) const { return cis_turns(power_turns(n)); }
  double dist_to_one(const BigInt& n) const { return chord_turns(power_turns(n)); }

  bool operator==(const PhaseAngle& o) const {
    if (kind_ != o.kind_) return false;
    return is_exact() ? (p_ == o.p_ && q_ == o.q_) : t_ == o.t_;
  }

  std::string to_string() const {
    if (is_exact()) return p_.str() + "/" + q_.str();
    char buf[40];
    std::snprintf(buf, sizeof buf, "~%.17g", t_);
    return buf;
  }

 private:
  // The stored double is an exact dyadic M / 2^shift; n*M is reduced exactly modulo 2^shift.
  double dyadic_power_turns(const BigInt& n) const {
    if (t_ == 0.0 || n == 0 || shift_ <= 0) return 0.0;
    if (fits_i63(n) && shift_ < 127) {
      using u128 = unsigned __int128;
      const u128 den = u128(1) << shift_;
      const u128 num = (u128(static_cast<std::uint64_t>(n)) * u128(M_)) & (den - 1);
      const long double x = std::ldexp(static_cast<long double>(num), -shift_);
      return double(x > 0.5L ? x - 1.0L : x);
    }
    BigInt den = BigInt(1) << shift_;
    BigInt num = (n * M_) % den;
    if (num < 0) num += den;
    return centered_big(num, den);
  }

  void set_dyadic() {
    if (t_ == 0.0) return;
    int e2 = 0;
    double m = std::frexp(t_, &e2);
    M_ = static_cast<std::uint64_t>(std::ldexp(m, 53));
    shift_ = 53 - e2;
    while (shift_ > 0 && (M_ & 1) == 0) {
      M_ >>= 1;
      --shift_;
    }
  }

  Kind kind_;
  BigInt p_, q_;
  double t_ = 0.0;
  std::uint64_t M_ = 0;
  int shift_ = 0;
  bool small_ = false;
  std::uint64_t p64_ = 0, q64_ = 1;
};

inline BigInt lcm_big(const BigInt& a, const BigInt& b) {
  if (a == 0 || b == 0) return 0;
  return a / boost::multiprecision::gcd(a, b) * b;
}

inline BigInt pow2(unsigned e) { return BigInt(1) << e; }

inline BigInt parse_bigint(const std::string& s) {
  if (s.empty()) throw ConfigError("empty integer");
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) throw ConfigError("bad integer: " + s);
  for (std::size_t j = i; j < s.size(); ++j)
    if (s[j] < '0' || s[j] > '9') throw ConfigError("bad integer: " + s);
  return BigInt(s);
}

// "p/q" gives an exact phase, "~x" or a plain decimal gives an approximate one.
inline PhaseAngle parse_phase(const std::string& s) {
  auto slash = s.find('/');
  if (slash != std::string::npos)
    return PhaseAngle::exact(parse_bigint(s.substr(0, slash)), parse_bigint(s.substr(slash + 1)));
  std::string body = (!s.empty() && s[0] == '~') ? s.substr(1) : s;
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(body, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad phase: " + s);
  }
  if (used != body.size()) throw ConfigError("bad phase: " + s);
  return PhaseAngle::approx(v);
}

}  // namespace reclab

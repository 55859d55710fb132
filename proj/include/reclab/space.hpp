#pragma once

#include "reclab/phase.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace reclab {

inline constexpr double kDefaultTol = 1e-9;

// Finite window of complex coefficients starting at basis index `offset`.
class CoeffVec {
 public:
  CoeffVec() : offset_(0), c_(1, cplx{}) {}
  CoeffVec(std::int64_t offset, std::vector<cplx> coeffs) : offset_(offset), c_(std::move(coeffs)) {
    if (c_.empty()) throw ConfigError("CoeffVec: window length must be >= 1");
    for (const auto& z : c_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw ConfigError("CoeffVec: non-finite coefficient");
  }

  static CoeffVec zeros(std::int64_t offset, std::size_t len) {
    return CoeffVec(offset, std::vector<cplx>(std::max<std::size_t>(len, 1)));
  }
  static CoeffVec unit(std::int64_t index, std::int64_t offset, std::size_t len) {
    CoeffVec v = zeros(offset, len);
    v.set(index, 1.0);
    return v;
  }

  std::int64_t offset() const { return offset_; }
  std::size_t size() const { return c_.size(); }
  std::int64_t last() const { return offset_ + std::int64_t(c_.size()) - 1; }
  bool contains(std::int64_t i) const { return i >= offset_ && i <= last(); }
  const std::vector<cplx>& coeffs() const { return c_; }

  cplx at(std::int64_t i) const { return contains(i) ? c_[std::size_t(i - offset_)] : cplx{}; }
  void set(std::int64_t i, cplx z) {
    if (!contains(i)) throw ConfigError("CoeffVec: index " + std::to_string(i) + " outside window");
    c_[std::size_t(i - offset_)] = z;
  }

  // Window [offset, offset + len), coefficients copied by index and zero-filled.
  CoeffVec aligned_to(std::int64_t offset, std::size_t len) const {
    CoeffVec out = zeros(offset, len);
    for (std::size_t k = 0; k < len; ++k) out.c_[k] = at(offset + std::int64_t(k));
    return out;
  }

  bool is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](cplx z) { return z == cplx{}; });
  }

  bool operator==(const CoeffVec& o) const { return offset_ == o.offset_ && c_ == o.c_; }

  friend CoeffVec combine(const CoeffVec& a, cplx alpha, const CoeffVec& b, cplx beta) {
    const std::int64_t lo = std::min(a.offset_, b.offset_);
    const std::int64_t hi = std::max(a.last(), b.last());
    CoeffVec out = zeros(lo, std::size_t(hi - lo + 1));
    for (std::int64_t i = lo; i <= hi; ++i) out.c_[std::size_t(i - lo)] = alpha * a.at(i) + beta * b.at(i);
    return out;
  }
  friend CoeffVec operator+(const CoeffVec& a, const CoeffVec& b) { return combine(a, 1.0, b, 1.0); }
  friend CoeffVec operator-(const CoeffVec& a, const CoeffVec& b) { return combine(a, 1.0, b, -1.0); }
  friend CoeffVec operator*(cplx s, const CoeffVec& a) {
    CoeffVec out = a;
    for (auto& z : out.c_) z *= s;
    return out;
  }

 private:
  std::int64_t offset_;
  std::vector<cplx> c_;
};

struct NormSpec {
  enum class Kind { weighted_lp, sup_compacts, l2, linf };
  Kind kind = Kind::l2;
  double p = 2.0;
  std::vector<double> weights;  // one per window position (weighted_lp)
  std::vector<double> radii;    // circles whose max is the seminorm (sup_compacts)

  static NormSpec l2() { return {}; }
  static NormSpec linf() { return {Kind::linf, 2.0, {}, {}}; }
  static NormSpec weighted(double p, std::vector<double> w) { return {Kind::weighted_lp, p, std::move(w), {}}; }
  static NormSpec sup_on(std::vector<double> r) { return {Kind::sup_compacts, 2.0, {}, std::move(r)}; }

  void validate() const {
    if (kind == Kind::weighted_lp) {
      if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("NormSpec: p must be >= 1");
      for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("NormSpec: weights must be positive");
    }
    if (kind == Kind::sup_compacts) {
      if (radii.empty()) throw ConfigError("NormSpec: sup-on-compacts needs radii");
      for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) throw ConfigError("NormSpec: radii must be positive");
        if (i > 0 && !(radii[i] > radii[i - 1])) throw ConfigError("NormSpec: radii must increase");
      }
    }
  }
};

// Max of |sum c_n z^n| over equispaced points of the circle |z| = r.
inline double circle_sup(const CoeffVec& v, double r) {
  const std::size_t n_pts = std::max<std::size_t>(64, 8 * v.size());
  double best = 0.0;
  for (std::size_t j = 0; j < n_pts; ++j) {
    const double th = 2.0 * kPi * double(j) / double(n_pts);
    const cplx z = std::polar(r, th);
    cplx acc{};
    for (std::size_t k = v.size(); k-- > 0;) acc = acc * z + v.coeffs()[k];
    acc *= std::pow(z, double(v.offset()));
    best = std::max(best, std::abs(acc));
  }
  return best;
}

inline double norm(const CoeffVec& v, const NormSpec& spec) {
  spec.validate();
  const auto& c = v.coeffs();
  switch (spec.kind) {
    case NormSpec::Kind::l2: {
      double s = 0.0, scale = 0.0;
      for (const auto& z : c) scale = std::max(scale, std::abs(z));
      if (scale == 0.0) return 0.0;
      for (const auto& z : c) s += std::norm(z / scale);
      return scale * std::sqrt(s);
    }
    case NormSpec::Kind::linf: {
      double m = 0.0;
      for (const auto& z : c) m = std::max(m, std::abs(z));
      return m;
    }
    case NormSpec::Kind::weighted_lp: {
      if (spec.weights.size() != c.size())
        throw ConfigError("norm: weight length " + std::to_string(spec.weights.size()) +
                          " does not match window length " + std::to_string(c.size()));
      double s = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) s += std::pow(std::abs(c[i]) * spec.weights[i], spec.p);
      return std::pow(s, 1.0 / spec.p);
    }
    case NormSpec::Kind::sup_compacts: {
      if (v.is_zero()) return 0.0;
      double m = 0.0;
      for (double r : spec.radii) m = std::max(m, circle_sup(v, r));
      return m;
    }
  }
  return 0.0;
}

// d(x, y) = sum_k 2^-k p_k(x - y) / (1 + p_k(x - y)), k from 1.
struct FrechetMetricSpec {
  std::vector<NormSpec> seminorms{NormSpec::l2()};

  void validate() const {
    if (seminorms.empty()) throw ConfigError("FrechetMetricSpec: needs at least one seminorm");
    for (const auto& s : seminorms) s.validate();
  }
  double bound() const { return 1.0 - std::ldexp(1.0, -int(seminorms.size())); }

  static FrechetMetricSpec single(NormSpec n) { return {{std::move(n)}}; }
  // H(C): sup over |z| <= k.
  static FrechetMetricSpec entire(int count) {
    FrechetMetricSpec f{{}};
    for (int k = 1; k <= count; ++k) f.seminorms.push_back(NormSpec::sup_on({double(k)}));
    return f;
  }
  // H(C*): sup over the annulus 1/k <= |z| <= k, attained on its two boundary circles.
  static FrechetMetricSpec punctured(int count) {
    FrechetMetricSpec f{{}};
    for (int k = 1; k <= count; ++k) {
      if (k == 1) f.seminorms.push_back(NormSpec::sup_on({1.0}));
      else f.seminorms.push_back(NormSpec::sup_on({1.0 / k, double(k)}));
    }
    return f;
  }
  // H(D): sup over |z| <= 1 - 1/(k+1).
  static FrechetMetricSpec disc(int count) {
    FrechetMetricSpec f{{}};
    for (int k = 1; k <= count; ++k) f.seminorms.push_back(NormSpec::sup_on({1.0 - 1.0 / (k + 1)}));
    return f;
  }
};

inline double frechet_of(const CoeffVec& v, const FrechetMetricSpec& spec) {
  spec.validate();
  double d = 0.0, w = 0.5;
  for (const auto& s : spec.seminorms) {
    const double p = norm(v, s);
    d += w * (std::isinf(p) ? 1.0 : p / (1.0 + p));
    w *= 0.5;
  }
  return d;
}

inline double frechet_dist(const CoeffVec& x, const CoeffVec& y, const FrechetMetricSpec& spec) {
  return frechet_of(x - y, spec);
}

}  // namespace reclab

#pragma once

#include "reclab/operators.hpp"

namespace reclab {

// Base metric for orbit comparisons: a norm distance or a Frechet combiner.
struct BaseMetric {
  std::variant<NormSpec, FrechetMetricSpec> m = NormSpec::l2();

  double of(const CoeffVec& v) const {
    if (const auto* n = std::get_if<NormSpec>(&m)) return norm(v, *n);
    return frechet_of(v, std::get<FrechetMetricSpec>(m));
  }
  double dist(const CoeffVec& x, const CoeffVec& y) const { return of(x - y); }
};

struct NotPowerBounded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// sup_{0 <= l <= horizon} d(T^l x, T^l y), truncated at the horizon.
inline double dstar_dist(const CoeffVec& x, const CoeffVec& y, const OperatorSpec& op, std::uint64_t horizon,
                         const BaseMetric& base = {}) {
  std::string why;
  if (!power_bounded(op, &why))
    throw NotPowerBounded("dstar_dist: " + family_name(op) + " is not power-bounded (" + why +
                          "); the orbit supremum may diverge");
  CoeffVec v = fit_window(op, x - y);
  double best = base.of(v);
  for (std::uint64_t l = 1; l <= horizon; ++l) {
    v = reclab::apply(op, v);
    best = std::max(best, base.of(v));
  }
  return best;
}

}  // namespace reclab

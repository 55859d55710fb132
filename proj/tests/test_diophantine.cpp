#include "reclab/diophantine.hpp"

#include <catch_amalgamated.hpp>

#include <random>
#include <set>

using namespace reclab;

namespace {

std::vector<BigInt> big(std::initializer_list<long long> v) {
  std::vector<BigInt> out;
  for (auto x : v) out.emplace_back(x);
  return out;
}

// Independent error: complex exponentials straight from the rational angle.
double direct_error(const std::vector<std::pair<long long, long long>>& pq, long long n) {
  double e = 0.0;
  for (auto [p, q] : pq) e = std::max(e, std::abs(std::polar(1.0, 2.0 * kPi * double((p * n) % q) / double(q)) - 1.0));
  return e;
}

std::vector<PhaseAngle> to_phases(const std::vector<std::pair<long long, long long>>& pq) {
  std::vector<PhaseAngle> out;
  for (auto [p, q] : pq) out.push_back(PhaseAngle::exact(p, q));
  return out;
}

}  // namespace

TEST_CASE("return times of simple rational phases") {
  const auto half = find_return_times({PhaseAngle::exact(1, 2)}, 0.1, BigInt(100), 3);
  CHECK(half.times == big({2, 4, 6}));
  CHECK(half.errors == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(half.provenance == Provenance::lcm_exact);
  CHECK(half.regime == SearchRegime::lcm_multiples);

  const auto six = find_return_times({PhaseAngle::exact(1, 2), PhaseAngle::exact(1, 3)}, 0.1, BigInt(1000), 4);
  CHECK(six.times == big({6, 12, 18, 24}));
  CHECK(*six.period == 6);

  const BigInt huge = boost::multiprecision::pow(BigInt(10), 40);
  const auto big_q = find_return_times({PhaseAngle::exact(1, huge)}, 1e-45, huge * 3, 5);
  CHECK(big_q.regime == SearchRegime::lcm_multiples);
  CHECK(big_q.times == std::vector<BigInt>{huge, 2 * huge, 3 * huge});
}

TEST_CASE("golden rotation agrees with a direct scan") {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  const auto r = find_return_times({PhaseAngle::approx(g)}, 0.1, BigInt(100000), 1);
  REQUIRE(r.found());
  long long first = 0;
  for (long long n = 1; n <= 100000 && !first; ++n)
    if (std::abs(std::polar(1.0, 2.0 * kPi * g * double(n)) - 1.0) < 0.1) first = n;
  CHECK(r.times[0] == first);
  CHECK(r.regime == SearchRegime::brute_force);
}

TEST_CASE("tiny eps yields exactly the multiples of the lcm") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> qd(1, 30), kd(1, 4);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::pair<long long, long long>> pq;
    const int k = kd(rng);
    for (int i = 0; i < k; ++i) {
      const long long q = qd(rng);
      pq.emplace_back(std::uniform_int_distribution<long long>(0, q - 1)(rng), q);
    }
    const auto r = find_return_times(to_phases(pq), 1e-6, BigInt(20000), 1000);
    std::vector<BigInt> want;
    for (long long n = 1; n <= 20000 && want.size() < 1000; ++n)
      if (direct_error(pq, n) < 1e-6) want.emplace_back(n);
    CHECK(r.times == want);
    CHECK(verify_return_times(to_phases(pq), r));
  }
}

TEST_CASE("large eps scans one period and repeats it") {
  const std::vector<std::pair<long long, long long>> pq{{1, 7}};
  const auto r = find_return_times(to_phases(pq), 1.0, BigInt(100), 1000);
  CHECK(r.regime == SearchRegime::lcm_period_scan);
  std::vector<BigInt> want;
  for (long long n = 1; n <= 100; ++n)
    if (direct_error(pq, n) < 1.0) want.emplace_back(n);
  CHECK(r.times == want);
  CHECK(verify_return_times(to_phases(pq), r));
}

TEST_CASE("no return below the horizon reports the near miss") {
  const auto r = find_return_times({PhaseAngle::exact(1, 1009)}, 1e-3, BigInt(100), 5);
  CHECK_FALSE(r.found());
  REQUIRE(r.near_miss);
  CHECK(r.near_miss->time == 1);
  CHECK(r.near_miss->error == Catch::Approx(2.0 * std::sin(kPi / 1009)).epsilon(1e-14));

  const auto s = find_return_times({PhaseAngle::approx(std::sqrt(2.0) - 1.0), PhaseAngle::approx(std::sqrt(3.0) - 1.0)},
                                   1e-4, BigInt(1000), 3);
  CHECK_FALSE(s.found());
  REQUIRE(s.near_miss);
  double best = HUGE_VAL;
  long long arg = 0;
  for (long long n = 1; n <= 1000; ++n) {
    const double e = std::max(PhaseAngle::approx(std::sqrt(2.0) - 1.0).dist_to_one(n),
                              PhaseAngle::approx(std::sqrt(3.0) - 1.0).dist_to_one(n));
    if (e < best) {
      best = e;
      arg = n;
    }
  }
  CHECK(s.near_miss->time == arg);
  CHECK(s.near_miss->error == best);
}

TEST_CASE("scan results do not depend on the worker count") {
  const std::vector<PhaseAngle> ph{PhaseAngle::approx(0.1234567), PhaseAngle::approx(0.7654321), PhaseAngle::exact(3, 29)};
  const auto a = find_return_times(ph, 0.2, BigInt(400000), 50, 1);
  const auto b = find_return_times(ph, 0.2, BigInt(400000), 50, 4);
  const auto c = find_return_times(ph, 0.2, BigInt(400000), 50, 7);
  CHECK(a.times == b.times);
  CHECK(a.errors == b.errors);
  CHECK(a.times == c.times);
  CHECK(a.errors == c.errors);
  const auto n1 = find_return_times(ph, 1e-5, BigInt(300000), 5, 1);
  const auto n4 = find_return_times(ph, 1e-5, BigInt(300000), 5, 4);
  CHECK(n1.near_miss == n4.near_miss);
}

TEST_CASE("enlarging eps or horizon keeps earlier times") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<PhaseAngle> ph{PhaseAngle::approx(u(rng)), PhaseAngle::approx(u(rng))};
    const auto small = find_return_times(ph, 0.05, BigInt(20000), 1'000'000);
    const auto wider = find_return_times(ph, 0.1, BigInt(20000), 1'000'000);
    const auto longer = find_return_times(ph, 0.05, BigInt(40000), 1'000'000);
    const std::set<BigInt> w(wider.times.begin(), wider.times.end()), l(longer.times.begin(), longer.times.end());
    for (const auto& t : small.times) {
      CHECK(w.count(t) == 1);
      CHECK(l.count(t) == 1);
    }
  }
}

TEST_CASE("simultaneous targets") {
  const auto quarter = PhaseAngle::exact(1, 4);
  const auto hit = simultaneous_target({quarter}, {cplx{0.0, 1.0}}, 0.01, BigInt(100));
  CHECK(hit.verdict == TargetVerdict::found);
  CHECK(hit.time == 1);
  CHECK(*hit.period == 4);

  const auto no = simultaneous_target({quarter}, {std::polar(1.0, 2.0 * kPi / 3.0)}, 0.1, BigInt(100));
  CHECK(no.verdict == TargetVerdict::infeasible);
  CHECK(no.error == Catch::Approx(2.0 * std::sin(kPi / 12.0)).epsilon(1e-12));

  const auto joint = simultaneous_target({PhaseAngle::exact(1, 2), PhaseAngle::exact(1, 2)}, {cplx{-1.0}, cplx{1.0}}, 0.1,
                                         BigInt(1000));
  CHECK(joint.verdict == TargetVerdict::infeasible);

  const std::vector<PhaseAngle> ph{PhaseAngle::approx(0.31), PhaseAngle::approx(0.77)};
  const auto ones = simultaneous_target(ph, {cplx{1.0}, cplx{1.0}}, 0.05, BigInt(100000));
  const auto ret = find_return_times(ph, 0.05, BigInt(100000), 1);
  REQUIRE(ret.found());
  CHECK(ones.verdict == TargetVerdict::found);
  CHECK(ones.time == ret.times[0]);
  CHECK(ones.error == ret.errors[0]);

  CHECK_THROWS_AS(simultaneous_target({quarter}, {cplx{2.0}}, 0.1, BigInt(10)), ConfigError);
  CHECK_THROWS_AS(simultaneous_target({quarter}, {}, 0.1, BigInt(10)), ConfigError);
}

TEST_CASE("log-rational relations") {
  const auto one = log_rational_relations({PhaseAngle::exact(1, 2)}, 5);
  REQUIRE_FALSE(one.empty());
  CHECK(one[0].coefficients == big({2}));
  CHECK(one.size() == 2);  // 2 and 4

  const auto pair = log_rational_relations({PhaseAngle::exact(1, 3), PhaseAngle::exact(1, 6)}, 3);
  bool has = false;
  for (const auto& c : pair) has = has || c.coefficients == big({1, -2});
  CHECK(has);

  // exhaustive oracle over the box for 1/7, 1/11
  const std::vector<PhaseAngle> ph{PhaseAngle::exact(1, 7), PhaseAngle::exact(1, 11)};
  const auto rel = log_rational_relations(ph, 12);
  std::set<std::vector<BigInt>> got, want;
  for (const auto& c : rel) got.insert(c.coefficients);
  for (long long a = -12; a <= 12; ++a)
    for (long long b = -12; b <= 12; ++b) {
      if (a == 0 && b == 0) continue;
      if (a < 0 || (a == 0 && b < 0)) continue;
      if ((11 * a + 7 * b) % 77 == 0) want.insert(big({a, b}));
    }
  CHECK(got == want);
  CHECK(rel[0].coefficients == big({7, 0}));
  CHECK(rel[1].coefficients == big({0, 11}));
  for (const auto& c : rel) {
    CHECK(relation_holds(ph, c.coefficients));
    CHECK(c.exact_zero);
    if (c.coefficients[0] != 0 && c.coefficients[1] != 0)
      CHECK((abs(c.coefficients[0]) >= 7 || abs(c.coefficients[1]) >= 7));
  }

  CHECK_THROWS_AS(log_rational_relations({PhaseAngle::approx(0.3)}, 3), ConfigError);
}

TEST_CASE("relations substitute back exactly") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<PhaseAngle> ph;
    const int k = 1 + int(rng() % 3);
    for (int i = 0; i < k; ++i) {
      const auto q = 1 + static_cast<long long>(rng() % 40);
      ph.push_back(PhaseAngle::exact(static_cast<long long>(rng() % std::uint64_t(q)), q));
    }
    for (const auto& c : log_rational_relations(ph, 6)) {
      CHECK(relation_holds(ph, c.coefficients));
      BigInt s = 0, L = phase_period(ph);
      for (std::size_t i = 0; i < ph.size(); ++i) s += c.coefficients[i] * ph[i].num() * (L / ph[i].den());
      CHECK(s == c.integer_value * L);
    }
  }
}

TEST_CASE("heuristic relation residuals") {
  const auto r = relation_residuals({PhaseAngle::approx(0.5), PhaseAngle::approx(std::sqrt(2.0) - 1.0)}, 3, 3);
  REQUIRE(r.size() == 3);
  CHECK(r[0].residual == 0.0);
  CHECK(r[0].coefficients == std::vector<std::int64_t>{2, 0});
  CHECK(r[1].residual > 0.0);
  CHECK(r[0].residual <= r[1].residual);
  CHECK(r[1].residual <= r[2].residual);
}

TEST_CASE("structured times") {
  MSequence m;
  m.first = 1;
  m.m = big({2, 8, 64});
  const auto s = structured_mk_times(m, BigInt(2));
  CHECK(s.times == big({4, 16, 128}));
  CHECK(s.provenance == Provenance::structured_mk);
  const auto d = build_m_sequence(30, MSchedule{});
  const auto t = structured_mk_times(d.seq, BigInt(1));
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] > t[i - 1]);
  CHECK_THROWS_AS(structured_mk_times(m, BigInt(0)), ConfigError);
}

TEST_CASE("return sequences validate") {
  CHECK_THROWS_AS(ReturnSequence({}, Provenance::user), ConfigError);
  CHECK_THROWS_AS(ReturnSequence(big({3, 3}), Provenance::user), ConfigError);
  CHECK_THROWS_AS(ReturnSequence(big({0, 3}), Provenance::user), ConfigError);
  const ReturnSequence s(big({1, 2, 3, 4, 5}), Provenance::user);
  CHECK(s.subsequence(1, 2).times == big({2, 4}));
  CHECK(s.shifted(3).times == big({4, 5}));
}

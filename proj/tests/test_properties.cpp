#include "property_suite.hpp"

#include <catch_amalgamated.hpp>

using namespace reclab;
using namespace reclab::props;

namespace {

CoeffVec random_on(std::int64_t offset, std::size_t len, Rng& rng, double scale = 1.0) {
  std::vector<cplx> c(len);
  for (auto& z : c) z = scale * rng.cnormal();
  return CoeffVec(offset, c);
}

// One operator per family, perturbed ones included.
OperatorSpec random_operator(Rng& rng) {
  switch (rng.below(7)) {
    case 0: return make_auge_tapia(2 + int(rng.below(2)), 8 + int(rng.below(16)));
    case 1: return make_qrnh(2 + int(rng.below(6)), 2 + int(rng.below(10)));
    case 2: {
      std::vector<PhaseAngle> ph;
      for (int i = 0; i < 4; ++i) ph.push_back(random_phase(rng));
      return make_multiplication({0.3, 0.5, 0.7, 1.0}, ph, {1.0, 0.8, 1.0, 1.3}, 1.0 + 3.0 * rng.uniform());
    }
    case 3: return make_affine(0.9 * cis_turns(rng.uniform()), {rng.uniform(-0.3, 0.3), 0.1}, FunctionModel::entire, 7);
    case 4: return make_dirichlet(rng.uniform(-5.0, 5.0), 6);
    case 5: return make_cascade({2, 3, 5, 7}, 1.0);
    default: return random_isometry(rng).first;
  }
}

}  // namespace

TEST_CASE("L(omega) closure, T-invariance, shift and subsequence") {
  const Tally t = l_omega_suite(20261015, 200);
  INFO(t.first_failure);
  CHECK(t.trials == 200);
  CHECK(t.failures == 0);
}

TEST_CASE("norm axioms") {
  Rng rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(8);
    std::vector<double> w;
    for (std::size_t i = 0; i < n; ++i) w.push_back(rng.uniform(0.1, 3.0));
    const std::vector<NormSpec> specs{NormSpec::l2(), NormSpec::linf(), NormSpec::weighted(1.0 + 4.0 * rng.uniform(), w),
                                      NormSpec::sup_on({0.5, 1.0, 1.7})};
    const CoeffVec x = random_on(0, n, rng), y = random_on(0, n, rng);
    const cplx a = rng.cnormal();
    for (const auto& s : specs) {
      const double nx = norm(x, s), ny = norm(y, s);
      CHECK(nx > 0.0);
      CHECK(norm(CoeffVec::zeros(0, n), s) == 0.0);
      CHECK(std::abs(norm(a * x, s) - std::abs(a) * nx) <= 1e-12 * std::abs(a) * nx);
      CHECK(norm(x + y, s) <= (nx + ny) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("frechet distance is translation invariant and bounded") {
  Rng rng(2);
  const std::vector<FrechetMetricSpec> specs{FrechetMetricSpec::entire(4), FrechetMetricSpec::punctured(3),
                                             FrechetMetricSpec::disc(5)};
  for (int trial = 0; trial < 200; ++trial) {
    const CoeffVec x = random_on(0, 6, rng), y = random_on(0, 6, rng), z = random_on(0, 6, rng, 10.0);
    for (const auto& s : specs) {
      const double d = frechet_dist(x, y, s);
      CHECK(std::abs(frechet_dist(x + z, y + z, s) - d) <= 1e-12);
      CHECK(d >= 0.0);
      CHECK(d <= s.bound());
      CHECK(frechet_dist(x, y, s) == frechet_dist(y, x, s));
    }
  }
}

TEST_CASE("orbit distance grows with the horizon") {
  Rng rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<PhaseAngle> ph;
    for (int i = 0; i < 4; ++i) ph.push_back(random_phase(rng));
    const OperatorSpec unit = make_diagonal(ph, 0);
    const OperatorSpec contr = make_multiplication({1, 1, 1, 1}, ph, {0.9, 0.5, 1.0, 0.7}, 2.0);
    const CoeffVec x = random_on(0, 4, rng), y = random_on(0, 4, rng);
    const BaseMetric fre{FrechetMetricSpec::entire(3)};
    double prev = 0.0, prev_f = 0.0;
    for (std::uint64_t h = 0; h <= 12; ++h) {
      const double d = dstar_dist(x, y, contr, h);
      const double df = dstar_dist(x, y, contr, h, fre);
      CHECK(d >= prev);
      CHECK(df >= prev_f);
      CHECK(df <= FrechetMetricSpec::entire(3).bound());
      prev = d;
      prev_f = df;
      CHECK(std::abs(dstar_dist(x, y, unit, h) - l2_of(x - y)) <= 1e-12 * l2_of(x - y));
    }
  }
}

TEST_CASE("linearity across families") {
  Rng rng(4);
  for (int trial = 0; trial < 150; ++trial) {
    const OperatorSpec op = random_operator(rng);
    INFO(family_name(op));
    const CoeffVec x = random_vector(op, rng), y = random_vector(op, rng);
    const cplx a = rng.cnormal(), b = rng.cnormal();
    const CoeffVec lhs = reclab::apply(op, a * x + b * y);
    const CoeffVec rhs = a * reclab::apply(op, x) + b * reclab::apply(op, y);
    CHECK(l2_of(lhs - rhs) <= 1e-11 * std::max(1.0, l2_of(lhs)));
  }
}

TEST_CASE("closed-form powers match iterated application") {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const OperatorSpec op = random_operator(rng);
    INFO(family_name(op));
    const CoeffVec x = random_vector(op, rng);
    CoeffVec y = fit_window(op, x);
    double worst = 0.0;
    for (std::uint64_t n = 1; n <= 300; ++n) {
      y = reclab::apply(op, y);
      const CoeffVec p = power(op, n, x);
      worst = std::max(worst, l2_of(p - y) / std::max(1.0, l2_of(p)));
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("exact phases reduce bitwise modulo the period") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PhaseAngle> ph;
    for (int i = 0; i < 5; ++i) {
      const std::int64_t q = 1 + std::int64_t(rng.below(60));
      ph.push_back(PhaseAngle::exact(std::int64_t(rng.below(std::uint64_t(q))), q));
    }
    const OperatorSpec op = make_diagonal(ph);
    const BigInt L = *exact_period(op);
    BigInt n = 1;
    for (int i = 0; i < 3; ++i) n = n * BigInt(rng.below(~0ull)) + BigInt(rng.below(~0ull));
    const CoeffVec x = random_vector(op, rng);
    CHECK(power(op, n, x) == power(op, n % L, x));
    CHECK(power(op, L, x) == x);
  }
}

TEST_CASE("obstruction identity holds at random times") {
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const AugeTapia at = make_auge_tapia(2 + int(rng.below(2)), 16 + int(rng.below(32)), MSchedule::parse("triangular"),
                                         rng.below(4));
    const OperatorSpec op = at;
    const CoeffVec y = random_vector(op, rng);
    BigInt n = 1 + BigInt(rng.below(1ull << 40));
    if (trial % 3 == 0) n = n * at.m.at(at.d + 1 + int(rng.below(std::uint64_t(at.K))));
    for (const auto& s : tapia_obstruction_row(at, y, n)) CHECK(s.relative_gap() < 1e-10);
  }
}

TEST_CASE("return times honour their error bound and grow monotonically") {
  Rng rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<PhaseAngle> ph;
    const int m = 1 + int(rng.below(3));
    for (int i = 0; i < m; ++i) ph.push_back(random_phase(rng));
    const double eps = rng.uniform(0.01, 0.5);
    const auto small = find_return_times(ph, eps, BigInt(20000), 20);
    for (std::size_t i = 0; i < small.times.size(); ++i) {
      double e = 0.0;
      for (const auto& p : ph) e = std::max(e, p.dist_to_one(small.times[i]));
      CHECK(e == small.errors[i]);
      CHECK(e < eps);
      if (i) CHECK(small.times[i - 1] < small.times[i]);
    }
    const auto wide = find_return_times(ph, 2.0 * eps, BigInt(40000), 200);
    for (const auto& t : small.times)
      if (wide.times.size() < 200 || t <= wide.times.back())
        CHECK(std::find(wide.times.begin(), wide.times.end(), t) != wide.times.end());
  }
}

TEST_CASE("quasi-rigid samples pass every product test") {
  Rng rng(9);
  int rigid = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const OperatorSpec op = random_isometry(rng).first;
    std::vector<CoeffVec> sample;
    for (int i = 0; i < 3; ++i) sample.push_back(random_vector(op, rng));
    const auto sched = ToleranceSchedule::harmonic(3, 1.0);
    const auto qr = quasi_rigidity_probe(op, sample, sched, BigInt(20000));
    if (qr.verdict != Verdict::pass) continue;
    ++rigid;
    const auto pr = product_recurrence_test(op, 2, {{sample[0], sample[1]}, {sample[2], sample[0]}, {sample[1], sample[2]}},
                                            sched, BigInt(20000));
    CHECK(pr.all_pass);
  }
  CHECK(rigid >= 10);
}

TEST_CASE("N_omega counts grow along extensions of omega") {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const OperatorSpec op = random_isometry(rng).first;
    const CoeffVec x = random_vector(op, rng);
    const auto g = greedy_returns(op, [&](int) { return std::vector<CoeffVec>{x}; }, ToleranceSchedule::harmonic(8, 0.5),
                                  BigInt(200000), {});
    if (g.failed_k) continue;
    std::size_t prev = 0;
    for (std::size_t len = 1; len <= g.times.size(); ++len) {
      const ReturnSequence w(std::vector<BigInt>(g.times.begin(), g.times.begin() + std::ptrdiff_t(len)), Provenance::brute_force);
      const auto c = n_omega_count(op, x, 0.6, w, {x});
      CHECK(c == len);
      CHECK(c > prev);
      prev = c;
    }
  }
}

TEST_CASE("cutoff errors are exact below the cutoff") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const OperatorSpec op = random_operator(rng);
    const std::vector<CoeffVec> xs{random_vector(op, rng), random_vector(op, rng)};
    const ReturnErrors errs(op, xs);
    for (int k = 0; k < 50; ++k) {
      const std::uint64_t n = 1 + rng.below(100000);
      const double cut = rng.uniform(0.0, 2.0);
      const double exact = errs.max_error(n);
      const double e = errs.max_error(n, cut);
      if (exact < cut) CHECK(e == exact);
      else CHECK(e >= cut);
    }
  }
}

TEST_CASE("scenario building blocks") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    Direction d(2 + rng.below(3));
    for (auto& z : d) z = rng.uniform() < 0.3 ? cplx{} : rng.cnormal();
    const Direction v = scn::orthogonal_direction(d);
    cplx s{};
    double n2 = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      s += d[i] * v[i];
      n2 += std::norm(v[i]);
    }
    CHECK(std::abs(s) <= 1e-14);
    CHECK(std::abs(n2 - 1.0) <= 1e-14);

    const auto m = scn::random_atom_model(rng, 4);
    std::int64_t L = 1;
    int irr = 0;
    for (std::size_t j = 0; j < m.phases.size(); ++j) {
      CHECK((m.weights[j] >= 0.2 && m.weights[j] <= 1.0));
      const double r = m.moduli[j];
      CHECK((r == 1.0 || (r >= 0.3 && r <= 0.7) || (r >= 1.4 && r <= 3.0)));
      if (r != 1.0) continue;
      if (m.phases[j].is_exact()) L = std::lcm(L, static_cast<std::int64_t>(m.phases[j].den()));
      else ++irr;
    }
    CHECK(L <= 990);
    CHECK(irr <= 1);
  }
  for (int trial = 0; trial < 20; ++trial) {
    const cplx a = cis_turns(rng.uniform()), b = rng.cnormal();
    const auto md = scn::micy_draw(rng, 5, a, b, 24, 1e-6);
    double mn = HUGE_VAL;
    for (int q = 1; q <= 24; ++q)
      for (int r = 0; r < q; ++r)
        if (std::gcd(r, q) == 1) {
          const cplx w = b * (std::polar(1.0, 2.0 * kPi * r / q) - 1.0) / (a - 1.0);
          cplx acc{};
          for (int j = 5; j >= 0; --j) acc = acc * w + md.coeffs.at(j);
          mn = std::min(mn, std::abs(acc));
        }
    CHECK(mn >= 1e-6 * l2_of(md.coeffs) * (1 - 1e-9));
  }
  double s1 = 0.0, s2 = 0.0;
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
  }
  CHECK(std::abs(s1 / N) < 0.01);
  CHECK(std::abs(s2 / N - 1.0) < 0.02);
}

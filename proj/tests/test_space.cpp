#include "reclab/dstar.hpp"

#include <catch_amalgamated.hpp>

using namespace reclab;
using Catch::Approx;

TEST_CASE("norm basics") {
  const CoeffVec zero = CoeffVec::zeros(0, 4);
  CHECK(norm(zero, NormSpec::l2()) == 0.0);
  CHECK(norm(zero, NormSpec::linf()) == 0.0);
  CHECK(norm(zero, NormSpec::weighted(3.0, {1, 2, 3, 4})) == 0.0);
  CHECK(norm(zero, NormSpec::sup_on({0.5, 2.0})) == 0.0);

  CHECK(norm(CoeffVec::unit(1, 0, 3), NormSpec::l2()) == 1.0);

  // sum |a_n|^2 beta_n^2 = 1*1 + 1*4
  const CoeffVec v(0, {1.0, 1.0});
  CHECK(norm(v, NormSpec::weighted(2.0, {1.0, 2.0})) == Approx(std::sqrt(1.0 + 4.0)).epsilon(1e-15));
}

TEST_CASE("weight length must match the window") {
  const CoeffVec v(0, {1.0, 1.0, 1.0});
  CHECK_THROWS_AS(norm(v, NormSpec::weighted(2.0, {1.0, 2.0})), ConfigError);
}

TEST_CASE("invalid specs are rejected") {
  const CoeffVec v(0, {1.0});
  CHECK_THROWS_AS(norm(v, NormSpec::weighted(0.5, {1.0})), ConfigError);
  CHECK_THROWS_AS(norm(v, NormSpec::weighted(2.0, {-1.0})), ConfigError);
  CHECK_THROWS_AS(norm(v, NormSpec::sup_on({2.0, 1.0})), ConfigError);
  CHECK_THROWS_AS(CoeffVec(0, {}), ConfigError);
  CHECK_THROWS_AS(CoeffVec(0, {cplx{NAN, 0.0}}), ConfigError);
}

TEST_CASE("sup on circles of a monomial") {
  for (int n : {0, 1, 3}) {
    const CoeffVec z_n = CoeffVec::unit(n, 0, 5);
    CHECK(norm(z_n, NormSpec::sup_on({2.0})) == Approx(std::pow(2.0, n)).epsilon(1e-13));
  }
  const CoeffVec inv = CoeffVec::unit(-1, -2, 4);
  CHECK(norm(inv, NormSpec::sup_on({0.5, 3.0})) == Approx(2.0).epsilon(1e-13));
}

TEST_CASE("mixing windows aligns by index") {
  const CoeffVec a(0, {1.0, 2.0});
  const CoeffVec b(1, {10.0, 20.0});
  const CoeffVec s = a + b;
  CHECK(s.offset() == 0);
  CHECK(s.size() == 3);
  CHECK(s.at(0) == cplx{1.0});
  CHECK(s.at(1) == cplx{12.0});
  CHECK(s.at(2) == cplx{20.0});
  CHECK(s.at(7) == cplx{});
}

TEST_CASE("frechet distance examples") {
  const auto spec = FrechetMetricSpec::single(NormSpec::l2());
  const CoeffVec x(0, {0.3, cplx{0.1, 2.0}});
  CHECK(frechet_dist(x, x, spec) == 0.0);
  const CoeffVec e1 = CoeffVec::unit(1, 0, 2);
  CHECK(frechet_dist(e1, CoeffVec::zeros(0, 2), spec) == Approx(0.5 * 1.0 / 2.0).epsilon(1e-15));
  CHECK(frechet_dist(x + e1, x, spec) == Approx(0.25).epsilon(1e-15));
}

TEST_CASE("frechet scaling and translation") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  const auto spec = FrechetMetricSpec::entire(4);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<cplx> a(6), b(6), c(6);
    for (auto* v : {&a, &b, &c})
      for (auto& z : *v) z = {g(rng), g(rng)};
    const CoeffVec x(0, a), y(0, b), z(0, c);
    CHECK(std::abs(frechet_dist(x + z, y + z, spec) - frechet_dist(x, y, spec)) <= 1e-12);
    const cplx lam = std::polar(1.0, g(rng));
    CHECK(frechet_of((lam - 1.0) * x, spec) <= frechet_of(2.0 * x, spec) + 1e-15);
    CHECK(frechet_dist(x, y, spec) < spec.bound() + 1e-15);
  }
}

TEST_CASE("punctured-plane seminorms use annuli 1/k..k") {
  const auto spec = FrechetMetricSpec::punctured(3);
  REQUIRE(spec.seminorms.size() == 3);
  CHECK(spec.seminorms[2].radii == std::vector<double>{1.0 / 3.0, 3.0});
}

TEST_CASE("dstar distance") {
  const OperatorSpec rot = make_diagonal({PhaseAngle::exact(1, 3), PhaseAngle::approx(0.1234)});
  const OperatorSpec id = make_diagonal({PhaseAngle::exact(0, 1), PhaseAngle::exact(0, 1)});
  const CoeffVec e1 = CoeffVec::unit(1, 1, 2);
  const CoeffVec zero = CoeffVec::zeros(1, 2);
  const CoeffVec x(1, {cplx{0.2, 0.4}, 1.5});
  const BaseMetric fre{FrechetMetricSpec::entire(3)};

  CHECK(dstar_dist(x, zero, rot, 0, fre) == fre.dist(x, zero));
  for (std::uint64_t h : {0, 1, 5, 40}) {
    CHECK(dstar_dist(x, e1, id, h, fre) == fre.dist(x, e1));
    CHECK(dstar_dist(e1, zero, rot, h) == Approx(1.0).epsilon(1e-15));
  }
  double prev = 0.0;
  for (std::uint64_t h = 0; h < 30; ++h) {
    const double d = dstar_dist(x, zero, rot, h, fre);
    CHECK(d >= prev);
    CHECK(d <= FrechetMetricSpec::entire(3).bound() + 1e-15);
    prev = d;
  }
  const OperatorSpec at = make_auge_tapia(2, 4);
  CHECK_THROWS_AS(dstar_dist(CoeffVec::unit(1, 1, 6), CoeffVec::zeros(1, 6), at, 3), NotPowerBounded);
}

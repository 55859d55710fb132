#include "reclab/scenarios.hpp"

#include <catch_amalgamated.hpp>

#include <boost/math/special_functions/zeta.hpp>

#include <set>

using namespace reclab;

namespace {

ScenarioReport run(const std::string& name, std::map<std::string, std::string> params = {},
                   std::optional<std::uint64_t> seed = std::nullopt, unsigned workers = 1) {
  ScenarioConfig c;
  c.name = name;
  c.params = std::move(params);
  c.seed = seed;
  c.workers = workers;
  return run_scenario(c);
}

const Check& check_named(const ScenarioReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c;
  FAIL("no check named " << name);
  return r.checks.front();
}

// Value left by the displayed chain once r is substituted: 1 + 2^{-(1/2+eta)} (2^{eta/2} - 1).
double display_closed_form(double eta) { return 1.0 + std::pow(2.0, -(0.5 + eta)) * (std::pow(2.0, eta / 2) - 1.0); }

}  // namespace

TEST_CASE("catalog names") {
  const std::vector<std::string> expected{"auge-tapia-recurrent-not-quasi-rigid", "td-not-recurrent", "qrnh-rigid-eta-infinite",
                                          "hr-sta-d2", "multiplication-lp", "banach-holo-components", "composition-entire",
                                          "dirichlet-recurrence", "periodic-cascade", "factor-lift", "dstar-isometry"};
  std::vector<std::string> names;
  for (const auto& e : scenario_catalog()) {
    names.push_back(e.name);
    CHECK_FALSE(e.summary.empty());
    std::set<std::string> keys;
    for (const auto& p : e.params) {
      CHECK(keys.insert(p.key).second);
      CHECK_FALSE(p.help.empty());
    }
    // every parameter has a default that validates
    CHECK_NOTHROW(Params(e.name, e.params, {}));
  }
  CHECK(names == expected);
}

TEST_CASE("every scenario passes with defaults") {
  static const std::set<std::string> verdicts{kPass, kFail, kInconclusive};
  for (const auto& e : scenario_catalog()) {
    INFO(e.name);
    const auto r = run(e.name);
    CHECK(r.verdict == kPass);
    CHECK(r.seed == 0);
    CHECK(r.seed_defaulted);
    CHECK(r.runtime_ms == 0.0);
    CHECK(r.params == Params(e.name, e.params, {}).effective());
    REQUIRE_FALSE(r.checks.empty());
    for (const auto& c : r.checks) {
      INFO(c.name);
      CHECK(c.verdict == kPass);
      CHECK(verdicts.count(c.verdict) == 1);
      CHECK_FALSE(c.horizon.empty());
      CHECK(std::isfinite(c.tolerance));
      CHECK(c.data.is_object());
    }
  }
}

TEST_CASE("td-not-recurrent: no common return, obstruction above the bound") {
  const auto r = run("td-not-recurrent");
  const auto& common = check_named(r, "common-return-absent");
  CHECK(common.horizon == "1000000");
  CHECK(common.data.contains("near_miss"));
  CHECK_FALSE(common.data.contains("first_return"));
  const double near = common.data["near_miss"]["error"].get<double>();
  CHECK(near >= 0.01);
  const auto& ob = check_named(r, "obstruction-bound");
  CHECK(ob.data["bound"].get<double>() == near / 8.0);
  CHECK(ob.data["obstruction"]["magnitude"].get<double>() >= ob.data["bound"].get<double>());
  CHECK(ob.data["time"] == common.data["near_miss"]["time"]);
  CHECK(check_named(r, "obstruction-identity").data["worst_relative_gap"].get<double>() < 1e-10);
}

TEST_CASE("Tapia scenarios share the operator and co-occur") {
  const auto a = run("auge-tapia-recurrent-not-quasi-rigid");
  const auto b = run("td-not-recurrent");
  for (const char* k : {"d", "K", "schedule", "g_seed", "noise", "noise_depth", "depth", "eps"}) CHECK(a.params[k] == b.params[k]);
  CHECK(check_named(a, "single-vector-recurrence").data == check_named(b, "single-returns-co-occur").data);
  CHECK(check_named(a, "quasi-rigidity-fails").verdict == kPass);
  CHECK(check_named(b, "common-return-absent").verdict == kPass);
}

TEST_CASE("quasi-rigidity failure sits on a tuple") {
  // d = 3 has a common 0.047-return at n = 3, so the tolerance sits below the d = 3 obstruction.
  const auto r = run("auge-tapia-recurrent-not-quasi-rigid", {{"d", "3"}, {"K", "96"}, {"qr_eps", "0.01"}});
  const auto& qr = check_named(r, "quasi-rigidity-fails");
  const auto& probe = qr.data["probes"]["quasi_rigidity"];
  CHECK(probe["verdict"] == "inconclusive-at-horizon");
  CHECK(probe["data"].value("failed_k", 0) >= 2);
  CHECK(r.verdict == kPass);
}

TEST_CASE("scenario parameter validation") {
  CHECK_THROWS_AS(run("no-such-scenario"), UnknownScenario);
  CHECK_THROWS_WITH(run("no-such-scenario"), Catch::Matchers::ContainsSubstring("dstar-isometry"));
  CHECK_THROWS_WITH(run("dstar-isometry", {{"bogus", "1"}}), Catch::Matchers::ContainsSubstring("unknown parameter bogus"));
  CHECK_THROWS_WITH(run("dstar-isometry", {{"H", "0"}}), Catch::Matchers::ContainsSubstring("out of range"));
  CHECK_THROWS_AS(run("dstar-isometry", {{"H", "ten"}}), ConfigError);
  CHECK_THROWS_AS(run("hr-sta-d2", {{"K", "16"}, {"depth", "32"}}), ConfigError);
  CHECK_THROWS_AS(run("qrnh-rigid-eta-infinite", {{"D", "8"}, {"level", "20"}}), ConfigError);
  CHECK_THROWS_AS(run("periodic-cascade", {{"periods", "3,2"}}), ConfigError);
  CHECK_THROWS_AS(run("dirichlet-recurrence", {{"etas", "1,-1"}}), ConfigError);
}

TEST_CASE("effective parameters are typed") {
  const auto& e = find_scenario("composition-entire");
  const Params p(e.name, e.params, {{"degree", "5"}, {"hr_eps", "1"}});
  CHECK(p.effective()["degree"].is_number_integer());
  CHECK(p.effective()["hr_eps"].is_number_float());
  CHECK(p.effective()["model"].is_string());
  CHECK(p.i("degree") == 5);
  CHECK(p.r("hr_eps") == 1.0);
}

TEST_CASE("seeds drive reports deterministically") {
  const auto a = run("dstar-isometry", {}, 7);
  const auto b = run("dstar-isometry", {}, 7);
  CHECK(emit_report(a) == emit_report(b));
  CHECK_FALSE(a.seed_defaulted);
  CHECK(a.seed == 7);
  const auto c = run("dstar-isometry", {}, 8);
  CHECK(emit_report(a) != emit_report(c));
  const auto d = run("multiplication-lp", {{"models", "10"}}, 3, 1);
  const auto e = run("multiplication-lp", {{"models", "10"}}, 3, 4);
  CHECK(emit_report(d) == emit_report(e));
}

TEST_CASE("timing is opt-in") {
  ScenarioConfig c;
  c.name = "dstar-isometry";
  c.timing = true;
  CHECK(run_scenario(c).runtime_ms > 0.0);
}

TEST_CASE("overall verdict") {
  auto mk = [](std::initializer_list<std::string> vs) {
    std::vector<Check> cs;
    for (const auto& v : vs) cs.push_back({"c", v, "1", 0.0, json::object()});
    return cs;
  };
  CHECK(overall_verdict(mk({kPass, kPass})) == kPass);
  CHECK(overall_verdict(mk({kPass, kInconclusive})) == kInconclusive);
  CHECK(overall_verdict(mk({kInconclusive, kFail, kPass})) == kFail);
  CHECK(overall_verdict({}) == kPass);
}

TEST_CASE("dirichlet t = 2 pi, N = 1 is trivially rigid") {
  const auto r = run("dirichlet-recurrence", {{"t", "6.283185307179586"}, {"N", "1"}});
  const auto& rig = check_named(r, "rigidity");
  CHECK(rig.verdict == kPass);
  for (const auto& p : rig.data["probes"]["product"]["trajectory"]) CHECK(p["error"].get<double>() == 0.0);
}

TEST_CASE("multiplication with phi = 1 returns at every n") {
  const auto r = run("multiplication-lp", {{"models", "1"}});
  const auto& id = check_named(r, "identity-model");
  CHECK(id.data["times"] == json({"1", "2", "3", "4", "5"}));
  const OperatorSpec one = make_multiplication({1.0, 0.5}, {PhaseAngle::exact(0, 1), PhaseAngle::exact(0, 1)}, {1.0, 1.0}, 2.0);
  const auto rs = return_set(one, CoeffVec(0, {1.0, 1.0}), 1e-12, 20);
  REQUIRE(rs.size() == 20);
  for (std::size_t i = 0; i < rs.size(); ++i) CHECK(rs[i] == i + 1);
}

TEST_CASE("zeta bracket contains the Boost value") {
  for (double s : {1.25, 1.5, 2.0, 3.0, 4.5, 11.0}) {
    INFO(s);
    const auto b = zeta_bracket(s, 1e-11);
    const double z = boost::math::zeta(s);
    CHECK(b.lo <= z * (1 + 1e-15));
    CHECK(b.hi >= z * (1 - 1e-15));
    CHECK(b.width() < 1e-11);
    CHECK(std::abs(b.value() - z) < 1e-10);
  }
  CHECK_THROWS_AS(zeta_bracket(1.0), ConfigError);
  CHECK_THROWS_AS(zeta_bracket(0.5), ConfigError);
}

TEST_CASE("r(eta)") {
  const double z2 = kPi * kPi / 6.0;
  const double r1 = 2.0 + std::pow(2.0, 1.5) * (1.0 + 2.0 * std::sqrt(z2)) / (std::sqrt(2.0) - 1.0);
  CHECK(std::abs(compute_dirichlet_r(1.0) - r1) < 1e-9 * r1);
  for (double eta : {0.3, 0.5, 1.0, 2.0, 5.0, 10.0}) {
    INFO(eta);
    const double want = 2.0 + std::pow(2.0, 0.5 + eta) * (1.0 + 2.0 * std::sqrt(boost::math::zeta(1.0 + eta))) /
                                  (std::pow(2.0, eta / 2) - 1.0);
    CHECK(std::abs(compute_dirichlet_r(eta) - want) < 1e-10 * want);
  }
  // r 2^{-eta/2} -> 3 sqrt 2 as zeta(1 + eta) -> 1; increasing once eta is past the pole at 0
  double prev = compute_dirichlet_r(4.0);
  for (double eta = 5.0; eta <= 40.0; eta += 1.0) {
    const double r = compute_dirichlet_r(eta);
    CHECK(r > prev);
    prev = r;
  }
  CHECK(std::abs(compute_dirichlet_r(40.0) * std::pow(2.0, -20.0) - 3.0 * std::sqrt(2.0)) < 1e-5);
  CHECK_THROWS_AS(compute_dirichlet_r(0.0), ConfigError);
  CHECK_THROWS_AS(compute_dirichlet_r(-1.0), ConfigError);
}

TEST_CASE("non-recurrence display") {
  std::vector<int> ells;
  for (int l = 1; l <= 10; ++l) ells.push_back(l);
  for (double eta : {0.5, 1.0, 2.0}) {
    INFO(eta);
    const double r = compute_dirichlet_r(eta);
    CoeffVec f = CoeffVec::zeros(1, 16);
    f.set(2, r);
    const auto c = dirichlet_nonrecurrence_check(eta, f, ells, 1.0);
    CHECK(c.holds);
    CHECK(c.distance == 0.0);
    CHECK(std::abs(c.display - display_closed_form(eta)) < 1e-9);
    CHECK(c.display > 1.0);
    REQUIRE(c.rows.size() == 10);
    for (const auto& w : c.rows) {
      CHECK(w.sigma.real() >= 0.5 + eta);
      CHECK(w.lhs == Catch::Approx(w.direct).epsilon(1e-12));
    }
    CoeffVec g = f;
    g.set(2, r + 0.5);
    CHECK(dirichlet_nonrecurrence_check(eta, g, ells, 1.0).holds);
  }
  Rng rng(5);
  const double r = compute_dirichlet_r(1.0);
  for (int k = 0; k < 100; ++k) {
    CoeffVec h = CoeffVec::zeros(1, 12);
    for (int n = 1; n <= 12; ++n) h.set(n, rng.cnormal());
    CoeffVec g = CoeffVec::zeros(1, 12);
    g.set(2, r);
    g = g + cplx(0.99 / l2_of(h), 0.0) * h;
    const auto c = dirichlet_nonrecurrence_check(1.0, g, ells, 0.0);
    CHECK(c.holds);
    for (const auto& w : c.rows) CHECK(w.lhs > 1.0);
  }
  CoeffVec far = CoeffVec::zeros(1, 4);
  far.set(2, r + 1.5);
  CHECK_THROWS_WITH(dirichlet_nonrecurrence_check(1.0, far, ells), Catch::Matchers::ContainsSubstring("precondition"));
  CHECK_THROWS_AS(dirichlet_nonrecurrence_check(0.0, far, ells), ConfigError);
  CHECK_THROWS_AS(dirichlet_nonrecurrence_check(-0.5, far, ells), ConfigError);
  CHECK_THROWS_AS(dirichlet_nonrecurrence_check(1.0, CoeffVec::zeros(0, 4), ells), ConfigError);
}

TEST_CASE("probe runner") {
  const std::string base =
      "[operator]\nfamily = diagonal-unitary\nphases = 1/2,1/3\n"
      "[probe]\n";
  const auto r = run_probe("in-l-omega", parse_config_text(base + "x = 1;1\ntimes = 6,12,18\nschedule = harmonic:3:0.5\n"));
  CHECK(r.verdict == kPass);
  CHECK(r.scenario == "probe:in-l-omega");
  CHECK(r.checks.at(0).data["probe_verdict"] == "pass");

  const auto f = run_probe("in-l-omega", parse_config_text(base + "x = 1;1\ntimes = 5,7\nschedule = harmonic:2:0.5\n"));
  CHECK(f.verdict == kFail);

  const auto rs = run_probe("return-set", parse_config_text(base + "x = 1;1\neps = 1e-9\nhorizon = 20\n"));
  CHECK(rs.checks.at(0).data["probes"]["return-set"]["data"]["times"] == json({"6", "12", "18"}));

  const auto st = run_probe("stationarity",
                            parse_config_text(base + "times = 6,12,18,24,30\nschedule = harmonic:3:0.5\n"
                                              "[probe.vectors]\n1 = 1;0\n2 = 0;1\n"));
  CHECK(st.verdict == kPass);

  const std::string at = "[operator]\nfamily = auge-tapia\nd = 2\nK = 16\n[probe]\n";
  const auto ob = run_probe("tapia-obstruction", parse_config_text(at + "x = 0;1;0.5\nn = 40\n"));
  CHECK(ob.verdict == kPass);
  CHECK(ob.checks.at(0).data["probes"]["tapia-obstruction"]["data"]["rows"].size() == 16);

  CHECK_THROWS_AS(run_probe("nope", parse_config_text(base)), UnknownScenario);
  CHECK_THROWS_WITH(run_probe("in-l-omega", parse_config_text(base + "x = 1;1\n")),
                    Catch::Matchers::ContainsSubstring("missing key times"));
  CHECK_THROWS_WITH(run_probe("in-l-omega", parse_config_text(base + "x = 1;1\ntimes = 6\ncolour = red\n")),
                    Catch::Matchers::ContainsSubstring("unknown key colour"));
  CHECK_THROWS_AS(run_probe("tapia-obstruction", parse_config_text(base + "x = 1;1\nn = 3\n")), ConfigError);
  CHECK_THROWS_AS(run_probe("in-l-omega", parse_config_text("[probe]\nx = 1\n")), ConfigError);
}

TEST_CASE("schedule strings") {
  CHECK(parse_schedule("harmonic:4:2").eps_at(4) == 0.5);
  CHECK(parse_schedule("geometric:3:0.5:0.5").eps_at(3) == 0.125);
  CHECK(parse_schedule("list:0.3,0.2").final_eps() == 0.2);
  CHECK_THROWS_AS(parse_schedule("harmonic:4"), ConfigError);
  CHECK_THROWS_AS(parse_schedule("cubic:1:1"), ConfigError);
}

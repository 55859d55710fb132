#include "reclab/scenarios.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace reclab;

namespace {

ScenarioReport sample_report() {
  ScenarioReport r;
  r.scenario = "demo";
  r.params = {{"K", 64}, {"eps", 0.01}, {"schedule", "triangular"}};
  r.seed = 18446744073709551615ull;
  r.seed_defaulted = false;
  RecurrenceReport rep;
  rep.probe = "in_L_omega";
  rep.verdict = Verdict::pass;
  rep.horizon = BigInt("123456789012345678901234567890");
  rep.tolerance = 0.1;
  rep.trajectory = {{BigInt(6), 0.0, 0.0}, {BigInt("98765432109876543210"), 1.0 / 3.0, 1e-300}};
  rep.times = ReturnSequence({BigInt(6), BigInt("98765432109876543210")}, Provenance::structured_mk);
  r.checks.push_back({"first", "pass", "structured", 0.1, {{"probes", {{"x", recurrence_json(rep)}}}}});
  r.checks.push_back({"second", "inconclusive-at-horizon", "1000", 1e-12,
                      {{"near_miss", {{"time", "17"}, {"error", 0.1 + 0.2}}},
                       {"odd", {HUGE_VAL, -HUGE_VAL, std::nan("")}},
                       {"trajectory", {{{"time", "3"}, {"error", 2.5}, {"tail_bound", 0.0}}}}}});
  r.verdict = "inconclusive-at-horizon";
  r.runtime_ms = 0.0;
  return r;
}

bool same(const json& a, const json& b) { return emit_canonical(a) == emit_canonical(b); }

void same_action(const OperatorSpec& a, const OperatorSpec& b, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> n;
  const Window w = window(a);
  std::vector<cplx> c(w.size);
  for (auto& z : c) z = {n(g), n(g)};
  const CoeffVec x(w.offset, c);
  for (std::uint64_t k : {1ull, 2ull, 7ull, 40ull}) CHECK(power(a, k, x) == power(b, k, x));
}

}  // namespace

TEST_CASE("report round trip") {
  const auto r = sample_report();
  const std::string text = emit_report(r);
  const auto back = parse_report(text);
  CHECK(emit_report(back) == text);
  CHECK(back.scenario == r.scenario);
  CHECK(back.seed == r.seed);
  CHECK(back.checks.size() == 2);
  CHECK(back.checks[1].tolerance == 1e-12);
  CHECK(back.checks[0].data == canonical(r.checks[0].data));

  // every scenario report survives parse(emit(.))
  for (const char* name : {"dstar-isometry", "periodic-cascade", "factor-lift"}) {
    ScenarioConfig c;
    c.name = name;
    const auto rep = run_scenario(c);
    const auto t = emit_report(rep);
    CHECK(emit_report(parse_report(t)) == t);
    CHECK(parse_report(t) == parse_report(emit_report(parse_report(t))));
  }
}

TEST_CASE("canonical emission") {
  const std::string text = emit_report(sample_report());
  // keys sorted at every level
  CHECK(text.find("\"checks\"") < text.find("\"params\""));
  CHECK(text.find("\"params\"") < text.find("\"runtime_ms\""));
  CHECK(text.find("\"K\"") < text.find("\"eps\""));
  // 17 significant digits, integral doubles keep a decimal point, big integers stay decimal strings
  CHECK(text.find("0.30000000000000004") != std::string::npos);
  CHECK(text.find("0.33333333333333331") != std::string::npos);
  CHECK(text.find("\"runtime_ms\": 0.0") != std::string::npos);
  CHECK(text.find("\"98765432109876543210\"") != std::string::npos);
  CHECK(text.find("18446744073709551615") != std::string::npos);
  CHECK(text.find("[\"inf\", \"-inf\", \"nan\"]") != std::string::npos);
  CHECK(text.back() == '\n');

  CHECK(format_double(1.0) == "1.0");
  CHECK(format_double(-0.0) == "-0.0");
  CHECK(format_double(1e300) == "1.0000000000000001e+300");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(HUGE_VAL) == "\"inf\"");
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, -2.5}) CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
}

TEST_CASE("report parse errors") {
  CHECK_THROWS_AS(parse_report("{"), ConfigError);
  CHECK_THROWS_WITH(parse_report("{\"scenario\": \"x\"}"), Catch::Matchers::ContainsSubstring("missing key"));
  json j = to_json(sample_report());
  j["checks"][0].erase("tolerance");
  CHECK_THROWS_WITH(report_from_json(j), Catch::Matchers::ContainsSubstring("tolerance"));
  j = to_json(sample_report());
  j["runtime_ms"] = "soon";
  CHECK_THROWS_AS(report_from_json(j), ConfigError);
}

TEST_CASE("csv blocks") {
  const std::string csv = emit_csv(sample_report());
  CHECK(csv ==
        "# check first/x\n"
        "time,error,tail_bound\n"
        "6,0.0,0.0\n"
        "98765432109876543210,0.33333333333333331,1e-300\n"
        "# check second\n"
        "time,error,tail_bound\n"
        "3,2.5,0.0\n");
  CHECK(trajectory_csv({{BigInt(4), 0.5, 0.25}}) == "time,error,tail_bound\n4,0.5,0.25\n");
  ScenarioReport empty;
  CHECK(emit_csv(empty).empty());
}

TEST_CASE("key/value config") {
  const std::string text =
      "# comment\n"
      "seed = 7\n"
      "\n"
      "[params]\n"
      "K = 64   \n"
      "eps=0.01\n"
      "[operator.extra]\n"
      "x = (1,2);3\n";
  const json j = parse_kv(text);
  CHECK(j["seed"] == "7");
  CHECK(j["params"]["K"] == "64");
  CHECK(j["params"]["eps"] == "0.01");
  CHECK(j["operator"]["extra"]["x"] == "(1,2);3");
  CHECK(parse_kv(emit_kv(j)) == j);
  CHECK(parse_config_text("{\"seed\": 7, \"params\": {\"eps\": 0.01, \"flag\": true}}") ==
        json({{"seed", "7"}, {"params", {{"eps", "0.01"}, {"flag", "true"}}}}));

  CHECK_THROWS_WITH(parse_kv("a = 1\na = 2\n"), Catch::Matchers::ContainsSubstring("duplicate key a"));
  CHECK_THROWS_WITH(parse_kv("[oops\n"), Catch::Matchers::ContainsSubstring("line 1"));
  CHECK_THROWS_AS(parse_kv("just text\n"), ConfigError);
  CHECK_THROWS_AS(parse_kv("[a..b]\n"), ConfigError);
  CHECK_THROWS_AS(parse_kv("a = 1\n[a]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("{\"a\": }"), ConfigError);
  CHECK_THROWS_AS(read_config_file("/nonexistent/reclab.cfg"), ConfigError);
}

TEST_CASE("scalar coercion") {
  CHECK(to_int("1e6", "h") == 1000000);
  CHECK(to_int("-12", "h") == -12);
  CHECK_THROWS_WITH(to_int("1.5", "h"), Catch::Matchers::ContainsSubstring("parameter h"));
  CHECK_THROWS_AS(to_int("", "h"), ConfigError);
  CHECK(to_real("2.5e-3", "e") == 2.5e-3);
  CHECK_THROWS_AS(to_real("inf", "e"), ConfigError);
  CHECK_THROWS_AS(to_real("1x", "e"), ConfigError);
  CHECK(to_bool("yes", "b"));
  CHECK_FALSE(to_bool("0", "b"));
  CHECK_THROWS_AS(to_bool("maybe", "b"), ConfigError);
  CHECK(parse_complex("(1.5,-2)") == cplx(1.5, -2.0));
  CHECK(parse_complex("3") == cplx(3.0, 0.0));
  CHECK_THROWS_AS(parse_complex("(1,2"), ConfigError);
  CHECK_THROWS_AS(parse_complex("(1,2,3)"), ConfigError);
  for (cplx z : {cplx(0.1, -0.3), cplx(1e-300, 0.0), cplx(-2.0, 1.0 / 3.0)}) CHECK(parse_complex(complex_str(z)) == z);
}

TEST_CASE("operator specs round trip through key/value") {
  std::vector<OperatorSpec> ops{
      make_diagonal({PhaseAngle::exact(1, 3), PhaseAngle::approx(0.25), PhaseAngle::exact(5, 7)}, 2),
      make_auge_tapia(2, 12),
      make_auge_tapia(3, 20, MSchedule::parse("geometric:3"), 4),
      make_qrnh(4, 6),
      make_multiplication({0.5, 1.0}, {PhaseAngle::exact(1, 4), PhaseAngle::approx(0.1)}, {1.0, 0.5}, 3.0),
      make_affine({0.6, 0.8}, {0.1, -0.2}, FunctionModel::entire, 6),
      make_affine({}, {0.3, 0.0}, FunctionModel::entire, 5, PhaseAngle::exact(1, 6)),
      make_dirichlet(1.25, 6),
      make_cascade({2, 3, 5}, 2.0)};
  for (const auto& op : ops) {
    INFO(family_name(op));
    const json kv = operator_to_kv(op);
    const std::string text = emit_kv({{"operator", kv}});
    const OperatorSpec back = operator_from_kv(parse_kv(text)["operator"]);
    CHECK(same(operator_to_kv(back), kv));
    CHECK(window(back).offset == window(op).offset);
    CHECK(window(back).size == window(op).size);
    same_action(op, back, 11);
  }
  CHECK_THROWS_WITH(operator_from_kv(json({{"family", "diagonal-unitary"}})), Catch::Matchers::ContainsSubstring("missing key phases"));
  CHECK_THROWS_WITH(operator_from_kv(json({{"family", "shift"}})), Catch::Matchers::ContainsSubstring("unknown family"));
  CHECK_THROWS_WITH(operator_from_kv(json({{"family", "dirichlet-composition"}, {"s", "1"}})),
                    Catch::Matchers::ContainsSubstring("unknown key s"));
  CHECK_THROWS_AS(operator_from_kv(json({{"family", "auge-tapia"}, {"d", "0"}})), ConfigError);
}

TEST_CASE("vectors through key/value") {
  const OperatorSpec op = make_auge_tapia(2, 6);
  const json s = {{"x", "1;(0,1);0.5"}, {"y", "2"}, {"y_offset", "4"}};
  const CoeffVec x = vector_from_kv(s, "x", op);
  CHECK(x.offset() == window(op).offset);
  CHECK(x.size() == window(op).size);
  CHECK(x.at(2) == cplx(0.0, 1.0));
  CHECK(x.at(4) == cplx{});
  CHECK(vector_from_kv(s, "y", op).at(4) == cplx(2.0, 0.0));
  CHECK(vector_from_kv({{"x", vector_to_kv(x)}}, "x", op) == x);
  CHECK_THROWS_WITH(vector_from_kv(s, "z", op), Catch::Matchers::ContainsSubstring("missing key z"));
  CHECK_THROWS_AS(vector_from_kv({{"x", ";"}}, "x", op), ConfigError);
}

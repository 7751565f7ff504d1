#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bdlie/bdlie.h>

#include <cmath>
#include <cstring>
#include <string>

namespace {

const char* kSpecDecay = R"({"lambda": {"kind": "constant", "params": {"c": 1.0}},
  "mu": {"kind": "constant", "params": {"c": 2.0}}, "beta": 0.0})";

const char* kScenario = R"({
  "spec": {
    "lambda": {"kind": "constant", "params": {"c": 1.0}},
    "mu": {"kind": "constant", "params": {"c": 2.0}},
    "beta": 0.5
  },
  "n0": 1,
  "t_grid": [0.5, 1.0]
})";

struct ProcessGuard {
  bdlie_process* p = nullptr;
  ~ProcessGuard() { bdlie_process_free(p); }
};

struct ScenarioGuard {
  bdlie_scenario* sc = nullptr;
  ~ScenarioGuard() { bdlie_scenario_free(sc); }
};

struct ResultGuard {
  bdlie_result* r = nullptr;
  ~ResultGuard() { bdlie_result_free(r); }
};

} // namespace

TEST_CASE("version string exists") {
  const char* v = bdlie_version();
  REQUIRE(v != nullptr);
  CHECK(std::strlen(v) > 0);
}

TEST_CASE("process creation and parse failures") {
  ProcessGuard g;
  char* err = nullptr;
  CHECK(bdlie_process_from_json(kSpecDecay, &g.p, &err) == BDLIE_OK);
  REQUIRE(g.p != nullptr);
  CHECK(err == nullptr); // untouched on success

  bdlie_process* bad = nullptr;
  const auto st = bdlie_process_from_json(R"({"lambda": 3})", &bad, &err);
  CHECK(st == BDLIE_PARSE);
  CHECK(bad == nullptr);
  REQUIRE(err != nullptr);
  CHECK(std::strlen(err) > 0);
  bdlie_string_free(err);

  err = nullptr;
  CHECK(bdlie_process_from_json(nullptr, &bad, &err) == BDLIE_USAGE);
  bdlie_string_free(err);
}

TEST_CASE("gauge evaluation through the C surface") {
  ProcessGuard g;
  REQUIRE(bdlie_process_from_json(kSpecDecay, &g.p, nullptr) == BDLIE_OK);

  double out[6];
  char* err = nullptr;
  REQUIRE(bdlie_gauge_at(g.p, 1.0, out, &err) == BDLIE_OK);
  CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-14));               // rho = (mu-lambda) t
  CHECK(out[1] == doctest::Approx(2.0 - std::exp(-1.0)).epsilon(1e-14)); // W
  CHECK(out[2] == 0.0);                                               // g1 with beta = 0

  CHECK(bdlie_gauge_at(g.p, -1.0, out, &err) == BDLIE_DOMAIN);
  REQUIRE(err != nullptr);
  bdlie_string_free(err);
  CHECK(bdlie_gauge_at(nullptr, 1.0, out, nullptr) == BDLIE_USAGE);

  SUBCASE("the table is the row-major stack of single evaluations") {
    const double times[3] = {0.25, 0.5, 1.5};
    double table[18];
    REQUIRE(bdlie_gauge_table(g.p, times, 3, table, nullptr) == BDLIE_OK);
    for (int i = 0; i < 3; ++i) {
      double one[6];
      REQUIRE(bdlie_gauge_at(g.p, times[i], one, nullptr) == BDLIE_OK);
      for (int k = 0; k < 6; ++k) CHECK(table[6 * i + k] == one[k]);
    }
    CHECK(bdlie_gauge_table(g.p, times, 0, table, nullptr) == BDLIE_USAGE);
    const double bad_times[2] = {0.5, 0.25};
    CHECK(bdlie_gauge_table(g.p, bad_times, 2, table, nullptr) == BDLIE_PARSE);
  }
}

TEST_CASE("transition probabilities and moments through the C surface") {
  ProcessGuard yule;
  REQUIRE(bdlie_process_from_json(R"({"lambda": {"kind": "constant", "params": {"c": 1.0}},
    "mu": {"kind": "constant", "params": {"c": 0.0}}, "beta": 0.0})",
                                  &yule.p, nullptr) == BDLIE_OK);
  double lp = 0;
  REQUIRE(bdlie_log_transition_prob(yule.p, std::log(2.0), 1, 2, &lp, nullptr) == BDLIE_OK);
  CHECK(lp == doctest::Approx(std::log(0.25)).epsilon(1e-12));

  double* probs = nullptr;
  size_t n = 0;
  double tail = 1;
  REQUIRE(bdlie_transition_pmf(yule.p, std::log(2.0), 1, 1e-10, &probs, &n, &tail, nullptr) ==
          BDLIE_OK);
  REQUIRE(probs != nullptr);
  REQUIRE(n > 2);
  double sum = 0;
  for (size_t m = 0; m < n; ++m) sum += probs[m];
  CHECK(std::abs(sum - 1.0) < 1e-8);
  CHECK(std::abs(tail) < 1e-8);
  CHECK(probs[2] == doctest::Approx(0.25).epsilon(1e-12));
  bdlie_buffer_free(probs);

  ProcessGuard grow;
  REQUIRE(bdlie_process_from_json(R"({"lambda": {"kind": "constant", "params": {"c": 1.0}},
    "mu": {"kind": "constant", "params": {"c": 0.0}}, "beta": 1.0})",
                                  &grow.p, nullptr) == BDLIE_OK);
  double mean = 0;
  REQUIRE(bdlie_mean_from_one(grow.p, std::log(2.0), &mean, nullptr) == BDLIE_OK);
  CHECK(mean == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("scenario lifecycle over the C surface") {
  ScenarioGuard sg;
  char* err = nullptr;
  REQUIRE(bdlie_scenario_parse(kScenario, &sg.sc, &err) == BDLIE_OK);

  char* canon = bdlie_scenario_canonical_json(sg.sc);
  REQUIRE(canon != nullptr);
  CHECK(std::string(canon).find("\"tail_tol\"") != std::string::npos);
  bdlie_string_free(canon);

  bdlie_scenario* bad = nullptr;
  CHECK(bdlie_scenario_parse("{", &bad, &err) == BDLIE_PARSE);
  CHECK(bad == nullptr);
  bdlie_string_free(err);

  SUBCASE("run produces artifacts and honors overrides") {
    ResultGuard rg;
    REQUIRE(bdlie_run(sg.sc, "gauge", nullptr, &rg.r, nullptr) == BDLIE_OK);
    CHECK(bdlie_result_exit_code(rg.r) == 0);
    REQUIRE(bdlie_result_artifact_count(rg.r) == 1);
    CHECK(std::string(bdlie_result_artifact_name(rg.r, 0)) == "gauge.csv");
    CHECK(std::string(bdlie_result_artifact_text(rg.r, 0)).rfind("t,rho,W", 0) == 0);
    CHECK(bdlie_result_artifact_name(rg.r, 5) == nullptr);
    CHECK(std::strlen(bdlie_result_summary(rg.r)) > 0);

    ResultGuard js;
    REQUIRE(bdlie_run(sg.sc, "gauge", R"({"format": "json"})", &js.r, nullptr) == BDLIE_OK);
    CHECK(std::string(bdlie_result_artifact_name(js.r, 0)) == "gauge.json");
  }
  SUBCASE("a failing command still yields a result to inspect") {
    ResultGuard rg;
    REQUIRE(bdlie_run(sg.sc, "fit", nullptr, &rg.r, nullptr) == BDLIE_OK);
    CHECK(bdlie_result_exit_code(rg.r) == BDLIE_USAGE);
    CHECK(bdlie_result_artifact_count(rg.r) == 0);
  }
  SUBCASE("malformed overrides are usage errors") {
    bdlie_result* r = nullptr;
    char* msg = nullptr;
    CHECK(bdlie_run(sg.sc, "gauge", R"({"format": 7})", &r, &msg) == BDLIE_USAGE);
    CHECK(r == nullptr);
    bdlie_string_free(msg);
    CHECK(bdlie_run(nullptr, "gauge", nullptr, &r, nullptr) == BDLIE_USAGE);
  }
}

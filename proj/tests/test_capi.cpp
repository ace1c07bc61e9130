// Exercises the shared-library surface exactly as an external client would:
// through oscl.h only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <string>

#include "oscl.h"

namespace {

const char* kMeasureConfig = R"({
  "p": {"axes": [{"name": "X", "symbols": ["0", "1"]}], "probs": [0.9, 0.1]},
  "q": {"axes": [{"name": "X", "symbols": ["0", "1"]}], "probs": [0.5, 0.5]},
  "eps_grid": [0.2]
})";

}  // namespace

TEST_CASE("version string") {
  CHECK(std::string(oscl_version()).find("oscl") != std::string::npos);
}

TEST_CASE("lifecycle and a measurement") {
  oscl_run* run = nullptr;
  REQUIRE(oscl_run_create("measure", kMeasureConfig, &run) == OSCL_OK);
  REQUIRE(run != nullptr);
  CHECK(oscl_run_report_json(run) == nullptr);  // not executed yet
  CHECK(oscl_run_set_u64(run, "seed", 7) == OSCL_OK);
  CHECK(oscl_run_execute(run) == OSCL_OK);
  const char* report = oscl_run_report_json(run);
  REQUIRE(report != nullptr);
  CHECK(std::string(report).find("\"dh_eps\"") != std::string::npos);
  oscl_run_destroy(run);
}

TEST_CASE("bad json is a config error with a message") {
  oscl_run* run = nullptr;
  CHECK(oscl_run_create("measure", "{not json", &run) == OSCL_ERR_CONFIG);
  CHECK(run == nullptr);
  CHECK(std::strlen(oscl_last_error()) > 0);
}

TEST_CASE("missing fields fail at execution") {
  oscl_run* run = nullptr;
  REQUIRE(oscl_run_create("measure", "{}", &run) == OSCL_OK);
  CHECK(oscl_run_execute(run) == OSCL_ERR_CONFIG);
  CHECK(std::strlen(oscl_last_error()) > 0);
  oscl_run_destroy(run);
}

TEST_CASE("unknown override key") {
  oscl_run* run = nullptr;
  REQUIRE(oscl_run_create("measure", kMeasureConfig, &run) == OSCL_OK);
  CHECK(oscl_run_set_u64(run, "bogus", 1) == OSCL_ERR_CONFIG);
  oscl_run_destroy(run);
}

TEST_CASE("strict premise checking surfaces as a status") {
  const char* cfg = R"({
    "p_xy": {"axes": [{"name": "X", "symbols": ["0", "1"]},
                       {"name": "Y", "symbols": ["0", "1"]}],
             "probs": [0.25, 0.25, 0.25, 0.25]},
    "eps": 0.1, "delta": 0.2, "R_a": 1, "R_b": 1
  })";
  oscl_run* run = nullptr;
  REQUIRE(oscl_run_create("task8", cfg, &run) == OSCL_OK);
  oscl_run_set_u64(run, "trials", 20);
  oscl_run_set_u64(run, "strict", 1);
  CHECK(oscl_run_execute(run) == OSCL_ERR_PREMISE);
  // the report is still available for inspection
  CHECK(oscl_run_report_json(run) != nullptr);
  oscl_run_destroy(run);
}

TEST_CASE("csv is empty for non-sweep reports") {
  oscl_run* run = nullptr;
  REQUIRE(oscl_run_create("measure", kMeasureConfig, &run) == OSCL_OK);
  REQUIRE(oscl_run_execute(run) == OSCL_OK);
  CHECK(std::string(oscl_run_report_csv(run)).empty());
  oscl_run_destroy(run);
}

#include "oscl.h"

#include <optional>
#include <string>

#include "oscl/harness.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

}  // namespace

struct oscl_run {
  std::string subcommand;
  oscl::Json config;
  std::optional<uint64_t> seed;
  std::optional<size_t> trials;
  std::optional<size_t> workers;
  bool strict = false;
  bool executed = false;
  int exit_code = 0;
  std::string report;
  std::string csv;
};

extern "C" {

const char* oscl_version(void) { return "oscl 1.0.0"; }

oscl_status oscl_run_create(const char* subcommand, const char* config_json, oscl_run** out) {
  if (out == nullptr) return OSCL_ERR_CONFIG;
  *out = nullptr;
  if (subcommand == nullptr || config_json == nullptr) {
    set_error("subcommand and config must be non-null");
    return OSCL_ERR_CONFIG;
  }
  oscl::Json cfg = oscl::Json::parse(config_json, nullptr, false);
  if (cfg.is_discarded() || !cfg.is_object()) {
    set_error("config is not a JSON object");
    return OSCL_ERR_CONFIG;
  }
  auto* run = new oscl_run();
  run->subcommand = subcommand;
  run->config = std::move(cfg);
  *out = run;
  return OSCL_OK;
}

oscl_status oscl_run_set_u64(oscl_run* run, const char* key, uint64_t value) {
  if (run == nullptr || key == nullptr) return OSCL_ERR_CONFIG;
  std::string k = key;
  if (k == "seed")
    run->seed = value;
  else if (k == "trials")
    run->trials = size_t(value);
  else if (k == "workers")
    run->workers = size_t(value);
  else if (k == "strict")
    run->strict = value != 0;
  else {
    set_error("unknown override '" + k + "'");
    return OSCL_ERR_CONFIG;
  }
  return OSCL_OK;
}

oscl_status oscl_run_execute(oscl_run* run) {
  if (run == nullptr) return OSCL_ERR_CONFIG;
  try {
    oscl::RunResult res = oscl::run_experiment(run->subcommand, run->config, run->seed,
                                               run->trials, run->workers, run->strict);
    run->executed = true;
    run->exit_code = res.exit_code;
    run->report = res.report.dump(2);
    run->csv = oscl::report_csv(res.report);
    if (res.exit_code == 1) {
      set_error(res.report.value("error", "configuration error"));
      return OSCL_ERR_CONFIG;
    }
    if (res.exit_code == 2) {
      set_error("premise violated");
      return OSCL_ERR_PREMISE;
    }
    return OSCL_OK;
  } catch (const std::exception& e) {
    set_error(e.what());
    return OSCL_ERR_INTERNAL;
  }
}

const char* oscl_run_report_json(const oscl_run* run) {
  if (run == nullptr || !run->executed) return nullptr;
  return run->report.c_str();
}

const char* oscl_run_report_csv(const oscl_run* run) {
  if (run == nullptr || !run->executed) return nullptr;
  return run->csv.c_str();
}

void oscl_run_destroy(oscl_run* run) { delete run; }

const char* oscl_last_error(void) { return g_last_error.c_str(); }

}  // extern "C"

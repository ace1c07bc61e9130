// Command-line front end. Links only the C API of liboscl.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "oscl.h"

namespace {

const char* kSubcommands[] = {"measure",  "convex-split", "decode-bench", "task1",
                              "task1-br", "task2",        "task3",        "task4",
                              "task5",    "task7",        "task8",        "task9",
                              "bounds",   "rates",        "thm13",        "thm12",
                              "golden-check"};

int run_one(const std::string& name, const std::string& config_path, uint64_t seed,
            int64_t trials, int64_t workers, bool strict, const std::string& out_path,
            const std::string& csv_path) {
  std::string config = "{}";
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot open config file '" << config_path << "'\n";
      return 1;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    config = buf.str();
  }

  oscl_run* run = nullptr;
  oscl_status st = oscl_run_create(name.c_str(), config.c_str(), &run);
  if (st != OSCL_OK) {
    std::cerr << "error: " << oscl_last_error() << "\n";
    return 1;
  }
  oscl_run_set_u64(run, "seed", seed);
  if (trials > 0) oscl_run_set_u64(run, "trials", uint64_t(trials));
  if (workers > 0) oscl_run_set_u64(run, "workers", uint64_t(workers));
  oscl_run_set_u64(run, "strict", strict ? 1 : 0);

  st = oscl_run_execute(run);
  const char* report = oscl_run_report_json(run);
  int code = 0;
  if (st == OSCL_ERR_CONFIG || st == OSCL_ERR_INTERNAL) {
    std::cerr << "error: " << oscl_last_error() << "\n";
    code = 1;
  } else if (st == OSCL_ERR_PREMISE) {
    std::cerr << "premise violated (strict mode)\n";
    code = 2;
  }

  if (report != nullptr && code != 1) {
    if (!out_path.empty()) {
      std::ofstream out(out_path);
      out << report << "\n";
    } else {
      std::cout << report << "\n";
    }
    const char* csv = oscl_run_report_csv(run);
    if (csv != nullptr && csv[0] != '\0' && !csv_path.empty()) {
      std::ofstream out(csv_path);
      out << csv;
    }
  }
  oscl_run_destroy(run);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"one-shot source/message compression laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_path, csv_path;
  uint64_t seed = 1;
  int64_t trials = -1, workers = -1;
  bool strict = false;

  const char* env_workers = std::getenv("OSCL_WORKERS");
  if (env_workers != nullptr) workers = std::atoll(env_workers);

  std::string chosen;
  for (const char* name : kSubcommands) {
    CLI::App* sub = app.add_subcommand(name, "");
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", seed, "64-bit seed");
    sub->add_option("--trials", trials, "Monte Carlo trials");
    sub->add_option("--workers", workers, "parallel workers");
    sub->add_option("--out", out_path, "report output path");
    sub->add_option("--csv", csv_path, "CSV output path for sweeps");
    sub->add_flag("--strict", strict, "exit 2 when a theorem premise fails");
    sub->callback([&chosen, name] { chosen = name; });
  }

  CLI11_PARSE(app, argc, argv);
  return run_one(chosen, config_path, seed, trials, workers, strict, out_path, csv_path);
}

#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace oscl {

// Runs `trials` independent jobs partitioned contiguously across workers.
// Each job writes only its own result slot and derives all randomness from
// its trial index, so the folded report is identical for any worker count.
template <typename Result, typename Fn>
std::vector<Result> run_trials(size_t trials, size_t workers, Fn&& per_trial) {
  std::vector<Result> results(trials);
  if (workers == 0) workers = 1;
  workers = std::min(workers, trials == 0 ? size_t{1} : trials);
  if (workers <= 1) {
    for (size_t t = 0; t < trials; ++t) results[t] = per_trial(t);
    return results;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    size_t lo = trials * w / workers;
    size_t hi = trials * (w + 1) / workers;
    pool.emplace_back([&, lo, hi] {
      try {
        for (size_t t = lo; t < hi; ++t) results[t] = per_trial(t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

}  // namespace oscl

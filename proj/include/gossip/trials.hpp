#pragma once

#include <cstdint>
#include <type_traits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gossip/core.hpp"

namespace gossip {

/// How a batch of independent trials is executed.
struct ExecutionPolicy {
  bool parallel = true;
  int jobs = 0;  ///< worker count; 0 = OpenMP default (available cores)
};

int available_workers();

/// Runs `trial_fn(i, stream_i)` for i in [0, trials) one after another, where
/// stream_i = base.trial(i). Reference path for the parallel runner.
template <class Fn>
auto run_trials_serial(std::uint64_t trials, const RngStream& base, Fn&& trial_fn)
    -> std::vector<std::invoke_result_t<Fn&, std::uint64_t, RngStream&>> {
  using Result = std::invoke_result_t<Fn&, std::uint64_t, RngStream&>;
  std::vector<Result> results(trials);
  for (std::uint64_t i = 0; i < trials; ++i) {
    RngStream rng = base.trial(i);
    results[i] = trial_fn(i, rng);
  }
  return results;
}

/// Same contract as run_trials_serial, trials spread over an OpenMP team.
/// Every trial owns its stream and its output slot, so results do not depend
/// on scheduling.
template <class Fn>
auto run_trials_parallel(std::uint64_t trials, const RngStream& base, Fn&& trial_fn,
                         int jobs = 0)
    -> std::vector<std::invoke_result_t<Fn&, std::uint64_t, RngStream&>> {
  using Result = std::invoke_result_t<Fn&, std::uint64_t, RngStream&>;
  static_assert(!std::is_same_v<Result, bool>,
                "std::vector<bool> slots are not independently writable");
  std::vector<Result> results(trials);
  const auto count = static_cast<std::int64_t>(trials);
#ifdef _OPENMP
  const int team = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(team)
#endif
  for (std::int64_t i = 0; i < count; ++i) {
    RngStream rng = base.trial(static_cast<std::uint64_t>(i));
    results[static_cast<std::size_t>(i)] = trial_fn(static_cast<std::uint64_t>(i), rng);
  }
  return results;
}

template <class Fn>
auto run_trials(std::uint64_t trials, const RngStream& base, Fn&& trial_fn,
                const ExecutionPolicy& policy = {}) {
  if (policy.parallel && trials > 1)
    return run_trials_parallel(trials, base, std::forward<Fn>(trial_fn), policy.jobs);
  return run_trials_serial(trials, base, std::forward<Fn>(trial_fn));
}

}  // namespace gossip

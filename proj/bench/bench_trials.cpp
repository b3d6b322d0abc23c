// Serial vs OpenMP timing of the trial runner on a few representative kernels.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include "gossip/estimators.hpp"
#include "gossip/protocols.hpp"

using namespace gossip;

namespace {

double seconds(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void compare(const char* label, const std::function<double(const ExecutionPolicy&)>& kernel) {
  double serial_value = 0, parallel_value = 0;
  const double ts = seconds([&] { serial_value = kernel({false, 0}); });
  const double tp = seconds([&] { parallel_value = kernel({true, 0}); });
  std::printf("%-28s serial %8.3fs  parallel %8.3fs  speedup %5.2fx  %s\n", label, ts, tp,
              tp > 0 ? ts / tp : 0.0, serial_value == parallel_value ? "same" : "DIFFERENT");
}

}  // namespace

int main(int argc, char** argv) {
  const std::uint64_t scale = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  std::printf("workers: %d\n", available_workers());
  const RngStream rng(7, 0);

  compare("first sender n=1000 s=0", [&](const ExecutionPolicy& p) {
    return estimate_event(make_config(1000, 100, 0.0), EventSpec::first_sender_is_source(),
                          100000 * scale, rng, p)
        .estimate;
  });
  compare("map attack n=1024 s=1", [&](const ExecutionPolicy& p) {
    return estimate_attack_precision(make_config(1024, 102, 1.0), AttackSpec::map(0),
                                     2000 * scale, rng, p)
        .precision.estimate;
  });
  compare("spread n=4096 s=0.5", [&](const ExecutionPolicy& p) {
    const auto summary = estimate_spreading(make_config(4096, 410, 0.5), 20 * scale, rng, {}, p);
    return median(std::vector<double>(summary.completion_rounds.begin(),
                                      summary.completion_rounds.end()));
  });
  return 0;
}

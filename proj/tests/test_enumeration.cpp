#include <doctest.h>

#include <cmath>

#include "enumeration.hpp"
#include "gossip/adversary.hpp"
#include "gossip/protocols.hpp"

using namespace gossip;
using oracle::Observation;
using oracle::Rational;

namespace {

Observation truncate(const ObservedSequence& obs, std::size_t len, bool completed) {
  Observation out;
  for (std::size_t k = 0; k < obs.size() && k < len; ++k)
    out.senders.push_back(obs.entries[k].sender.value);
  out.complete = completed && obs.size() < len;
  return out;
}

}  // namespace

TEST_CASE("observation laws are probability distributions") {
  for (auto s : {Rational(0), Rational(1, 2), Rational(1)})
    for (std::size_t len : {1u, 3u}) {
      Rational total = 0;
      for (const auto& [obs, p] : oracle::observation_law(4, 1, s, 0, len)) {
        CHECK(p > 0);
        CHECK(obs.senders.size() <= len);
        total += p;
      }
      CHECK(total == 1);
    }
}

TEST_CASE("s=0 first observed sender is the source with probability (f+1)/n") {
  for (std::uint32_t n : {4u, 5u, 6u}) {
    for (std::uint32_t f : {1u, 2u}) {
      Rational p = 0;
      for (const auto& [obs, q] : oracle::observation_law(n, f, Rational(0), 0, 1))
        if (!obs.senders.empty() && obs.senders[0] == 0) p += q;
      CHECK(p == Rational(f + 1, n));
    }
  }
}

TEST_CASE("oracle law matches the simulator") {
  // chi-square of trunc_2(S) at n=4, f=1, s=1/2
  const auto law = oracle::observation_law(4, 1, Rational(1, 2), 0, 2);
  const auto cfg = make_config(4, 1, 0.5);
  std::map<Observation, double> counts;
  const int runs = 40000;
  for (int i = 0; i < runs; ++i) {
    RngStream rng(99, static_cast<std::uint64_t>(i));
    const auto trace = run_async(cfg, rng);
    counts[truncate(observe(trace), 2, trace.completed())] += 1;
  }
  double chi2 = 0;
  int cells = 0;
  double pooled_expected = 0, pooled_observed = 0;
  for (const auto& [obs, p] : law) {
    const double expected = static_cast<double>(p) * runs;
    const double observed = counts.count(obs) ? counts[obs] : 0.0;
    counts.erase(obs);
    if (expected < 5) {
      pooled_expected += expected;
      pooled_observed += observed;
      continue;
    }
    chi2 += (observed - expected) * (observed - expected) / expected;
    ++cells;
  }
  CHECK(counts.empty());  // nothing outside the oracle's support
  if (pooled_expected > 0) {
    chi2 += (pooled_observed - pooled_expected) * (pooled_observed - pooled_expected) / pooled_expected;
    ++cells;
  }
  const double df = cells - 1;
  const double crit = df * std::pow(1 - 2 / (9 * df) + 3.09 * std::sqrt(2 / (9 * df)), 3);
  CHECK_MESSAGE(chi2 < crit, "chi2 " << chi2 << " df " << df);
}

TEST_CASE("first-in-prior is the MAP estimate on small instances") {
  for (auto s : {Rational(0), Rational(1, 3), Rational(1)}) {
    const auto check = oracle::check_first_in_prior(4, 1, s, 5);
    CHECK(check.priors == 7);
    CHECK(check.comparisons > 0);
    CHECK_MESSAGE(check.violations.empty(), (check.violations.empty() ? "" : check.violations.front()));
  }
}

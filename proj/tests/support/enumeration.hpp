#pragma once

// Exact law of the curious nodes' observation for tiny asynchronous runs.
// Test-only oracle: exponential in n, exact rational arithmetic.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gossip::oracle {

using Rational = boost::multiprecision::cpp_rational;

/// First `max_len` observed senders. `complete` marks a run that terminated
/// before producing more entries, so `senders` is the whole observation.
struct Observation {
  std::vector<std::uint32_t> senders;
  bool complete = false;

  auto operator<=>(const Observation&) const = default;
};

using ObservationLaw = std::map<Observation, Rational>;

/// Law of trunc_max_len(S) under the parameterized protocol with curious nodes n-f..n-1.
ObservationLaw observation_law(std::uint32_t n, std::uint32_t f, const Rational& s,
                               std::uint32_t source, std::size_t max_len);

struct PriorCheck {
  std::size_t priors = 0;
  std::size_t sequences = 0;     ///< (prior, sequence) pairs with a prior sender
  std::size_t comparisons = 0;
  std::vector<std::string> violations;
};

/// For every non-empty prior over non-curious nodes and every reachable
/// truncated observation containing a prior member, checks that the first
/// such member has the largest likelihood among the prior.
PriorCheck check_first_in_prior(std::uint32_t n, std::uint32_t f, const Rational& s,
                                std::size_t max_len);

}  // namespace gossip::oracle

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gossip/core.hpp"

namespace gossip {

struct AttackOutcome {
  std::optional<NodeId> predicted;  ///< empty when the attack abstains
  bool correct = false;
  std::optional<std::size_t> rank_of_source;  ///< t_d of the true source

  bool abstained() const { return !predicted.has_value(); }
};

/// Order-preserving subsequence of events sent to curious nodes.
ObservedSequence observe(const ExecutionTrace& trace);

/// Same subsequence, each entry tagged with its index in the full trace.
TimedObservedSequence observe_timed(const ExecutionTrace& trace);

/// MAP estimator under a uniform prior over `prior`: the sender of the first
/// entry whose sender belongs to the prior. Without such an entry the
/// prediction is uniform over the prior.
AttackOutcome map_attack(const ObservedSequence& observed,
                         std::span<const NodeId> prior, RngStream& rng);

/// First `k` distinct senders of one observation, in order of appearance.
std::vector<NodeId> first_distinct_senders(const ObservedSequence& observed,
                                           std::size_t k);

/// Multi-rumor intersection attack over instances sharing one source.
///
/// Each instance contributes its first `k` distinct senders. The prediction is
/// the node present in the most instances; ties go to the smallest earliest
/// rank across instances, then uniformly at random. Abstains when every
/// observation is empty.
AttackOutcome multi_rumor_attack(std::span<const ObservedSequence> observations,
                                 std::size_t k, RngStream& rng);

/// Silence detection against delayed-start gossip: predicts the first
/// observed sender if it does not reappear as a sender among entries 1..r,
/// abstains otherwise (or when nothing was observed).
AttackOutcome silence_attack(const ObservedSequence& observed, std::size_t r);

/// ceil(ln(n)^2).
std::size_t default_silence_window(std::uint32_t n);

/// Scores a prediction against the observation's ground truth.
AttackOutcome score(std::optional<NodeId> predicted,
                    const ObservedSequence& observed);

}  // namespace gossip

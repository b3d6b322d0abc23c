#include "gossip/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace gossip {

ObservedSequence observe(const ExecutionTrace& trace) {
  ObservedSequence out{trace.config.n, trace.config.source, {}};
  for (const Event& e : trace.events)
    if (trace.config.is_curious(e.receiver)) out.entries.push_back(e);
  return out;
}

TimedObservedSequence observe_timed(const ExecutionTrace& trace) {
  TimedObservedSequence out{trace.config.n, trace.config.source, {}};
  for (std::size_t t = 0; t < trace.events.size(); ++t) {
    const Event& e = trace.events[t];
    if (trace.config.is_curious(e.receiver))
      out.entries.push_back({t, e.sender, e.receiver});
  }
  return out;
}

AttackOutcome score(std::optional<NodeId> predicted,
                    const ObservedSequence& observed) {
  AttackOutcome out;
  out.predicted = predicted;
  out.correct = predicted && *predicted == observed.true_source;
  out.rank_of_source = observed.sender_rank(observed.true_source);
  return out;
}

AttackOutcome map_attack(const ObservedSequence& observed,
                         std::span<const NodeId> prior, RngStream& rng) {
  if (prior.empty()) throw std::invalid_argument("map_attack: empty prior");
  for (const Event& e : observed.entries)
    if (std::find(prior.begin(), prior.end(), e.sender) != prior.end())
      return score(e.sender, observed);
  return score(prior[rng.uniform_below(prior.size())], observed);
}

std::vector<NodeId> first_distinct_senders(const ObservedSequence& observed,
                                           std::size_t k) {
  std::vector<NodeId> out;
  for (const Event& e : observed.entries) {
    if (out.size() >= k) break;
    if (std::find(out.begin(), out.end(), e.sender) == out.end())
      out.push_back(e.sender);
  }
  return out;
}

AttackOutcome multi_rumor_attack(std::span<const ObservedSequence> observations,
                                 std::size_t k, RngStream& rng) {
  if (k == 0) throw std::invalid_argument("multi_rumor_attack: k must be >= 1");
  if (observations.empty())
    throw std::invalid_argument("multi_rumor_attack: no observations");

  struct Tally {
    std::size_t instances = 0;
    std::size_t earliest = std::numeric_limits<std::size_t>::max();
  };
  std::unordered_map<std::uint32_t, Tally> tally;
  for (const auto& obs : observations) {
    const auto senders = first_distinct_senders(obs, k);
    for (std::size_t rank = 0; rank < senders.size(); ++rank) {
      Tally& t = tally[senders[rank].value];
      ++t.instances;
      t.earliest = std::min(t.earliest, rank);
    }
  }
  if (tally.empty()) return score(std::nullopt, observations.front());

  std::vector<std::uint32_t> best;
  Tally best_tally;
  for (const auto& [node, t] : tally) {
    const bool better = t.instances > best_tally.instances ||
                        (t.instances == best_tally.instances &&
                         t.earliest < best_tally.earliest);
    if (better) {
      best_tally = t;
      best.assign(1, node);
    } else if (t.instances == best_tally.instances &&
               t.earliest == best_tally.earliest) {
      best.push_back(node);
    }
  }
  // Hash-map iteration order is unspecified; sort before the random draw.
  std::sort(best.begin(), best.end());
  const NodeId pick{best[best.size() == 1 ? 0 : rng.uniform_below(best.size())]};
  return score(pick, observations.front());
}

AttackOutcome silence_attack(const ObservedSequence& observed, std::size_t r) {
  if (r == 0) throw std::invalid_argument("silence_attack: r must be >= 1");
  if (observed.empty()) return score(std::nullopt, observed);
  const NodeId first = observed.entries.front().sender;
  const std::size_t end = std::min(observed.size(), r + 1);
  for (std::size_t t = 1; t < end; ++t)
    if (observed.entries[t].sender == first) return score(std::nullopt, observed);
  return score(first, observed);
}

std::size_t default_silence_window(std::uint32_t n) {
  const double l = std::log(static_cast<double>(n));
  return static_cast<std::size_t>(std::ceil(l * l));
}

}  // namespace gossip

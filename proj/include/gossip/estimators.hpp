#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "gossip/core.hpp"
#include "gossip/trials.hpp"

namespace gossip {

/// Two-sided 99% normal quantile.
inline constexpr double kZ99 = 2.576;

/// Bernoulli frequency with a 99% normal-approximation half-width.
struct EstimateResult {
  double estimate = 0.0;
  std::uint64_t trials = 0;
  double ci_half_width = 0.0;
  std::uint64_t raw_successes = 0;
  std::uint64_t incomplete = 0;  ///< runs that hit the step cap

  /// trials * estimate < 20: the normal approximation is not trustworthy.
  bool low_count() const { return raw_successes < 20; }
};

EstimateResult make_estimate(std::uint64_t successes, std::uint64_t trials,
                             std::uint64_t incomplete = 0);

/// Boolean event on an observation. `node` left empty binds to the source of
/// the reference configuration at evaluation time.
struct EventSpec {
  enum class Kind {
    first_sender_is,         ///< S_0 = node
    rank_le,                 ///< node appears as sender at some rank <= r
    timed_first_disclosure,  ///< the very first tell_gossip (t = 0) goes from node to a curious node
  };

  Kind kind = Kind::first_sender_is;
  std::optional<NodeId> node;
  std::size_t rank = 0;

  static EventSpec first_sender_is(NodeId node) { return {Kind::first_sender_is, node, 0}; }
  static EventSpec first_sender_is_source() { return {Kind::first_sender_is, std::nullopt, 0}; }
  static EventSpec source_rank_le(std::size_t r) { return {Kind::rank_le, std::nullopt, r}; }
  static EventSpec node_rank_le(NodeId node, std::size_t r) { return {Kind::rank_le, node, r}; }
  static EventSpec timed_first_disclosure() {
    return {Kind::timed_first_disclosure, std::nullopt, 0};
  }
};

/// Evaluates `event` on a (possibly partial) observation.
bool event_holds(const EventSpec& event, const TimedObservedSequence& observed,
                 NodeId bound_source);

/// True once further observations cannot change event_holds.
bool event_decided(const EventSpec& event, const TimedObservedSequence& observed,
                   NodeId bound_source, std::uint64_t steps_seen);

/// Frequency of `event` over independent runs of the configured protocol.
/// Runs stop as soon as the event is decided; capped runs are evaluated on
/// their partial observation and counted in `incomplete`.
EstimateResult estimate_event(const GossipConfig& config, const EventSpec& event,
                              std::uint64_t trials, const RngStream& rng,
                              const ExecutionPolicy& policy = {});

/// One simulation per trial, every event of the family evaluated on it.
std::vector<EstimateResult> estimate_events(const GossipConfig& config,
                                            const std::vector<EventSpec>& events,
                                            NodeId bound_source, std::uint64_t trials,
                                            const RngStream& rng,
                                            const ExecutionPolicy& policy = {});

struct DpGapResult {
  double gap = 0.0;             ///< max over the family of p_i(E) - p_j(E)
  std::size_t best_event = 0;   ///< argmax
  std::vector<EstimateResult> p_i;
  std::vector<EstimateResult> p_j;

  /// Half-width of the difference at the argmax (independent samples).
  double ci_half_width() const;
};

/// Empirical lower estimate of delta at epsilon = 0 restricted to `events`.
/// Unbound event nodes refer to config_i's source. config_j runs on the
/// stream with the top bit of the stream index set.
DpGapResult estimate_dp_gap(const GossipConfig& config_i, const GossipConfig& config_j,
                            const std::vector<EventSpec>& events, std::uint64_t trials,
                            const RngStream& rng, const ExecutionPolicy& policy = {});

/// Frequency of the source reaching a curious node before it first mutes,
/// measured on the asynchronous engine halted at that decision.
EstimateResult estimate_prefix_disclosure(const GossipConfig& config,
                                          std::uint64_t trials, const RngStream& rng,
                                          const ExecutionPolicy& policy = {});

struct AttackSpec {
  enum class Kind { map, multi_rumor, silence };

  Kind kind = Kind::map;
  std::uint32_t prior_size = 0;  ///< map: 0 = every non-curious node
  std::uint32_t rumors = 1;      ///< multi_rumor: instances m per trial
  std::size_t k = 10;            ///< multi_rumor: distinct senders per instance
  std::size_t window = 0;        ///< silence: r; 0 = ceil(ln(n)^2)

  static AttackSpec map(std::uint32_t prior_size = 0) { return {Kind::map, prior_size, 1, 10, 0}; }
  static AttackSpec multi_rumor(std::uint32_t m, std::size_t k = 10) {
    return {Kind::multi_rumor, 0, m, k, 0};
  }
  static AttackSpec silence(std::size_t r = 0) { return {Kind::silence, 0, 1, 10, r}; }

  /// The attack's size parameter: |prior|, m or r (defaults resolved for n).
  std::uint64_t parameter(std::uint32_t n, std::uint32_t f) const;
};

std::string_view to_string(AttackSpec::Kind kind);
std::optional<AttackSpec::Kind> parse_attack_kind(std::string_view text);

struct AttackPrecision {
  EstimateResult precision;  ///< abstentions count as failures
  EstimateResult confident;  ///< successes over non-abstaining trials
  std::uint64_t abstentions = 0;

  double abstain_rate() const {
    return precision.trials ? static_cast<double>(abstentions) / precision.trials : 0.0;
  }
};

/// Each trial draws the true source uniformly among non-curious nodes; for
/// multi_rumor it runs `rumors` independent executions from that source.
AttackPrecision estimate_attack_precision(const GossipConfig& config,
                                          const AttackSpec& attack, std::uint64_t trials,
                                          const RngStream& rng,
                                          const ExecutionPolicy& policy = {});

struct SpreadOptions {
  std::uint64_t max_rounds = 0;    ///< 0 = unlimited
  double late_threshold = 0.99;    ///< informed fraction opening the plateau window
};

struct RoundQuantiles {
  std::uint64_t round = 0;
  double informed_med = 0, informed_p10 = 0, informed_p90 = 0;
  double active_med = 0, active_p10 = 0, active_p90 = 0;
};

struct SpreadingSummary {
  std::vector<RoundQuantiles> trajectory;  ///< fractions of n
  std::vector<std::uint64_t> completion_rounds;
  std::vector<std::uint64_t> total_messages;
  std::vector<double> late_active;  ///< per completed run
  std::uint64_t capped = 0;
  std::uint64_t trials = 0;
};

/// Runs the synchronous engine `trials` times. Capped runs are excluded from
/// the completion statistics and counted. A run that already finished keeps
/// contributing its final informed and active fractions to later rounds.
SpreadingSummary estimate_spreading(const GossipConfig& config, std::uint64_t trials,
                                    const RngStream& rng, const SpreadOptions& options = {},
                                    const ExecutionPolicy& policy = {});

/// Mean active fraction over the rounds whose informed fraction exceeds
/// `threshold`; nullopt if no round qualifies.
std::optional<double> late_active_fraction(const RoundTrace& rounds, std::uint32_t n,
                                           double threshold);

/// Linear-interpolation quantile (q in [0,1]) of an unsorted sample.
double quantile(std::vector<double> sample, double q);
double median(std::vector<double> sample);

}  // namespace gossip

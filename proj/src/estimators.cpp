#include "gossip/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gossip/adversary.hpp"
#include "gossip/protocols.hpp"

namespace gossip {

int available_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

EstimateResult make_estimate(std::uint64_t successes, std::uint64_t trials,
                             std::uint64_t incomplete) {
  EstimateResult r;
  r.trials = trials;
  r.raw_successes = successes;
  r.incomplete = incomplete;
  if (trials == 0) return r;
  r.estimate = static_cast<double>(successes) / static_cast<double>(trials);
  r.ci_half_width = kZ99 * std::sqrt(r.estimate * (1.0 - r.estimate) / trials);
  return r;
}

// ---------------------------------------------------------------------------
// Events

namespace {

NodeId bind(const EventSpec& e, NodeId source) { return e.node.value_or(source); }

}  // namespace

bool event_holds(const EventSpec& event, const TimedObservedSequence& observed,
                 NodeId bound_source) {
  const NodeId node = bind(event, bound_source);
  const auto& entries = observed.entries;
  switch (event.kind) {
    case EventSpec::Kind::first_sender_is:
      return !entries.empty() && entries.front().sender == node;
    case EventSpec::Kind::rank_le: {
      const std::size_t end = std::min(entries.size(), event.rank + 1);
      for (std::size_t t = 0; t < end; ++t)
        if (entries[t].sender == node) return true;
      return false;
    }
    case EventSpec::Kind::timed_first_disclosure:
      return !entries.empty() && entries.front().t == 0 && entries.front().sender == node;
  }
  return false;
}

bool event_decided(const EventSpec& event, const TimedObservedSequence& observed,
                   NodeId bound_source, std::uint64_t steps_seen) {
  switch (event.kind) {
    case EventSpec::Kind::first_sender_is:
      return !observed.entries.empty();
    case EventSpec::Kind::rank_le:
      return observed.entries.size() > event.rank ||
             event_holds(event, observed, bound_source);
    case EventSpec::Kind::timed_first_disclosure:
      return steps_seen >= 1;
  }
  return true;
}

namespace {

struct EventTrial {
  std::vector<std::uint8_t> holds;
  std::uint8_t incomplete = 0;
};

EventTrial run_event_trial(const GossipConfig& config,
                           const std::vector<EventSpec>& events, NodeId bound,
                           RngStream& rng) {
  TimedObservedSequence observed{config.n, config.source, {}};
  std::uint64_t steps = 0;
  auto all_decided = [&] {
    return std::all_of(events.begin(), events.end(), [&](const EventSpec& e) {
      return event_decided(e, observed, bound, steps);
    });
  };
  const StepHook hook = [&](const StepInfo& info) {
    steps = info.step + 1;
    if (config.is_curious(info.event.receiver))
      observed.entries.push_back({info.step, info.event.sender, info.event.receiver});
    return !all_decided();
  };
  const ExecutionTrace trace = run_protocol(config, rng, hook);

  EventTrial out;
  out.incomplete = trace.status == RunStatus::capped;
  out.holds.reserve(events.size());
  for (const auto& e : events) out.holds.push_back(event_holds(e, observed, bound));
  return out;
}

std::vector<EstimateResult> tally_events(const std::vector<EventTrial>& runs,
                                         std::size_t event_count) {
  std::vector<std::uint64_t> hits(event_count, 0);
  std::uint64_t incomplete = 0;
  for (const auto& r : runs) {
    incomplete += r.incomplete;
    for (std::size_t e = 0; e < event_count; ++e) hits[e] += r.holds[e];
  }
  std::vector<EstimateResult> out;
  out.reserve(event_count);
  for (std::size_t e = 0; e < event_count; ++e)
    out.push_back(make_estimate(hits[e], runs.size(), incomplete));
  return out;
}

}  // namespace

std::vector<EstimateResult> estimate_events(const GossipConfig& config,
                                            const std::vector<EventSpec>& events,
                                            NodeId bound_source, std::uint64_t trials,
                                            const RngStream& rng,
                                            const ExecutionPolicy& policy) {
  if (trials == 0) throw std::invalid_argument("estimate_events: trials must be >= 1");
  if (events.empty()) throw std::invalid_argument("estimate_events: empty event family");
  config.validate();
  const auto runs = run_trials(
      trials, rng,
      [&](std::uint64_t, RngStream& trial_rng) {
        return run_event_trial(config, events, bound_source, trial_rng);
      },
      policy);
  return tally_events(runs, events.size());
}

EstimateResult estimate_event(const GossipConfig& config, const EventSpec& event,
                              std::uint64_t trials, const RngStream& rng,
                              const ExecutionPolicy& policy) {
  return estimate_events(config, {event}, config.source, trials, rng, policy).front();
}

double DpGapResult::ci_half_width() const {
  if (p_i.empty()) return 0.0;
  const auto& a = p_i[best_event];
  const auto& b = p_j[best_event];
  const double var = a.estimate * (1 - a.estimate) / a.trials +
                     b.estimate * (1 - b.estimate) / b.trials;
  return kZ99 * std::sqrt(var);
}

DpGapResult estimate_dp_gap(const GossipConfig& config_i, const GossipConfig& config_j,
                            const std::vector<EventSpec>& events, std::uint64_t trials,
                            const RngStream& rng, const ExecutionPolicy& policy) {
  config_i.validate();
  config_j.validate();
  if (config_i.n != config_j.n || config_i.f != config_j.f || config_i.s != config_j.s ||
      config_i.variant != config_j.variant || config_i.step_cap != config_j.step_cap)
    throw std::invalid_argument("estimate_dp_gap: configurations differ beyond the source");
  if (config_i.source == config_j.source)
    throw std::invalid_argument("estimate_dp_gap: sources must differ");

  const NodeId bound = config_i.source;
  const RngStream rng_j(rng.master_seed(), rng.stream_index() | (std::uint64_t{1} << 63));

  DpGapResult out;
  out.p_i = estimate_events(config_i, events, bound, trials, rng, policy);
  out.p_j = estimate_events(config_j, events, bound, trials, rng_j, policy);
  out.gap = -1.0;
  for (std::size_t e = 0; e < events.size(); ++e) {
    const double g = out.p_i[e].estimate - out.p_j[e].estimate;
    if (g > out.gap) {
      out.gap = g;
      out.best_event = e;
    }
  }
  return out;
}

EstimateResult estimate_prefix_disclosure(const GossipConfig& config,
                                          std::uint64_t trials, const RngStream& rng,
                                          const ExecutionPolicy& policy) {
  if (trials == 0) throw std::invalid_argument("estimate_prefix_disclosure: trials must be >= 1");
  if (config.variant != Variant::parameterized)
    throw std::invalid_argument("estimate_prefix_disclosure: parameterized gossip only");
  config.validate();

  struct Outcome {
    std::uint8_t disclosed = 0;
    std::uint8_t undecided = 0;
  };
  const auto runs = run_trials(
      trials, rng,
      [&](std::uint64_t, RngStream& trial_rng) {
        Outcome out;
        bool decided = false;
        const StepHook hook = [&](const StepInfo& info) {
          if (info.event.sender != config.source) return true;
          if (config.is_curious(info.event.receiver)) {
            out.disclosed = 1;
            decided = true;
          } else if (!info.sender_stays) {
            decided = true;
          }
          return !decided;
        };
        run_async(config, trial_rng, hook);
        out.undecided = !decided;
        return out;
      },
      policy);

  std::uint64_t hits = 0, undecided = 0;
  for (const auto& r : runs) {
    hits += r.disclosed;
    undecided += r.undecided;
  }
  return make_estimate(hits, trials, undecided);
}

// ---------------------------------------------------------------------------
// Attacks

std::string_view to_string(AttackSpec::Kind kind) {
  switch (kind) {
    case AttackSpec::Kind::map:
      return "map";
    case AttackSpec::Kind::multi_rumor:
      return "multi_rumor";
    case AttackSpec::Kind::silence:
      return "silence";
  }
  return "?";
}

std::optional<AttackSpec::Kind> parse_attack_kind(std::string_view text) {
  if (text == "map") return AttackSpec::Kind::map;
  if (text == "multi_rumor") return AttackSpec::Kind::multi_rumor;
  if (text == "silence") return AttackSpec::Kind::silence;
  return std::nullopt;
}

std::uint64_t AttackSpec::parameter(std::uint32_t n, std::uint32_t f) const {
  switch (kind) {
    case Kind::map:
      return (prior_size == 0 || prior_size > n - f) ? n - f : prior_size;
    case Kind::multi_rumor:
      return rumors;
    case Kind::silence:
      return window == 0 ? default_silence_window(n) : window;
  }
  return 0;
}

namespace {

struct AttackTrial {
  std::uint8_t correct = 0;
  std::uint8_t abstained = 0;
  std::uint8_t incomplete = 0;
};

std::vector<NodeId> draw_prior(const GossipConfig& config, std::uint32_t size,
                               RngStream& rng) {
  std::vector<NodeId> honest = config.honest_nodes();
  std::swap(honest[0], honest[config.source.value]);
  for (std::uint32_t i = 1; i < size; ++i) {
    const auto j = i + rng.uniform_below(honest.size() - i);
    std::swap(honest[i], honest[j]);
  }
  honest.resize(size);
  return honest;
}

AttackTrial run_map_trial(const GossipConfig& config, std::uint32_t prior_size,
                          RngStream& rng) {
  const auto prior = draw_prior(config, prior_size, rng);
  std::vector<std::uint8_t> in_prior(config.n, 0);
  for (NodeId p : prior) in_prior[p.value] = 1;
  const StepHook hook = [&](const StepInfo& info) {
    return !(config.is_curious(info.event.receiver) && in_prior[info.event.sender.value]);
  };
  const ExecutionTrace trace = run_protocol(config, rng, hook);
  const AttackOutcome outcome = map_attack(observe(trace), prior, rng);
  return {static_cast<std::uint8_t>(outcome.correct), 0,
          static_cast<std::uint8_t>(trace.status == RunStatus::capped)};
}

ObservedSequence observe_distinct_prefix(const GossipConfig& config, std::size_t k,
                                         RngStream& rng, bool& capped) {
  std::vector<NodeId> distinct;
  const StepHook hook = [&](const StepInfo& info) {
    if (!config.is_curious(info.event.receiver)) return true;
    if (std::find(distinct.begin(), distinct.end(), info.event.sender) == distinct.end())
      distinct.push_back(info.event.sender);
    return distinct.size() < k;
  };
  const ExecutionTrace trace = run_protocol(config, rng, hook);
  capped = capped || trace.status == RunStatus::capped;
  return observe(trace);
}

AttackTrial run_multi_rumor_trial(const GossipConfig& config, const AttackSpec& attack,
                                  RngStream& rng) {
  std::vector<ObservedSequence> observations;
  observations.reserve(attack.rumors);
  bool capped = false;
  for (std::uint32_t m = 0; m < attack.rumors; ++m)
    observations.push_back(observe_distinct_prefix(config, attack.k, rng, capped));
  const AttackOutcome outcome = multi_rumor_attack(observations, attack.k, rng);
  return {static_cast<std::uint8_t>(outcome.correct),
          static_cast<std::uint8_t>(outcome.abstained()), static_cast<std::uint8_t>(capped)};
}

AttackTrial run_silence_trial(const GossipConfig& config, std::size_t window,
                              RngStream& rng) {
  std::size_t seen = 0;
  NodeId first;
  const StepHook hook = [&](const StepInfo& info) {
    if (!config.is_curious(info.event.receiver)) return true;
    if (seen == 0) first = info.event.sender;
    else if (info.event.sender == first) return false;
    ++seen;
    return seen <= window;
  };
  const ExecutionTrace trace = run_protocol(config, rng, hook);
  const AttackOutcome outcome = silence_attack(observe(trace), window);
  return {static_cast<std::uint8_t>(outcome.correct),
          static_cast<std::uint8_t>(outcome.abstained()),
          static_cast<std::uint8_t>(trace.status == RunStatus::capped)};
}

}  // namespace

AttackPrecision estimate_attack_precision(const GossipConfig& config,
                                          const AttackSpec& attack, std::uint64_t trials,
                                          const RngStream& rng,
                                          const ExecutionPolicy& policy) {
  if (trials == 0) throw std::invalid_argument("estimate_attack_precision: trials must be >= 1");
  config.validate();
  if (attack.kind == AttackSpec::Kind::multi_rumor && (attack.rumors == 0 || attack.k == 0))
    throw std::invalid_argument("estimate_attack_precision: multi_rumor needs m >= 1 and k >= 1");
  const auto param = attack.parameter(config.n, config.f);

  const auto runs = run_trials(
      trials, rng,
      [&](std::uint64_t, RngStream& trial_rng) {
        GossipConfig cfg = config;
        cfg.source = NodeId{static_cast<std::uint32_t>(trial_rng.uniform_below(config.honest_count()))};
        switch (attack.kind) {
          case AttackSpec::Kind::map:
            return run_map_trial(cfg, static_cast<std::uint32_t>(param), trial_rng);
          case AttackSpec::Kind::multi_rumor:
            return run_multi_rumor_trial(cfg, attack, trial_rng);
          case AttackSpec::Kind::silence:
            return run_silence_trial(cfg, param, trial_rng);
        }
        return AttackTrial{};
      },
      policy);

  std::uint64_t correct = 0, abstained = 0, incomplete = 0;
  for (const auto& r : runs) {
    correct += r.correct;
    abstained += r.abstained;
    incomplete += r.incomplete;
  }
  AttackPrecision out;
  out.precision = make_estimate(correct, trials, incomplete);
  out.confident = make_estimate(correct, trials - abstained, incomplete);
  out.abstentions = abstained;
  return out;
}

// ---------------------------------------------------------------------------
// Spreading

double quantile(std::vector<double> sample, double q) {
  if (sample.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(sample.begin(), sample.end());
  const double h = (sample.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  return sample[lo] + (h - lo) * (sample[hi] - sample[lo]);
}

double median(std::vector<double> sample) { return quantile(std::move(sample), 0.5); }

std::optional<double> late_active_fraction(const RoundTrace& rounds, std::uint32_t n,
                                           double threshold) {
  double sum = 0.0;
  std::size_t count = 0;
  std::uint64_t informed_at_start = 1;
  for (const auto& rec : rounds) {
    if (static_cast<double>(informed_at_start) / n > threshold) {
      sum += static_cast<double>(rec.active) / n;
      ++count;
    }
    informed_at_start = rec.informed;
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

SpreadingSummary estimate_spreading(const GossipConfig& config, std::uint64_t trials,
                                    const RngStream& rng, const SpreadOptions& options,
                                    const ExecutionPolicy& policy) {
  if (trials == 0) throw std::invalid_argument("estimate_spreading: trials must be >= 1");
  config.validate();

  struct Run {
    std::vector<std::uint32_t> informed;
    std::vector<std::uint32_t> active;
    std::uint64_t messages = 0;
    std::uint8_t capped = 0;
    double late = -1.0;
  };
  SyncOptions sync;
  sync.max_rounds = options.max_rounds;
  sync.record_events = false;

  const auto runs = run_trials(
      trials, rng,
      [&](std::uint64_t, RngStream& trial_rng) {
        const SyncRun result = run_sync(config, trial_rng, sync);
        Run run;
        run.informed.reserve(result.rounds.size());
        run.active.reserve(result.rounds.size());
        for (const auto& rec : result.rounds) {
          run.informed.push_back(static_cast<std::uint32_t>(rec.informed));
          run.active.push_back(static_cast<std::uint32_t>(rec.active));
        }
        run.messages = result.rounds.empty() ? 0 : result.rounds.back().cumulative_messages;
        run.capped = result.trace.status != RunStatus::completed;
        if (!run.capped)
          run.late = late_active_fraction(result.rounds, config.n, options.late_threshold)
                         .value_or(-1.0);
        return run;
      },
      policy);

  SpreadingSummary out;
  out.trials = trials;
  std::size_t longest = 0;
  for (const auto& run : runs) {
    longest = std::max(longest, run.informed.size());
    if (run.capped) {
      ++out.capped;
      continue;
    }
    out.completion_rounds.push_back(run.informed.size());
    out.total_messages.push_back(run.messages);
    if (run.late >= 0.0) out.late_active.push_back(run.late);
  }

  const double nd = config.n;
  std::vector<double> informed(runs.size()), active(runs.size());
  out.trajectory.reserve(longest);
  for (std::size_t r = 0; r < longest; ++r) {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto& run = runs[i];
      const std::size_t k = std::min(r, run.informed.size() - 1);
      informed[i] = run.informed[k] / nd;
      active[i] = run.active[k] / nd;
    }
    out.trajectory.push_back({r, quantile(informed, 0.5), quantile(informed, 0.1),
                              quantile(informed, 0.9), quantile(active, 0.5),
                              quantile(active, 0.1), quantile(active, 0.9)});
  }
  return out;
}

}  // namespace gossip

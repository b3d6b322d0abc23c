#include "gossip/protocols.hpp"

#include <stdexcept>
#include <string>

namespace gossip {

void ActiveSet::insert(NodeId id) {
  if (position_[id.value] != kAbsent) return;
  position_[id.value] = static_cast<std::uint32_t>(members_.size());
  members_.push_back(id);
}

void ActiveSet::erase(NodeId id) {
  const std::uint32_t pos = position_[id.value];
  if (pos == kAbsent) return;
  const NodeId last = members_.back();
  members_[pos] = last;
  position_[last.value] = pos;
  members_.pop_back();
  position_[id.value] = kAbsent;
}

void ActiveSet::clear() {
  for (NodeId id : members_) position_[id.value] = kAbsent;
  members_.clear();
}

ProtocolState::ProtocolState(const GossipConfig& config, bool record_events)
    : informed_(config.n, 0), record_events_(record_events), active_(config.n) {
  config.validate();
  trace_.config = config;
  informed_[config.source.value] = 1;
  active_.insert(config.source);
}

NodeId ProtocolState::tell_gossip(NodeId sender, RngStream& rng) {
  if (sender.value >= trace_.config.n || !informed_[sender.value])
    throw std::logic_error("tell_gossip: sender " + std::to_string(sender.value) +
                           " is not informed");
  const NodeId receiver{static_cast<std::uint32_t>(rng.uniform_below(trace_.config.n))};
  if (!informed_[receiver.value]) {
    informed_[receiver.value] = 1;
    ++informed_count_;
  }
  if (record_events_) trace_.events.push_back({sender, receiver});
  ++steps_;
  return receiver;
}

ExecutionTrace ProtocolState::finish(RunStatus status) && {
  trace_.status = status;
  return std::move(trace_);
}

namespace {

// Muting coin; no draw is spent at the deterministic endpoints.
inline bool stays_active(double s, RngStream& rng) {
  if (s >= 1.0) return true;
  if (s <= 0.0) return false;
  return rng.bernoulli(s);
}

// Shared protocol loop once A and I are set up.
ExecutionTrace push_loop(ProtocolState state, double s, RngStream& rng,
                         const StepHook& hook) {
  const std::uint64_t cap = state.config().effective_step_cap();
  ActiveSet& active = state.active();
  while (!state.all_informed()) {
    if (state.steps() >= cap) return std::move(state).finish(RunStatus::capped);
    const NodeId sender = active.at(rng.uniform_below(active.size()));
    const bool stays = stays_active(s, rng);
    if (!stays) active.erase(sender);
    const NodeId receiver = state.tell_gossip(sender, rng);
    active.insert(receiver);
    if (hook) {
      const StepInfo info{state.steps() - 1, {sender, receiver}, stays,
                          active.size(), state.informed_count()};
      if (!hook(info)) return std::move(state).finish(RunStatus::halted);
    }
  }
  return std::move(state).finish(RunStatus::completed);
}

}  // namespace

ExecutionTrace run_async(const GossipConfig& config, RngStream& rng,
                         const StepHook& hook) {
  if (config.variant != Variant::parameterized)
    throw std::invalid_argument("run_async: variant must be parameterized");
  return push_loop(ProtocolState(config), config.s, rng, hook);
}

ExecutionTrace run_delayed_start(const GossipConfig& config, RngStream& rng,
                                 const StepHook& hook) {
  if (config.variant != Variant::delayed_start)
    throw std::invalid_argument("run_delayed_start: variant must be delayed_start");
  ProtocolState state(config);
  ActiveSet& active = state.active();
  active.erase(config.source);
  const NodeId receiver = state.tell_gossip(config.source, rng);
  active.insert(receiver);
  if (hook) {
    const StepInfo info{0, {config.source, receiver}, false, active.size(),
                        state.informed_count()};
    if (!hook(info)) return std::move(state).finish(RunStatus::halted);
  }
  return push_loop(std::move(state), 1.0, rng, hook);
}

ExecutionTrace run_protocol(const GossipConfig& config, RngStream& rng,
                            const StepHook& hook) {
  switch (config.variant) {
    case Variant::parameterized:
      return run_async(config, rng, hook);
    case Variant::delayed_start:
      return run_delayed_start(config, rng, hook);
  }
  throw std::invalid_argument("run_protocol: unknown variant");
}

SyncRun run_sync(const GossipConfig& config, RngStream& rng,
                 const SyncOptions& options) {
  if (config.variant != Variant::parameterized)
    throw std::invalid_argument("run_sync: variant must be parameterized");
  ProtocolState state(config, options.record_events);
  const std::uint64_t cap = config.effective_step_cap();
  const std::uint32_t n = config.n;

  SyncRun run;
  std::vector<NodeId> senders;
  std::vector<NodeId> next;
  std::vector<std::uint8_t> in_next(n, 0);
  std::uint64_t sent_total = 0;

  auto finish = [&](RunStatus status) {
    run.trace = std::move(state).finish(status);
    return std::move(run);
  };

  for (std::uint64_t round = 0; !state.all_informed(); ++round) {
    if (options.max_rounds != 0 && round >= options.max_rounds)
      return finish(RunStatus::capped);

    senders = state.active().members();
    RoundRecord rec;
    rec.round = round;
    rec.active = senders.size();
    next.clear();

    bool stop = false;
    RunStatus stop_status = RunStatus::completed;
    for (NodeId sender : senders) {
      if (sent_total >= cap) {
        stop = true;
        stop_status = RunStatus::capped;
        break;
      }
      const NodeId receiver = state.tell_gossip(sender, rng);
      ++sent_total;
      ++rec.messages_sent;
      const bool stays = stays_active(config.s, rng);
      if (!in_next[receiver.value]) {
        in_next[receiver.value] = 1;
        next.push_back(receiver);
      }
      if (stays && !in_next[sender.value]) {
        in_next[sender.value] = 1;
        next.push_back(sender);
      }
      if (options.hook) {
        const StepInfo info{sent_total - 1, {sender, receiver}, stays, next.size(),
                            state.informed_count()};
        if (!options.hook(info)) {
          stop = true;
          stop_status = RunStatus::halted;
          break;
        }
      }
      if (state.all_informed()) break;
    }

    rec.informed = state.informed_count();
    rec.cumulative_messages = sent_total;
    run.rounds.push_back(rec);

    ActiveSet& active = state.active();
    active.clear();
    for (NodeId id : next) {
      active.insert(id);
      in_next[id.value] = 0;
    }
    if (stop) return finish(stop_status);
  }
  return finish(RunStatus::completed);
}

}  // namespace gossip

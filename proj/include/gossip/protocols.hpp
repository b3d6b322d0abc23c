#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gossip/core.hpp"

namespace gossip {

/// Set of node ids with O(1) insert, erase, membership and uniform sampling.
class ActiveSet {
 public:
  explicit ActiveSet(std::uint32_t n) : position_(n, kAbsent) {}

  bool contains(NodeId id) const { return position_[id.value] != kAbsent; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  NodeId at(std::size_t i) const { return members_[i]; }
  const std::vector<NodeId>& members() const { return members_; }

  void insert(NodeId id);
  void erase(NodeId id);
  void clear();

 private:
  static constexpr std::uint32_t kAbsent = ~std::uint32_t{0};
  std::vector<NodeId> members_;
  std::vector<std::uint32_t> position_;
};

/// What a step hook sees after every tell_gossip call.
struct StepInfo {
  std::uint64_t step = 0;    ///< index of the event in the trace
  Event event;
  bool sender_stays = true;  ///< outcome of the sender's muting coin
  std::size_t active_after = 0;
  std::size_t informed_after = 0;
};

/// Called after each event; returning false halts the run (status `halted`).
using StepHook = std::function<bool(const StepInfo&)>;

/// Informed set I, active set A and the trace built so far.
class ProtocolState {
 public:
  explicit ProtocolState(const GossipConfig& config, bool record_events = true);

  const GossipConfig& config() const { return trace_.config; }
  bool is_informed(NodeId id) const { return informed_[id.value] != 0; }
  std::uint32_t informed_count() const { return informed_count_; }
  bool all_informed() const { return informed_count_ == trace_.config.n; }

  ActiveSet& active() { return active_; }
  const ActiveSet& active() const { return active_; }
  const std::vector<Event>& events() const { return trace_.events; }
  /// tell_gossip calls so far (equals events().size() when recording).
  std::uint64_t steps() const { return steps_; }

  /// Sends the rumor from `sender` to a node drawn uniformly over all n
  /// nodes (self included), records the event and marks the receiver
  /// informed. Activation of the receiver is left to the engine.
  /// Throws std::logic_error if `sender` is not informed.
  NodeId tell_gossip(NodeId sender, RngStream& rng);

  ExecutionTrace finish(RunStatus status) &&;

 private:
  ExecutionTrace trace_;
  std::vector<std::uint8_t> informed_;
  std::uint32_t informed_count_ = 1;
  std::uint64_t steps_ = 0;
  bool record_events_ = true;
  ActiveSet active_;
};

/// Asynchronous parameterized gossip: while |I| < n, draw i uniformly from A,
/// mute it with probability 1-s, let it tell the rumor and activate the
/// receiver.
ExecutionTrace run_async(const GossipConfig& config, RngStream& rng,
                         const StepHook& hook = {});

struct SyncOptions {
  std::uint64_t max_rounds = 0;  ///< 0 = unlimited
  bool record_events = true;
  StepHook hook;
};

struct SyncRun {
  ExecutionTrace trace;
  RoundTrace rounds;
};

/// Synchronous rounds: every node of the round-start snapshot of A sends one
/// message, then stays active with probability s; receivers are active in
/// the next round. Stops as soon as every node is informed.
SyncRun run_sync(const GossipConfig& config, RngStream& rng,
                 const SyncOptions& options = {});

/// The source tells once and goes silent; standard push (s = 1) continues
/// from the receiver. The source resumes only once it is told again.
ExecutionTrace run_delayed_start(const GossipConfig& config, RngStream& rng,
                                 const StepHook& hook = {});

/// Asynchronous engine selected by `config.variant`.
ExecutionTrace run_protocol(const GossipConfig& config, RngStream& rng,
                            const StepHook& hook = {});

}  // namespace gossip

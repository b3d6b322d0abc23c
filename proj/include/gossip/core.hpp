#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gossip {

/// Node label on the complete graph, in [0, n).
struct NodeId {
  std::uint32_t value = 0;

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

enum class Variant { parameterized, delayed_start };

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view text);

/// Full parameterization of one gossip execution.
///
/// Curious nodes are the f highest ids {n-f, ..., n-1}. On the complete graph
/// only |C| matters, so the convention loses nothing and keeps traces
/// comparable across seeds.
struct GossipConfig {
  std::uint32_t n = 2;
  std::uint32_t f = 0;
  double s = 1.0;
  NodeId source{0};
  Variant variant = Variant::parameterized;
  std::optional<std::uint64_t> step_cap;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  bool is_curious(NodeId id) const { return id.value >= n - f; }
  std::uint32_t honest_count() const { return n - f; }

  /// tell_gossip calls allowed before the run is flagged as capped;
  /// defaults to ceil(50 n ln n).
  std::uint64_t effective_step_cap() const;

  std::vector<NodeId> curious_nodes() const;
  std::vector<NodeId> honest_nodes() const;
};

/// Validated constructor shorthand.
GossipConfig make_config(std::uint32_t n, std::uint32_t f, double s,
                         NodeId source = NodeId{0},
                         Variant variant = Variant::parameterized);

/// Number of curious nodes for a curious fraction, rounded to nearest.
std::uint32_t curious_count(std::uint32_t n, double fraction);

/// Counter-based Philox4x32-10 stream keyed by (master_seed, stream_index).
///
/// The key is the master seed; the upper half of the 128-bit counter holds
/// the stream index and the lower half counts blocks, so any stream can be
/// opened in O(1) without touching the others.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  /// Stream for trial `trial` under this stream's grid point:
  /// stream_index = (this stream_index << 32) + trial.
  RngStream trial(std::uint64_t trial) const;

  std::uint64_t next_u64();
  /// Uniform on [0, bound), bound >= 1 (Lemire's multiply-shift with rejection).
  std::uint64_t uniform_below(std::uint64_t bound);
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  bool bernoulli(double p) { return uniform01() < p; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

  static std::array<std::uint32_t, 4> philox4x32_10(
      std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  unsigned buffered_ = 0;
};

inline RngStream spawn_stream(std::uint64_t master_seed,
                              std::uint64_t stream_index) {
  return RngStream(master_seed, stream_index);
}

/// One tell_gossip call.
struct Event {
  NodeId sender;
  NodeId receiver;

  friend constexpr bool operator==(const Event&, const Event&) = default;
};

enum class RunStatus {
  completed,  ///< every node informed
  capped,     ///< step cap or round limit reached first
  halted,     ///< stopped early by the caller's step hook
};

std::string_view to_string(RunStatus status);

/// The omniscient ordered sequence of tell_gossip calls.
struct ExecutionTrace {
  GossipConfig config;
  std::vector<Event> events;
  RunStatus status = RunStatus::completed;

  bool completed() const { return status == RunStatus::completed; }
};

/// Replays the informed set and returns the first invariant violation, if any.
std::optional<std::string> find_trace_violation(const ExecutionTrace& trace);

/// `step,sender,receiver` with header.
void write_trace_csv(std::ostream& out, const ExecutionTrace& trace);

/// The adversary's view: events whose receiver is curious, in trace order,
/// without global indices. `true_source` is ground truth kept for scoring and
/// is never read by the attacks' prediction logic.
struct ObservedSequence {
  std::uint32_t n = 0;
  NodeId true_source;
  std::vector<Event> entries;

  /// Rank of `node`'s first appearance as a sender (t_d), if it appears.
  std::optional<std::size_t> sender_rank(NodeId node) const;
  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
};

struct TimedEvent {
  std::uint64_t t = 0;  ///< index in the omniscient sequence
  NodeId sender;
  NodeId receiver;
};

/// Observation of the globally timed adversary.
struct TimedObservedSequence {
  std::uint32_t n = 0;
  NodeId true_source;
  std::vector<TimedEvent> entries;

  ObservedSequence untimed() const;
};

struct RoundRecord {
  std::uint64_t round = 0;
  std::uint64_t informed = 0;  ///< informed count at the end of the round
  std::uint64_t active = 0;    ///< active count at the start of the round
  std::uint64_t messages_sent = 0;
  std::uint64_t cumulative_messages = 0;
};

using RoundTrace = std::vector<RoundRecord>;

}  // namespace gossip

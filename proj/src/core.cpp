#include "gossip/core.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace gossip {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::parameterized:
      return "parameterized";
    case Variant::delayed_start:
      return "delayed_start";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view text) {
  if (text == "parameterized") return Variant::parameterized;
  if (text == "delayed_start") return Variant::delayed_start;
  return std::nullopt;
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::completed:
      return "completed";
    case RunStatus::capped:
      return "capped";
    case RunStatus::halted:
      return "halted";
  }
  return "?";
}

void GossipConfig::validate() const {
  if (n < 2) throw std::invalid_argument("n: need at least 2 nodes");
  if (f + 2 > n)
    throw std::invalid_argument("f: at most n-2 curious nodes allowed (f=" +
                                std::to_string(f) +
                                ", n=" + std::to_string(n) + ")");
  if (!(s >= 0.0 && s <= 1.0))
    throw std::invalid_argument("s: muting parameter must lie in [0,1]");
  if (source.value >= n) throw std::invalid_argument("source: id out of range");
  if (is_curious(source))
    throw std::invalid_argument("source: must not be a curious node");
  if (step_cap && *step_cap == 0)
    throw std::invalid_argument("step_cap: must be positive");
}

std::uint64_t GossipConfig::effective_step_cap() const {
  if (step_cap) return *step_cap;
  const double nd = n;
  return static_cast<std::uint64_t>(std::ceil(50.0 * nd * std::log(nd)));
}

std::vector<NodeId> GossipConfig::curious_nodes() const {
  std::vector<NodeId> out;
  out.reserve(f);
  for (std::uint32_t i = n - f; i < n; ++i) out.emplace_back(i);
  return out;
}

std::vector<NodeId> GossipConfig::honest_nodes() const {
  std::vector<NodeId> out;
  out.reserve(n - f);
  for (std::uint32_t i = 0; i < n - f; ++i) out.emplace_back(i);
  return out;
}

GossipConfig make_config(std::uint32_t n, std::uint32_t f, double s,
                         NodeId source, Variant variant) {
  GossipConfig cfg;
  cfg.n = n;
  cfg.f = f;
  cfg.s = s;
  cfg.source = source;
  cfg.variant = variant;
  cfg.validate();
  return cfg;
}

std::uint32_t curious_count(std::uint32_t n, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw std::invalid_argument("f_ratio: must lie in [0,1]");
  return static_cast<std::uint32_t>(std::lround(fraction * n));
}

// ---------------------------------------------------------------------------
// Philox4x32-10

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> RngStream::philox4x32_10(
    std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_seed_(master_seed), stream_index_(stream_index) {}

RngStream RngStream::trial(std::uint64_t trial) const {
  return RngStream(master_seed_, (stream_index_ << 32) + trial);
}

void RngStream::refill() {
  const std::array<std::uint32_t, 4> ctr{
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(stream_index_),
      static_cast<std::uint32_t>(stream_index_ >> 32)};
  const std::array<std::uint32_t, 2> key{
      static_cast<std::uint32_t>(master_seed_),
      static_cast<std::uint32_t>(master_seed_ >> 32)};
  const auto out = philox4x32_10(ctr, key);
  buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  buffered_ = 2;
  ++block_;
}

std::uint64_t RngStream::next_u64() {
  if (buffered_ == 0) refill();
  return buffer_[2 - buffered_--];
}

std::uint64_t RngStream::uniform_below(std::uint64_t bound) {
  unsigned __int128 m =
      static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(bound);
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double RngStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

// ---------------------------------------------------------------------------
// Traces and observations

std::optional<std::string> find_trace_violation(const ExecutionTrace& trace) {
  const auto& cfg = trace.config;
  std::vector<bool> informed(cfg.n, false);
  if (cfg.source.value >= cfg.n) return "source out of range";
  informed[cfg.source.value] = true;
  std::uint32_t count = 1;

  if (trace.events.empty()) {
    if (trace.status == RunStatus::completed)
      return "completed run without any tell_gossip call";
    return std::nullopt;
  }
  if (trace.events.front().sender != cfg.source)
    return "first event not sent by the source";

  for (std::size_t t = 0; t < trace.events.size(); ++t) {
    const Event& e = trace.events[t];
    if (e.sender.value >= cfg.n || e.receiver.value >= cfg.n)
      return "event " + std::to_string(t) + " references a node out of range";
    if (!informed[e.sender.value])
      return "event " + std::to_string(t) + ": sender " +
             std::to_string(e.sender.value) + " not informed";
    if (!informed[e.receiver.value]) {
      informed[e.receiver.value] = true;
      ++count;
    }
  }
  if (trace.status == RunStatus::completed && count != cfg.n)
    return "completed run leaves " + std::to_string(cfg.n - count) +
           " nodes uninformed";
  return std::nullopt;
}

void write_trace_csv(std::ostream& out, const ExecutionTrace& trace) {
  out << "step,sender,receiver\n";
  std::uint64_t step = 0;
  for (const Event& e : trace.events)
    out << step++ << ',' << e.sender.value << ',' << e.receiver.value << '\n';
}

std::optional<std::size_t> ObservedSequence::sender_rank(NodeId node) const {
  for (std::size_t t = 0; t < entries.size(); ++t)
    if (entries[t].sender == node) return t;
  return std::nullopt;
}

ObservedSequence TimedObservedSequence::untimed() const {
  ObservedSequence out{n, true_source, {}};
  out.entries.reserve(entries.size());
  for (const auto& e : entries) out.entries.push_back({e.sender, e.receiver});
  return out;
}

}  // namespace gossip

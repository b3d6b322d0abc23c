#include <doctest.h>

#include <cmath>

#include "gossip/adversary.hpp"
#include "gossip/bounds.hpp"
#include "gossip/estimators.hpp"
#include "gossip/protocols.hpp"

using namespace gossip;

namespace {

const ExecutionPolicy kSerial{false, 0};
const ExecutionPolicy kParallel{true, 0};

}  // namespace

TEST_CASE("estimate arithmetic") {
  const auto e = make_estimate(250, 1000, 3);
  CHECK(e.estimate == 0.25);
  CHECK(e.ci_half_width == doctest::Approx(2.576 * std::sqrt(0.25 * 0.75 / 1000)));
  CHECK(e.incomplete == 3);
  CHECK_FALSE(e.low_count());
  CHECK(make_estimate(5, 1000).low_count());
  CHECK(make_estimate(0, 10).ci_half_width == 0.0);
}

TEST_CASE("quantiles") {
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  CHECK(quantile({0, 10}, 0.1) == doctest::Approx(1.0));
  CHECK(quantile({7}, 0.9) == 7.0);
  CHECK_THROWS(quantile({}, 0.5));
}

TEST_CASE("event semantics") {
  TimedObservedSequence o{10, NodeId{0}, {{2, NodeId{4}, NodeId{9}}, {5, NodeId{0}, NodeId{9}}}};
  CHECK_FALSE(event_holds(EventSpec::first_sender_is_source(), o, NodeId{0}));
  CHECK(event_holds(EventSpec::first_sender_is(NodeId{4}), o, NodeId{0}));
  CHECK_FALSE(event_holds(EventSpec::source_rank_le(0), o, NodeId{0}));
  CHECK(event_holds(EventSpec::source_rank_le(1), o, NodeId{0}));
  CHECK_FALSE(event_holds(EventSpec::timed_first_disclosure(), o, NodeId{0}));
  CHECK(event_decided(EventSpec::source_rank_le(1), o, NodeId{0}, 6));
  CHECK_FALSE(event_decided(EventSpec::node_rank_le(NodeId{3}, 5), o, NodeId{0}, 6));
  TimedObservedSequence t0{10, NodeId{0}, {{0, NodeId{0}, NodeId{9}}}};
  CHECK(event_holds(EventSpec::timed_first_disclosure(), t0, NodeId{0}));
}

TEST_CASE("early halting gives the same answer as full runs") {
  const auto cfg = make_config(60, 6, 0.3);
  const RngStream base(21, 4);
  const std::vector<EventSpec> family{EventSpec::first_sender_is_source(),
                                      EventSpec::source_rank_le(3),
                                      EventSpec::timed_first_disclosure()};
  const auto halted = estimate_events(cfg, family, cfg.source, 400, base, kSerial);
  // full runs draw the same numbers up to the halting point, so each
  // event's value on the full observation must agree
  std::vector<std::uint64_t> hits(family.size(), 0);
  for (std::uint64_t i = 0; i < 400; ++i) {
    RngStream rng = base.trial(i);
    const auto obs = observe_timed(run_async(cfg, rng));
    for (std::size_t e = 0; e < family.size(); ++e) hits[e] += event_holds(family[e], obs, cfg.source);
  }
  for (std::size_t e = 0; e < family.size(); ++e) CHECK(halted[e].raw_successes == hits[e]);
}

TEST_CASE("serial and parallel runners agree") {
  const RngStream rng(5, 1);
  const auto cfg = make_config(128, 13, 0.5);
  const auto a = estimate_event(cfg, EventSpec::source_rank_le(2), 3000, rng, kSerial);
  const auto b = estimate_event(cfg, EventSpec::source_rank_le(2), 3000, rng, kParallel);
  CHECK(a.raw_successes == b.raw_successes);

  for (auto attack : {AttackSpec::map(10), AttackSpec::multi_rumor(3), AttackSpec::silence()}) {
    const auto pa = estimate_attack_precision(cfg, attack, 500, rng, kSerial);
    const auto pb = estimate_attack_precision(cfg, attack, 500, rng, kParallel);
    CHECK(pa.precision.raw_successes == pb.precision.raw_successes);
    CHECK(pa.abstentions == pb.abstentions);
  }

  const auto sa = estimate_spreading(cfg, 20, rng, {}, kSerial);
  const auto sb = estimate_spreading(cfg, 20, rng, {}, ExecutionPolicy{true, 3});
  CHECK(sa.completion_rounds == sb.completion_rounds);
  CHECK(sa.total_messages == sb.total_messages);
  REQUIRE(sa.trajectory.size() == sb.trajectory.size());
  for (std::size_t r = 0; r < sa.trajectory.size(); ++r)
    CHECK(sa.trajectory[r].informed_med == sb.trajectory[r].informed_med);
}

TEST_CASE("confidence intervals are honest") {
  // 99% intervals around the exact first-sender probability (f+1)/n at s=0
  const auto cfg = make_config(100, 10, 0.0);
  const double truth = 11.0 / 100;
  int covered = 0;
  const int reps = 1000;
  for (int rep = 0; rep < reps; ++rep) {
    const auto e = estimate_event(cfg, EventSpec::first_sender_is_source(), 2000,
                                  RngStream(1234, static_cast<std::uint64_t>(rep)), kSerial);
    covered += std::abs(e.estimate - truth) <= e.ci_half_width;
  }
  CHECK_MESSAGE(covered >= 970, "coverage " << covered << "/" << reps);
}

TEST_CASE("first-sender probabilities at s=0") {
  const auto cfg = make_config(200, 20, 0.0);
  const RngStream rng(3, 3);
  const auto src = estimate_event(cfg, EventSpec::first_sender_is_source(), 100000, rng);
  CHECK(std::abs(src.estimate - 21.0 / 200) <= 3 * src.ci_half_width);
  const auto other = estimate_event(cfg, EventSpec::first_sender_is(NodeId{1}), 100000, rng.trial(1));
  CHECK(std::abs(other.estimate - 1.0 / 200) <= 3 * other.ci_half_width);
}

TEST_CASE("prefix disclosure matches the closed form") {
  for (double s : {0.0, 0.3, 0.7}) {
    const auto cfg = make_config(500, 50, s);
    const auto e = estimate_prefix_disclosure(cfg, 50000, RngStream(2, static_cast<std::uint64_t>(s * 10)));
    const double truth = bounds::p0_F(s, 50, 500);
    CHECK_MESSAGE(std::abs(e.estimate - truth) <= 3 * e.ci_half_width + 1e-12,
                  "s=" << s << " est " << e.estimate << " truth " << truth);
  }
  // s = 1: the source never mutes; runs that finish first stay undecided
  const auto e = estimate_prefix_disclosure(make_config(500, 50, 1.0), 2000, RngStream(2, 99));
  CHECK(e.incomplete > 0);
  CHECK(e.raw_successes + e.incomplete == e.trials);
}

TEST_CASE("dp gap at s=0 is about f/n") {
  const auto cfg = make_config(100, 10, 0.0);
  auto other = cfg;
  other.source = NodeId{1};
  std::vector<EventSpec> family;
  for (NodeId k : cfg.honest_nodes()) family.push_back(EventSpec::first_sender_is(k));
  const auto gap = estimate_dp_gap(cfg, other, family, 40000, RngStream(6, 0));
  CHECK(std::abs(gap.gap - 0.1) <= 3 * gap.ci_half_width());
  CHECK(gap.best_event == 0);
  CHECK_THROWS(estimate_dp_gap(cfg, cfg, family, 10, RngStream(6, 0)));
}

TEST_CASE("map precision at s=0 matches (f+1)/n") {
  const auto cfg = make_config(200, 20, 0.0);
  const auto p = estimate_attack_precision(cfg, AttackSpec::map(0), 20000, RngStream(8, 0));
  CHECK(std::abs(p.precision.estimate - 21.0 / 200) <= 3 * p.precision.ci_half_width);
  CHECK(p.abstentions == 0);
  // singleton prior is always right
  const auto sure = estimate_attack_precision(cfg, AttackSpec::map(1), 200, RngStream(8, 1));
  CHECK(sure.precision.estimate == 1.0);
}

TEST_CASE("attack parameter resolution") {
  CHECK(AttackSpec::map(0).parameter(100, 10) == 90);
  CHECK(AttackSpec::map(500).parameter(100, 10) == 90);
  CHECK(AttackSpec::map(5).parameter(100, 10) == 5);
  CHECK(AttackSpec::multi_rumor(7).parameter(100, 10) == 7);
  CHECK(AttackSpec::silence().parameter(4096, 410) == 70);
  CHECK(parse_attack_kind("silence") == AttackSpec::Kind::silence);
  CHECK_FALSE(parse_attack_kind("bogus"));
}

TEST_CASE("late active fraction uses the informed count at round start") {
  RoundTrace rounds{{0, 50, 1, 1, 1}, {1, 99, 30, 30, 31}, {2, 100, 40, 40, 71}};
  // round 1 starts with 50/100 informed, round 2 with 99/100
  CHECK(late_active_fraction(rounds, 100, 0.98).value() == doctest::Approx(0.40));
  CHECK_FALSE(late_active_fraction(rounds, 100, 0.995));
}

TEST_CASE("spreading summary") {
  const auto cfg = make_config(1024, 102, 1.0);
  const auto sum = estimate_spreading(cfg, 30, RngStream(4, 0));
  CHECK(sum.capped == 0);
  CHECK(sum.completion_rounds.size() == 30);
  const double med = median(std::vector<double>(sum.completion_rounds.begin(), sum.completion_rounds.end()));
  // push on the complete graph: log2 n + ln n + O(1) rounds
  CHECK(med > 10);
  CHECK(med < 30);
  CHECK(sum.trajectory.back().informed_med == 1.0);
  for (std::size_t r = 1; r < sum.trajectory.size(); ++r)
    CHECK(sum.trajectory[r].informed_med >= sum.trajectory[r - 1].informed_med);

  const auto capped = estimate_spreading(make_config(1024, 102, 0.0), 3, RngStream(4, 1),
                                         SpreadOptions{50, 0.99});
  CHECK(capped.capped == 3);
  CHECK(capped.completion_rounds.empty());
}
